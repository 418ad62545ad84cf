//! Metric `g_f` on `O × R^p`, its flat-space embedding, the second
//! fundamental form, Christoffel symbols, `R` and `∇R`.
//!
//! Coordinates are ordered `(x1..xp, y1..yp)`. The metric is
//!
//! ```text
//! g(∂x_i, ∂x_j) = f;i f;j,   g(∂x_i, ∂y_j) = δ_ij,   g(∂y_i, ∂y_j) = 0,
//! ```
//!
//! and the curvature convention is `R(∂_i,∂_j,∂_k,∂_l) = ∂_iΓ_jkl − ∂_jΓ_ikl`
//! (plus the quadratic terms, which vanish for this family).

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{jet3, FieldSpec, Jet3};
use crate::linalg;
use crate::tensor::{matrix_rows, Curv4, Curv5, Tensor};

/// A point `(x, y)` of `M = O × R^p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Point {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Point {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Point> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
        }
        if x.is_empty() {
            return Err(Error::InvalidArgument("point must have p >= 1".into()));
        }
        Ok(Point { x, y })
    }

    /// `x` part given, `y = 0`.
    pub fn from_x(x: &[f64]) -> Point {
        Point { x: x.to_vec(), y: vec![0.0; x.len()] }
    }

    /// Splits `2p` coordinates into `x` then `y`.
    pub fn from_coords(coords: &[f64]) -> Result<Point> {
        if coords.is_empty() || !coords.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "point needs 2p coordinates, got {}",
                coords.len()
            )));
        }
        let p = coords.len() / 2;
        Point::new(coords[..p].to_vec(), coords[p..].to_vec())
    }

    pub fn origin(p: usize) -> Point {
        Point { x: vec![0.0; p], y: vec![0.0; p] }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn coords(&self) -> Vec<f64> {
        self.x.iter().chain(&self.y).copied().collect()
    }
}

fn field_jet(field: &FieldSpec, point: &Point) -> Result<Jet3> {
    if point.dim() != field.dim() {
        return Err(Error::DimensionMismatch { expected: field.dim(), got: point.dim() });
    }
    jet3(field, &point.x)
}

/// `2p × 2p` metric in the coordinate frame.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricValue(pub DMatrix<f64>);

impl MetricValue {
    pub fn from_gradient(grad: &[f64]) -> MetricValue {
        let p = grad.len();
        let mut g = DMatrix::zeros(2 * p, 2 * p);
        for i in 0..p {
            for j in 0..p {
                g[(i, j)] = grad[i] * grad[j];
            }
            g[(i, p + i)] = 1.0;
            g[(p + i, i)] = 1.0;
        }
        MetricValue(g)
    }

    pub fn p(&self) -> usize {
        self.0.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn xx(&self) -> DMatrix<f64> {
        let p = self.p();
        self.0.view((0, 0), (p, p)).into_owned()
    }

    pub fn xy(&self) -> DMatrix<f64> {
        let p = self.p();
        self.0.view((0, p), (p, p)).into_owned()
    }

    pub fn yy(&self) -> DMatrix<f64> {
        let p = self.p();
        self.0.view((p, p), (p, p)).into_owned()
    }

    /// `[[0, I], [I, −∇f ∇fᵀ]]`, read off from the block structure.
    pub fn inverse(&self) -> DMatrix<f64> {
        let p = self.p();
        let mut inv = DMatrix::zeros(2 * p, 2 * p);
        for i in 0..p {
            inv[(i, p + i)] = 1.0;
            inv[(p + i, i)] = 1.0;
            for j in 0..p {
                inv[(p + i, p + j)] = -self.0[(i, j)];
            }
        }
        inv
    }

    pub fn signature(&self) -> (usize, usize) {
        linalg::signature(&self.0, 1e-12)
    }
}

pub fn metric_at(field: &FieldSpec, point: &Point) -> Result<MetricValue> {
    let jet = field_jet(field, point)?;
    Ok(MetricValue::from_gradient(&jet.grad))
}

/// Image `F(x, y)` and unit normal `ν` in the ambient space `W` with basis
/// `(u_1..u_p, v_1..v_p, w_1)`, plus the coordinate tangents `∂_a F` as
/// columns.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub position: DVector<f64>,
    pub normal: DVector<f64>,
    pub tangents: DMatrix<f64>,
    /// Second derivatives `∂_i ∂_j F` for `x` coordinates; all others vanish.
    pub hessian_w: DMatrix<f64>,
}

/// Inner product on `W`: `⟨u_i, v_j⟩ = δ_ij`, `⟨w_1, w_1⟩ = 1`, all else 0.
/// Signature `(p + 1, p)`.
pub fn ambient_inner_product(p: usize) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(2 * p + 1, 2 * p + 1);
    for i in 0..p {
        w[(i, p + i)] = 1.0;
        w[(p + i, i)] = 1.0;
    }
    w[(2 * p, 2 * p)] = 1.0;
    w
}

impl Embedding {
    /// `⟨∂_a F, ∂_b F⟩` for all coordinate pairs.
    pub fn pullback_metric(&self) -> DMatrix<f64> {
        let p = (self.position.len() - 1) / 2;
        self.tangents.transpose() * ambient_inner_product(p) * &self.tangents
    }

    pub fn normal_norm(&self) -> f64 {
        let p = (self.position.len() - 1) / 2;
        (self.normal.transpose() * ambient_inner_product(p) * &self.normal)[(0, 0)]
    }

    /// `⟨ν, ∂_a F⟩` for every coordinate tangent.
    pub fn normal_pairings(&self) -> DVector<f64> {
        let p = (self.position.len() - 1) / 2;
        (self.normal.transpose() * ambient_inner_product(p) * &self.tangents).transpose()
    }

    /// `⟨∂_i ∂_j F, ν⟩` on the `x` block; the second fundamental form.
    pub fn shape_form(&self) -> DMatrix<f64> {
        // ∂_i∂_j F = f;ij w_1 and ⟨w_1, ν⟩ = ν_w
        let nu_w = self.normal[self.normal.len() - 1];
        &self.hessian_w * nu_w
    }
}

pub fn embed_and_normal(field: &FieldSpec, point: &Point) -> Result<Embedding> {
    let jet = field_jet(field, point)?;
    let p = field.dim();
    let n = 2 * p + 1;
    let mut position = DVector::zeros(n);
    let mut normal = DVector::zeros(n);
    let mut tangents = DMatrix::zeros(n, 2 * p);
    for i in 0..p {
        position[i] = point.x[i];
        position[p + i] = point.y[i];
        normal[p + i] = -jet.grad[i];
        tangents[(i, i)] = 1.0;
        tangents[(2 * p, i)] = jet.grad[i];
        tangents[(p + i, p + i)] = 1.0;
    }
    position[2 * p] = jet.value;
    normal[2 * p] = 1.0;
    let hessian_w = DMatrix::from_fn(p, p, |i, j| jet.hess(i, j));
    Ok(Embedding { position, normal, tangents, hessian_w })
}

/// Restriction of the second fundamental form to the `x` distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondFF {
    pub l: DMatrix<f64>,
    pub positive_definite: bool,
}

impl SecondFF {
    pub fn from_matrix(l: DMatrix<f64>) -> SecondFF {
        let positive_definite = linalg::is_positive_definite(&l);
        SecondFF { l, positive_definite }
    }

    pub fn from_jet(jet: &Jet3) -> SecondFF {
        let p = jet.dim();
        SecondFF::from_matrix(DMatrix::from_fn(p, p, |i, j| jet.hess(i, j)))
    }
}

pub fn second_ff(field: &FieldSpec, point: &Point) -> Result<SecondFF> {
    Ok(SecondFF::from_jet(&field_jet(field, point)?))
}

/// `Γ_ijk = ½(∂_i g_jk + ∂_j g_ik − ∂_k g_ij)` on the `x` block, from the
/// metric derivatives `∂_i g_jk = f;ij f;k + f;j f;ik`.
pub fn christoffel_from_jet(jet: &Jet3) -> Tensor<3> {
    let p = jet.dim();
    let dg = |i: usize, j: usize, k: usize| jet.hess(i, j) * jet.grad[k] + jet.grad[j] * jet.hess(i, k);
    Tensor::from_fn(p, |[i, j, k]| 0.5 * (dg(i, j, k) + dg(j, i, k) - dg(k, i, j)))
}

pub fn christoffel(field: &FieldSpec, point: &Point) -> Result<Tensor<3>> {
    Ok(christoffel_from_jet(&field_jet(field, point)?))
}

/// `R_ijkl = L_il L_jk − L_ik L_jl`.
pub fn curvature_gauss(l: &SecondFF) -> Curv4 {
    curvature_from_form(&l.l)
}

pub fn curvature_from_form(l: &DMatrix<f64>) -> Curv4 {
    Tensor::from_fn(l.nrows(), |[i, j, k, m]| l[(i, m)] * l[(j, k)] - l[(i, k)] * l[(j, m)])
}

/// Levi-Civita data of the full `2p`-dimensional metric, computed from
/// metric derivatives and a numerically inverted metric.
#[derive(Debug, Clone)]
pub struct FullConnection {
    /// `Γ_abc = g(∇_a ∂_b, ∂_c)`.
    pub first_kind: Tensor<3>,
    /// `Γ^c_ab`, stored as `[a, b, c]`.
    pub second_kind: Tensor<3>,
    pub riemann: Curv4,
}

pub fn levi_civita_full(field: &FieldSpec, point: &Point) -> Result<FullConnection> {
    let jet = field_jet(field, point)?;
    Ok(levi_civita_from_jet(&jet))
}

pub(crate) fn levi_civita_from_jet(jet: &Jet3) -> FullConnection {
    let p = jet.dim();
    let n = 2 * p;
    let f1 = |i: usize| jet.grad[i];
    let f2 = |i: usize, j: usize| jet.hess(i, j);
    let f3 = |i: usize, j: usize, k: usize| jet.third(i, j, k);

    // ∂_c g_ab and ∂_d ∂_c g_ab; only x indices contribute.
    let dg = Tensor::<3>::from_fn(n, |[a, b, c]| {
        if a < p && b < p && c < p {
            f2(a, c) * f1(b) + f1(a) * f2(b, c)
        } else {
            0.0
        }
    });
    let ddg = Tensor::<4>::from_fn(n, |[a, b, c, d]| {
        if a < p && b < p && c < p && d < p {
            f3(a, c, d) * f1(b) + f2(a, c) * f2(b, d) + f2(a, d) * f2(b, c) + f1(a) * f3(b, c, d)
        } else {
            0.0
        }
    });

    let first_kind =
        Tensor::<3>::from_fn(n, |[a, b, c]| 0.5 * (dg[[b, c, a]] + dg[[a, c, b]] - dg[[a, b, c]]));
    // ∂_d Γ_abc
    let d_first = Tensor::<4>::from_fn(n, |[a, b, c, d]| {
        0.5 * (ddg[[b, c, a, d]] + ddg[[a, c, b, d]] - ddg[[a, b, c, d]])
    });

    let g = MetricValue::from_gradient(&jet.grad).0;
    let g_inv = g.clone().try_inverse().expect("metric of this family is always invertible");
    let second_kind = Tensor::<3>::from_fn(n, |[a, b, c]| {
        (0..n).map(|m| g_inv[(c, m)] * first_kind[[a, b, m]]).sum()
    });

    let riemann = Tensor::<4>::from_fn(n, |[a, b, c, d]| {
        let mut r = d_first[[b, c, d, a]] - d_first[[a, c, d, b]];
        for m in 0..n {
            r -= second_kind[[b, c, m]] * first_kind[[a, d, m]];
            r += second_kind[[a, c, m]] * first_kind[[b, d, m]];
        }
        r
    });

    FullConnection { first_kind, second_kind, riemann }
}

/// `x`-block of the curvature tensor via Christoffel symbols and their
/// derivatives (third-order jets).
pub fn curvature_levi_civita(field: &FieldSpec, point: &Point) -> Result<Curv4> {
    let full = levi_civita_full(field, point)?;
    Ok(full.riemann.leading_block(field.dim()))
}

/// `∇R_ijkl;n = ∂_n(L_il L_jk − L_ik L_jl)` on the `x` block.
pub fn nabla_from_jet(jet: &Jet3) -> Curv5 {
    let p = jet.dim();
    Tensor::from_fn(p, |[i, j, k, l, n]| {
        jet.third(i, l, n) * jet.hess(j, k) + jet.hess(i, l) * jet.third(j, k, n)
            - jet.third(i, k, n) * jet.hess(j, l)
            - jet.hess(i, k) * jet.third(j, l, n)
    })
}

pub fn nabla_curvature(field: &FieldSpec, point: &Point) -> Result<Curv5> {
    Ok(nabla_from_jet(&field_jet(field, point)?))
}

/// Full `2p`-dimensional `∇R` assembled from the coordinate derivative of
/// the `x`-block curvature and the connection terms of the full
/// Levi-Civita route:
/// `∇R_abcd;e = ∂_e R_abcd − Γ^m_ea R_mbcd − Γ^m_eb R_amcd − Γ^m_ec R_abmd − Γ^m_ed R_abcm`.
/// Returns the tensor together with the largest connection term, which
/// must vanish for this family.
pub fn nabla_curvature_full(field: &FieldSpec, point: &Point) -> Result<(Curv5, f64)> {
    let jet = field_jet(field, point)?;
    let p = jet.dim();
    let n = 2 * p;
    let partial = nabla_from_jet(&jet).extend_by_zero(n);
    let lc = levi_civita_from_jet(&jet);
    let (r, gam) = (&lc.riemann, &lc.second_kind);
    let mut worst = 0.0_f64;
    let full = Tensor::<5>::from_fn(n, |[a, b, c, d, e]| {
        let mut corr = 0.0;
        for m in 0..n {
            corr += gam[[e, a, m]] * r[[m, b, c, d]]
                + gam[[e, b, m]] * r[[a, m, c, d]]
                + gam[[e, c, m]] * r[[a, b, m, d]]
                + gam[[e, d, m]] * r[[a, b, c, m]];
        }
        worst = worst.max(corr.abs());
        partial[[a, b, c, d, e]] - corr
    });
    Ok((full, worst))
}

/// Everything evaluated once at a point: jet, metric, `L`, `R`, `∇R`.
#[derive(Debug, Clone)]
pub struct LocalGeometry {
    pub point: Point,
    pub jet: Jet3,
    pub metric: MetricValue,
    pub second_ff: SecondFF,
    pub curvature: Curv4,
    pub nabla: Curv5,
}

impl LocalGeometry {
    pub fn new(field: &FieldSpec, point: &Point) -> Result<LocalGeometry> {
        let jet = field_jet(field, point)?;
        let second_ff = SecondFF::from_jet(&jet);
        Ok(LocalGeometry {
            point: point.clone(),
            metric: MetricValue::from_gradient(&jet.grad),
            curvature: curvature_gauss(&second_ff),
            nabla: nabla_from_jet(&jet),
            second_ff,
            jet,
        })
    }

    pub fn p(&self) -> usize {
        self.jet.dim()
    }

    /// `R` on the full tangent space, zero whenever a slot lies in `Y`.
    pub fn full_curvature(&self) -> Curv4 {
        self.curvature.extend_by_zero(2 * self.p())
    }

    pub fn full_nabla(&self) -> Curv5 {
        self.nabla.extend_by_zero(2 * self.p())
    }

    pub fn g(&self, u: &[f64], v: &[f64]) -> f64 {
        let g = self.metric.matrix();
        let n = g.nrows();
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                s += u[a] * g[(a, b)] * v[b];
            }
        }
        s
    }

    /// Requires `L` positive definite, the standing hypothesis for frames
    /// and invariants.
    pub fn require_positive_definite(&self) -> Result<()> {
        linalg::cholesky(&self.second_ff.l).map(|_| ())
    }
}

/// JSON tensor dump: `p`, `point`, `metric`, `L`, `R`, `nablaR`.
#[derive(Debug, Clone, Serialize)]
pub struct TensorDump {
    pub p: usize,
    pub point: Vec<f64>,
    pub metric: Vec<Vec<f64>>,
    #[serde(rename = "L")]
    pub l: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    pub r: Curv4,
    #[serde(rename = "nablaR")]
    pub nabla_r: Curv5,
}

impl TensorDump {
    pub fn new(local: &LocalGeometry) -> TensorDump {
        TensorDump {
            p: local.p(),
            point: local.point.coords(),
            metric: matrix_rows(local.metric.matrix()),
            l: matrix_rows(&local.second_ff.l),
            r: local.curvature.clone(),
            nabla_r: local.nabla.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{canonical_f, parse_field};
    use crate::model::check_act_symmetries;
    use std::f64::consts::FRAC_PI_2;

    fn f0(p: usize) -> FieldSpec {
        canonical_f(&parse_field("0", 1).unwrap(), p).unwrap()
    }

    fn sin_family(p: usize) -> FieldSpec {
        canonical_f(&parse_field("0.5*sin(x1)", 1).unwrap(), p).unwrap()
    }

    #[test]
    fn metric_blocks() {
        let g = metric_at(&f0(3), &Point::from_x(&[1.0, 2.0, 0.0])).unwrap();
        let xx = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 2.0, 4.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(g.xx(), xx);
        assert_eq!(g.xy(), DMatrix::identity(3, 3));
        assert_eq!(g.yy(), DMatrix::zeros(3, 3));
        assert!((g.matrix() * g.inverse() - DMatrix::identity(6, 6)).amax() < 1e-15);
        assert_eq!(g.signature(), (3, 3));

        let g0 = metric_at(&f0(3), &Point::origin(3)).unwrap();
        assert_eq!(g0.xx(), DMatrix::zeros(3, 3));
        assert_eq!(g0.xy(), DMatrix::identity(3, 3));
    }

    #[test]
    fn embedding_normal() {
        let e = embed_and_normal(&f0(3), &Point::from_x(&[1.0, 0.0, 0.0])).unwrap();
        assert_eq!(e.normal[6], 1.0);
        assert_eq!(e.normal[3], -1.0);
        assert_eq!(e.normal_norm(), 1.0);
        assert!(e.normal_pairings().amax() < 1e-15);
        // ∂y_i F = v_i
        for i in 0..3 {
            assert_eq!(e.tangents[(3 + i, 3 + i)], 1.0);
        }

        let f = sin_family(3);
        let pt = Point::origin(3);
        let e = embed_and_normal(&f, &pt).unwrap();
        let g = metric_at(&f, &pt).unwrap();
        assert!((e.pullback_metric() - g.matrix()).amax() < 1e-12);
        assert!((e.shape_form() - second_ff(&f, &pt).unwrap().l).amax() < 1e-15);
    }

    #[test]
    fn second_fundamental_form_examples() {
        let l = second_ff(&f0(3), &Point::origin(3)).unwrap();
        assert_eq!(l.l, DMatrix::identity(3, 3));
        assert!(l.positive_definite);

        let l = second_ff(&sin_family(3), &Point::origin(3)).unwrap();
        assert_eq!(l.l, DMatrix::identity(3, 3));

        let saddle = parse_field("0.5*(x1^2-x2^2+x3^2)", 3).unwrap();
        let l = second_ff(&saddle, &Point::origin(3)).unwrap();
        assert_eq!(l.l, DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0, 1.0])));
        assert!(!l.positive_definite);
    }

    #[test]
    fn christoffel_examples() {
        let x = [1.0, 2.0, 0.0];
        let gam = christoffel(&f0(3), &Point::from_x(&x)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let expect = if i == j { x[k] } else { 0.0 };
                    assert_eq!(gam[[i, j, k]], expect);
                }
            }
        }
        // critical point of f
        let gam = christoffel(&f0(3), &Point::origin(3)).unwrap();
        assert_eq!(gam.max_abs(), 0.0);

        let f = sin_family(3);
        let gam = christoffel(&f, &Point::origin(3)).unwrap();
        assert_eq!(gam[[0, 0, 0]], 0.5);

        // product formula Γ_ijk = f;ij f;k
        let pt = Point::from_x(&[0.3, -0.4, 0.9]);
        let jet = jet3(&f, &pt.x).unwrap();
        let gam = christoffel(&f, &pt).unwrap();
        for ([i, j, k], v) in gam.indexed() {
            assert!((v - jet.hess(i, j) * jet.grad[k]).abs() < 1e-14);
            assert_eq!(v, gam[[j, i, k]]);
        }
    }

    #[test]
    fn gauss_examples() {
        let r = curvature_gauss(&SecondFF::from_matrix(DMatrix::identity(3, 3)));
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        for ([i, j, k, l], v) in r.indexed() {
            assert_eq!(v, d(i, l) * d(j, k) - d(i, k) * d(j, l));
        }
        let t = 0.37;
        let l = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0 + t, 1.0, 1.0]));
        let r = curvature_gauss(&SecondFF::from_matrix(l));
        for i in 1..3 {
            assert_eq!(r[[0, i, i, 0]], 1.0 + t);
        }
        assert_eq!(r[[1, 2, 2, 1]], 1.0);
        assert_eq!(curvature_gauss(&SecondFF::from_matrix(DMatrix::zeros(3, 3))).max_abs(), 0.0);
    }

    #[test]
    fn levi_civita_examples() {
        let r = curvature_levi_civita(&f0(3), &Point::from_x(&[0.4, -1.0, 2.0])).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!((r[[i, j, j, i]] - 1.0).abs() < 1e-12);
                }
            }
        }
        let r = curvature_levi_civita(&sin_family(3), &Point::from_x(&[FRAC_PI_2, 0.0, 0.0])).unwrap();
        assert!((r[[0, 1, 1, 0]] - 0.5).abs() < 1e-12);

        let linear = parse_field("2*x1 - x2 + 0.5*x3", 3).unwrap();
        let r = curvature_levi_civita(&linear, &Point::from_x(&[1.0, 1.0, 1.0])).unwrap();
        assert!(r.max_abs() < 1e-15);
    }

    #[test]
    fn dual_route_and_y_slots() {
        let f = parse_field("0.5*(x1^2+x2^2+x3^2) + 0.2*x1*x2*x3 + 0.1*exp(x2)", 3).unwrap();
        let pt = Point::new(vec![0.2, -0.3, 0.5], vec![1.0, 2.0, -3.0]).unwrap();
        let gauss = curvature_gauss(&second_ff(&f, &pt).unwrap());
        let full = levi_civita_full(&f, &pt).unwrap();
        assert!(full.riemann.leading_block(3).max_abs_diff(&gauss) < 1e-10);
        for (idx, v) in full.riemann.indexed() {
            if idx.iter().any(|&a| a >= 3) {
                assert!(v.abs() < 1e-12, "{idx:?} = {v}");
            }
        }
        let sym = check_act_symmetries(&gauss, 1e-10);
        assert!(sym.passed);
    }

    #[test]
    fn nabla_examples() {
        let pt = Point::from_x(&[0.3, 0.1, -0.2]);
        assert_eq!(nabla_curvature(&f0(3), &pt).unwrap().max_abs(), 0.0);

        let f = sin_family(3);
        let nr = nabla_curvature(&f, &Point::origin(3)).unwrap();
        assert_eq!(nr[[0, 1, 1, 0, 0]], -0.5);
        assert_eq!(nr[[0, 2, 2, 0, 0]], -0.5);
        // only the (1,i,i,1;1) pattern and its symmetric images survive
        for ([i, j, k, l, n], v) in nr.indexed() {
            if v != 0.0 {
                assert_eq!(n, 0);
                let ones = [i, j, k, l].iter().filter(|&&a| a == 0).count();
                assert_eq!(ones, 2);
                assert!(i != j && k != l);
            }
        }
    }

    #[test]
    fn full_nabla_connection_terms_vanish() {
        let f = sin_family(3);
        let pt = Point::new(vec![0.3, 0.1, -0.2], vec![0.5, 0.0, 1.0]).unwrap();
        let (full, worst) = nabla_curvature_full(&f, &pt).unwrap();
        assert!(worst < 1e-12);
        let block = nabla_curvature(&f, &pt).unwrap();
        assert!(full.leading_block(3).max_abs_diff(&block) < 1e-12);
    }

    #[test]
    fn tensor_dump_keys() {
        let local = LocalGeometry::new(&f0(2), &Point::origin(2)).unwrap();
        let v = serde_json::to_value(TensorDump::new(&local)).unwrap();
        for key in ["p", "point", "metric", "L", "R", "nablaR"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["R"][0][1][1][0], 1.0);
    }
}
