//! Admissible bases `{X_1..X_p, Y_1..Y_p}` of a tangent space, in which the
//! metric is the hyperbolic pairing and `R` takes the `δδ − δδ` normal form,
//! and the linear maps between tangent spaces they induce.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::geometry::{LocalGeometry, Point};
use crate::linalg;
use crate::model::model_space;
use crate::tensor::matrix_rows;

/// Default tolerance for [`is_admissible`].
pub const ADMISSIBLE_TOL: f64 = 1e-9;

/// Change of basis: column `i < p` is `X_{i+1}`, column `p + i` is
/// `Y_{i+1}`, both in the coordinate frame `(∂x, ∂y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleBasis {
    matrix: DMatrix<f64>,
}

impl AdmissibleBasis {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<AdmissibleBasis> {
        if matrix.nrows() != matrix.ncols() || !matrix.nrows().is_multiple_of(2) || matrix.nrows() == 0 {
            return Err(Error::InvalidArgument(format!(
                "basis must be 2p x 2p, got {} x {}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(AdmissibleBasis { matrix })
    }

    pub fn p(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn x(&self, i: usize) -> Vec<f64> {
        self.matrix.column(i).iter().copied().collect()
    }

    pub fn y(&self, i: usize) -> Vec<f64> {
        self.matrix.column(self.p() + i).iter().copied().collect()
    }

    /// `X'_i = O_ij X_j`, `Y'_i = O_ij Y_j`.
    pub fn mixed(&self, o: &DMatrix<f64>) -> AdmissibleBasis {
        let p = self.p();
        let mut m = self.matrix.clone();
        let ot = o.transpose();
        let xs = self.matrix.columns(0, p) * &ot;
        let ys = self.matrix.columns(p, p) * &ot;
        m.columns_mut(0, p).copy_from(&xs);
        m.columns_mut(p, p).copy_from(&ys);
        AdmissibleBasis { matrix: m }
    }
}

/// Builds the basis at a point by factoring `L = C Cᵀ` with pivots taken in
/// `order`, `X̄_i = a_ij ∂x_j` with `a = C⁻¹` (permuted), `Ȳ_i = a^{ji} ∂y_j`
/// and `X_i = X̄_i − ½ Σ_j g(X̄_i, X̄_j) Ȳ_j`.
pub fn admissible_basis_ordered(local: &LocalGeometry, order: &[usize]) -> Result<AdmissibleBasis> {
    let p = local.p();
    let mut seen = vec![false; p];
    if order.len() != p || order.iter().any(|&i| i >= p || std::mem::replace(&mut seen[i], true)) {
        return Err(Error::InvalidArgument(format!("{order:?} is not a permutation of 0..{p}")));
    }
    let l = &local.second_ff.l;
    let permuted = DMatrix::from_fn(p, p, |a, b| l[(order[a], order[b])]);
    let c = linalg::cholesky(&permuted)?;
    let c_inv = linalg::lower_triangular_inverse(&c);
    // a = C⁻¹ Π and a⁻¹ = Πᵀ C, with Π[r, order[r]] = 1
    let mut a = DMatrix::zeros(p, p);
    let mut a_inv = DMatrix::zeros(p, p);
    for r in 0..p {
        for i in 0..p {
            a[(i, order[r])] = c_inv[(i, r)];
            a_inv[(order[r], i)] = c[(r, i)];
        }
    }
    let grad = nalgebra::DVector::from_column_slice(&local.jet.grad);
    let ag = &a * grad;
    let gbar = &ag * ag.transpose();
    let correction = &a_inv * &gbar * (-0.5);

    let mut m = DMatrix::zeros(2 * p, 2 * p);
    for i in 0..p {
        for r in 0..p {
            m[(r, i)] = a[(i, r)];
            m[(p + r, i)] = correction[(r, i)];
            m[(p + r, p + i)] = a_inv[(r, i)];
        }
    }
    Ok(AdmissibleBasis { matrix: m })
}

pub fn admissible_basis_at(local: &LocalGeometry) -> Result<AdmissibleBasis> {
    let order: Vec<usize> = (0..local.p()).collect();
    admissible_basis_ordered(local, &order)
}

pub fn admissible_basis(field: &FieldSpec, point: &Point) -> Result<AdmissibleBasis> {
    admissible_basis_at(&LocalGeometry::new(field, point)?)
}

/// Residual of each normalization an admissible basis must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    /// `g(X_i,X_j) = 0`, `g(X_i,Y_j) = δ_ij`, `g(Y_i,Y_j) = 0`.
    pub metric: f64,
    /// `R(X_i,X_j,X_k,X_l) = δ_il δ_jk − δ_ik δ_jl`.
    pub curvature: f64,
    /// `R = 0` whenever a slot is some `Y_i`.
    pub y_slots: f64,
    pub admissible: bool,
}

pub fn check_admissible(basis: &AdmissibleBasis, local: &LocalGeometry, tol: f64) -> AdmissibilityReport {
    let p = local.p();
    if basis.p() != p {
        return AdmissibilityReport {
            metric: f64::INFINITY,
            curvature: f64::INFINITY,
            y_slots: f64::INFINITY,
            admissible: false,
        };
    }
    let model = model_space(p).expect("p >= 1");
    let b = basis.matrix();
    let gram = b.transpose() * local.metric.matrix() * b;
    let metric = (gram - &model.inner_product).amax();
    let r_basis = local.full_curvature().in_frame(b);
    let mut curvature = 0.0_f64;
    let mut y_slots = 0.0_f64;
    for (idx, v) in r_basis.indexed() {
        let dev = (v - model.curvature[idx]).abs();
        if idx.iter().any(|&s| s >= p) {
            y_slots = y_slots.max(dev);
        } else {
            curvature = curvature.max(dev);
        }
    }
    AdmissibilityReport {
        metric,
        curvature,
        y_slots,
        admissible: metric < tol && curvature < tol && y_slots < tol,
    }
}

pub fn is_admissible(basis: &AdmissibleBasis, field: &FieldSpec, point: &Point, tol: f64) -> Result<AdmissibilityReport> {
    Ok(check_admissible(basis, &LocalGeometry::new(field, point)?, tol))
}

/// Mixes an admissible basis by a seeded random orthogonal matrix, which
/// preserves both normal forms.
pub fn random_admissible(basis: &AdmissibleBasis, local: &LocalGeometry, seed: u64) -> Result<AdmissibleBasis> {
    let report = check_admissible(basis, local, ADMISSIBLE_TOL);
    if !report.admissible {
        return Err(Error::InvalidArgument(format!(
            "input basis is not admissible (metric {:e}, curvature {:e}, y-slots {:e})",
            report.metric, report.curvature, report.y_slots
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let o = linalg::random_orthogonal(basis.p(), &mut rng);
    Ok(basis.mixed(&o))
}

/// `Ψ: T_P M → T_Q M` sending the admissible basis at `P` to the one at `Q`,
/// as a matrix in coordinate frames: `Ψ = B_Q B_P⁻¹`.
pub fn homogeneity_map_at(at_p: &LocalGeometry, at_q: &LocalGeometry) -> Result<DMatrix<f64>> {
    if at_p.p() != at_q.p() {
        return Err(Error::DimensionMismatch { expected: at_p.p(), got: at_q.p() });
    }
    let bp = admissible_basis_at(at_p)
        .map_err(|e| Error::Hypothesis(format!("at P: {e}")))?;
    let bq = admissible_basis_at(at_q)
        .map_err(|e| Error::Hypothesis(format!("at Q: {e}")))?;
    let bp_inv = bp
        .matrix()
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Domain("admissible basis at P is singular".into()))?;
    Ok(bq.matrix() * bp_inv)
}

pub fn homogeneity_map(field: &FieldSpec, p: &Point, q: &Point) -> Result<DMatrix<f64>> {
    homogeneity_map_at(&LocalGeometry::new(field, p)?, &LocalGeometry::new(field, q)?)
}

/// `‖Ψ*T_Q − T_P‖∞` for the metric, `R` and `∇R`, as full `2p`-dimensional
/// tensors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PullbackResiduals {
    pub metric: f64,
    pub curvature: f64,
    pub nabla: f64,
}

pub fn pullback_residuals(psi: &DMatrix<f64>, at_p: &LocalGeometry, at_q: &LocalGeometry) -> PullbackResiduals {
    let g = psi.transpose() * at_q.metric.matrix() * psi - at_p.metric.matrix();
    let r = at_q.full_curvature().in_frame(psi).max_abs_diff(&at_p.full_curvature());
    let n = at_q.full_nabla().in_frame(psi).max_abs_diff(&at_p.full_nabla());
    PullbackResiduals { metric: g.amax(), curvature: r, nabla: n }
}

/// JSON basis dump: `P`, `basis` (row-major) and the normalization checks.
#[derive(Debug, Clone, Serialize)]
pub struct BasisDump {
    #[serde(rename = "P")]
    pub point: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
    pub checks: AdmissibilityReport,
}

impl BasisDump {
    pub fn new(local: &LocalGeometry, basis: &AdmissibleBasis, tol: f64) -> BasisDump {
        BasisDump {
            point: local.point.coords(),
            basis: matrix_rows(basis.matrix()),
            checks: check_admissible(basis, local, tol),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{canonical_f, parse_field};

    fn family(theta: &str, p: usize) -> FieldSpec {
        canonical_f(&parse_field(theta, 1).unwrap(), p).unwrap()
    }

    #[test]
    fn identity_case_at_origin() {
        let f = family("0", 3);
        let b = admissible_basis(&f, &Point::origin(3)).unwrap();
        assert_eq!(b.matrix(), &DMatrix::identity(6, 6));
    }

    #[test]
    fn gradient_correction() {
        // Θ;11 = 0 at x1 = 0, so a = I and only the correction term remains
        let f = family("0.5*sin(x1)", 3);
        let pt = Point::from_x(&[0.0, 0.4, -0.2]);
        let local = LocalGeometry::new(&f, &pt).unwrap();
        let b = admissible_basis_at(&local).unwrap();
        let g = &local.jet.grad;
        for i in 0..3 {
            for r in 0..3 {
                assert_eq!(b.matrix()[(r, i)], if r == i { 1.0 } else { 0.0 });
                assert!((b.matrix()[(3 + r, i)] + 0.5 * g[i] * g[r]).abs() < 1e-15);
                assert_eq!(b.matrix()[(3 + r, 3 + i)], if r == i { 1.0 } else { 0.0 });
            }
        }
        assert!(check_admissible(&b, &local, 1e-9).admissible);
    }

    #[test]
    fn indefinite_rejected() {
        let f = parse_field("0.5*(x1^2-x2^2+x3^2)", 3).unwrap();
        let err = admissible_basis(&f, &Point::origin(3)).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { .. }));
    }

    #[test]
    fn coordinate_basis_not_admissible_off_critical_points() {
        let f = family("0", 3);
        let pt = Point::from_x(&[1.0, 0.5, 0.0]);
        let coord = AdmissibleBasis::from_matrix(DMatrix::identity(6, 6)).unwrap();
        let rep = is_admissible(&coord, &f, &pt, 1e-9).unwrap();
        assert!(!rep.admissible);
        assert!(rep.metric > 0.1);
    }

    #[test]
    fn scaled_basis_fails_quartically() {
        let f = family("0.5*sin(x1)", 3);
        let pt = Point::from_x(&[0.2, 0.1, 0.3]);
        let local = LocalGeometry::new(&f, &pt).unwrap();
        let b = admissible_basis_at(&local).unwrap();
        let mut m = b.matrix().clone();
        m.column_mut(0).scale_mut(2.0);
        let scaled = AdmissibleBasis::from_matrix(m).unwrap();
        let r_basis = local.full_curvature().in_frame(scaled.matrix());
        assert!((r_basis[[0, 1, 1, 0]] - 4.0).abs() < 1e-9);
        assert!(!check_admissible(&scaled, &local, 1e-9).admissible);
    }

    #[test]
    fn mixing() {
        let f = family("0.5*sin(x1)", 3);
        let local = LocalGeometry::new(&f, &Point::from_x(&[0.3, -0.2, 0.5])).unwrap();
        let b = admissible_basis_at(&local).unwrap();
        assert_eq!(b.mixed(&DMatrix::identity(3, 3)), b);
        let b1 = random_admissible(&b, &local, 1).unwrap();
        let b2 = random_admissible(&b, &local, 2).unwrap();
        assert!(check_admissible(&b1, &local, 1e-9).admissible);
        assert!(check_admissible(&b2, &local, 1e-9).admissible);
        assert!((b1.matrix() - b2.matrix()).amax() > 1e-3);
        assert_eq!(random_admissible(&b, &local, 1).unwrap(), b1);

        let coord = AdmissibleBasis::from_matrix(DMatrix::identity(6, 6)).unwrap();
        assert!(random_admissible(&coord, &local, 1).is_err());
    }

    #[test]
    fn permuted_pivots_still_admissible() {
        let f = parse_field("0.5*(x1^2+x2^2+x3^2) + 0.1*x1*x2 + 0.05*x2*x3^2", 3).unwrap();
        let local = LocalGeometry::new(&f, &Point::from_x(&[0.4, 0.2, -0.3])).unwrap();
        let b0 = admissible_basis_at(&local).unwrap();
        let b1 = admissible_basis_ordered(&local, &[2, 0, 1]).unwrap();
        assert!(check_admissible(&b1, &local, 1e-9).admissible);
        assert!((b0.matrix() - b1.matrix()).amax() > 1e-3);
        assert!(admissible_basis_ordered(&local, &[0, 0, 1]).is_err());
    }

    #[test]
    fn psi_identity_and_pullbacks() {
        let f = family("0.5*sin(x1)", 3);
        let p = Point::new(vec![0.0, 0.1, 0.2], vec![0.3, 0.0, -1.0]).unwrap();
        let psi = homogeneity_map(&f, &p, &p).unwrap();
        assert!((&psi - DMatrix::identity(6, 6)).amax() < 1e-14);

        let q = Point::from_x(&[0.7, -0.4, 0.1]);
        let (lp, lq) = (LocalGeometry::new(&f, &p).unwrap(), LocalGeometry::new(&f, &q).unwrap());
        let psi = homogeneity_map_at(&lp, &lq).unwrap();
        let res = pullback_residuals(&psi, &lp, &lq);
        assert!(res.metric < 1e-10, "{res:?}");
        assert!(res.curvature < 1e-9, "{res:?}");

        let g0 = family("0", 3);
        let (lp, lq) = (LocalGeometry::new(&g0, &p).unwrap(), LocalGeometry::new(&g0, &q).unwrap());
        let res = pullback_residuals(&homogeneity_map_at(&lp, &lq).unwrap(), &lp, &lq);
        assert!(res.metric < 1e-12 && res.curvature < 1e-12 && res.nabla == 0.0, "{res:?}");
    }

    #[test]
    fn psi_does_not_preserve_nabla() {
        let f = family("0.5*sin(x1)", 3);
        let (p, q) = (Point::from_x(&[0.0, 0.0, 0.0]), Point::from_x(&[1.0, 0.0, 0.0]));
        let (lp, lq) = (LocalGeometry::new(&f, &p).unwrap(), LocalGeometry::new(&f, &q).unwrap());
        let res = pullback_residuals(&homogeneity_map_at(&lp, &lq).unwrap(), &lp, &lq);
        assert!(res.nabla > 1e-3, "{res:?}");
    }

    #[test]
    fn psi_rejects_hypothesis_violation() {
        let f = parse_field("0.5*(x1^2+x2^2) - x1^4", 2).unwrap();
        // L_11 = 1 - 12 x1² < 0 at x1 = 0.5
        let err = homogeneity_map(&f, &Point::origin(2), &Point::from_x(&[0.5, 0.0])).unwrap_err();
        assert!(matches!(err, Error::Hypothesis(_)));
    }
}
