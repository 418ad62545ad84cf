//! Algebraic curvature tensors built from symmetric bilinear forms,
//! recovery of the form from the tensor, and the neutral-signature model
//! space shared by every metric of the family.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::tensor::{matrix_rows, Curv4, Tensor};

pub type AlgCurv = Curv4;

/// Symmetric bilinear form `φ` on `R^r`.
#[derive(Debug, Clone, PartialEq)]
pub struct BilForm(DMatrix<f64>);

/// Largest asymmetry tolerated by [`BilForm::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;

impl BilForm {
    pub fn new(m: DMatrix<f64>) -> Result<BilForm> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        let asym = linalg::max_asymmetry(&m);
        if asym > SYMMETRY_TOL * m.amax().max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(BilForm(m))
    }

    pub fn diagonal(values: &[f64]) -> BilForm {
        BilForm(DMatrix::from_diagonal(&DVector::from_column_slice(values)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn is_positive_definite(&self) -> bool {
        linalg::is_positive_definite(&self.0)
    }
}

/// `R_φ(v1,v2,v3,v4) = φ(v1,v4)φ(v2,v3) − φ(v1,v3)φ(v2,v4)`.
pub fn build_r_phi(phi: &BilForm) -> AlgCurv {
    let m = &phi.0;
    Tensor::from_fn(phi.dim(), |[i, j, k, l]| m[(i, l)] * m[(j, k)] - m[(i, k)] * m[(j, l)])
}

/// Largest violation of each curvature symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryReport {
    /// `R(a,b,c,d) + R(b,a,c,d)`
    pub antisym_12: f64,
    /// `R(a,b,c,d) + R(a,b,d,c)`
    pub antisym_34: f64,
    /// `R(a,b,c,d) − R(c,d,a,b)`
    pub pair_swap: f64,
    /// `R(a,b,c,d) + R(b,c,a,d) + R(c,a,b,d)`
    pub bianchi: f64,
    pub passed: bool,
}

impl SymmetryReport {
    pub fn max_violation(&self) -> f64 {
        self.antisym_12.max(self.antisym_34).max(self.pair_swap).max(self.bianchi)
    }
}

pub fn check_act_symmetries(r: &Curv4, tol: f64) -> SymmetryReport {
    let mut rep = SymmetryReport {
        antisym_12: 0.0,
        antisym_34: 0.0,
        pair_swap: 0.0,
        bianchi: 0.0,
        passed: false,
    };
    for ([a, b, c, d], v) in r.indexed() {
        rep.antisym_12 = rep.antisym_12.max((v + r[[b, a, c, d]]).abs());
        rep.antisym_34 = rep.antisym_34.max((v + r[[a, b, d, c]]).abs());
        rep.pair_swap = rep.pair_swap.max((v - r[[c, d, a, b]]).abs());
        rep.bianchi = rep.bianchi.max((v + r[[b, c, a, d]] + r[[c, a, b, d]]).abs());
    }
    rep.passed = rep.max_violation() < tol;
    rep
}

/// Relative residual above which [`recover_phi`] reports that its input is
/// not of the form `R_φ`.
pub const RECOVERY_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct RecoveredPhi {
    pub phi: BilForm,
    /// `max|R_φ − R| / max|R|`.
    pub relative_residual: f64,
    pub iterations: usize,
}

/// Independent components `(i<j, k<l)` with pair `(i,j) ≤ (k,l)`.
fn independent_slots(r: usize) -> Vec<[usize; 4]> {
    let pairs: Vec<(usize, usize)> =
        (0..r).flat_map(|i| (i + 1..r).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    for (a, &(i, j)) in pairs.iter().enumerate() {
        for &(k, l) in &pairs[a..] {
            out.push([i, j, k, l]);
        }
    }
    out
}

fn tri_params(r: usize) -> Vec<(usize, usize)> {
    (0..r).flat_map(|i| (0..=i).map(move |j| (i, j))).collect()
}

fn lower_from_params(r: usize, params: &[f64]) -> DMatrix<f64> {
    let mut k = DMatrix::zeros(r, r);
    for (&(i, j), &v) in tri_params(r).iter().zip(params) {
        k[(i, j)] = v;
    }
    k
}

/// Seed `φ_ii ≈ sqrt(R_ijji R_ikki / R_jkkj)` using the first two indices
/// `j < k` distinct from `i`; exact when `φ` is diagonal.
fn diagonal_seed(r_target: &AlgCurv) -> Vec<f64> {
    let r = r_target.dim();
    let sec = |a: usize, b: usize| r_target[[a, b, b, a]];
    let fallback = (0..r)
        .flat_map(|a| (0..r).filter(move |&b| b != a).map(move |b| (a, b)))
        .map(|(a, b)| sec(a, b).abs())
        .fold(0.0_f64, f64::max)
        .sqrt()
        .max(1.0);
    (0..r)
        .map(|i| {
            let mut others = (0..r).filter(|&m| m != i);
            let (j, k) = (others.next().unwrap(), others.next().unwrap());
            let d = (sec(i, j) * sec(i, k) / sec(j, k)).sqrt();
            if d.is_finite() && d > 0.0 {
                d
            } else {
                fallback
            }
        })
        .collect()
}

/// Recovers the positive (semi)definite `φ` with `R_φ = R`.
///
/// `φ = K Kᵀ` with `K` lower triangular; the squared residual over the
/// independent components is minimized by Levenberg–Marquardt starting
/// from the diagonal seed.
pub fn recover_phi(r_target: &AlgCurv) -> Result<RecoveredPhi> {
    let r = r_target.dim();
    if r <= 2 {
        return Err(Error::DimensionTooSmall(r));
    }
    let scale = r_target.max_abs();
    if scale == 0.0 {
        return Err(Error::ResidualTooLarge(f64::INFINITY));
    }
    let slots = independent_slots(r);
    let params_idx = tri_params(r);
    let np = params_idx.len();

    let mut params: Vec<f64> = {
        let seed = diagonal_seed(r_target);
        params_idx
            .iter()
            .map(|&(i, j)| if i == j { seed[i].sqrt() } else { 0.0 })
            .collect()
    };

    let residuals = |params: &[f64]| -> (DVector<f64>, DMatrix<f64>) {
        let k = lower_from_params(r, params);
        let phi = &k * k.transpose();
        let res = DVector::from_iterator(
            slots.len(),
            slots.iter().map(|&[i, j, a, b]| {
                (phi[(i, b)] * phi[(j, a)] - phi[(i, a)] * phi[(j, b)] - r_target[[i, j, a, b]]) / scale
            }),
        );
        let mut jac = DMatrix::zeros(slots.len(), np);
        for (col, &(s, t)) in params_idx.iter().enumerate() {
            // dφ_ab = δ_as K_bt + K_at δ_bs
            let dphi = DMatrix::from_fn(r, r, |a, b| {
                let mut v = 0.0;
                if a == s {
                    v += k[(b, t)];
                }
                if b == s {
                    v += k[(a, t)];
                }
                v
            });
            for (row, &[i, j, a, b]) in slots.iter().enumerate() {
                jac[(row, col)] = (dphi[(i, b)] * phi[(j, a)] + phi[(i, b)] * dphi[(j, a)]
                    - dphi[(i, a)] * phi[(j, b)]
                    - phi[(i, a)] * dphi[(j, b)])
                    / scale;
            }
        }
        (res, jac)
    };

    const MAX_ITERATIONS: usize = 500;
    let mut lambda = 1e-3;
    let (mut res, mut jac) = residuals(&params);
    let mut cost = res.norm_squared();
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS && cost > 1e-30 {
        iterations += 1;
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &res;
        let mut improvement = None;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for d in 0..np {
                a[(d, d)] += lambda * (jtj[(d, d)] + 1e-12);
            }
            let Some(step) = a.lu().solve(&(-&grad)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = params.iter().zip(step.iter()).map(|(p, s)| p + s).collect();
            let (tres, tjac) = residuals(&trial);
            let tcost = tres.norm_squared();
            if tcost < cost {
                improvement = Some(cost - tcost);
                params = trial;
                res = tres;
                jac = tjac;
                cost = tcost;
                lambda = (lambda * 0.3).max(1e-15);
                break;
            }
            lambda *= 10.0;
        }
        match improvement {
            Some(d) if d > 1e-32 => {}
            _ => break,
        }
    }

    let k = lower_from_params(r, &params);
    let phi_m = &k * k.transpose();
    let phi_m = (&phi_m + phi_m.transpose()) * 0.5;
    let phi = BilForm(phi_m);
    let relative_residual = build_r_phi(&phi).max_abs_diff(r_target) / scale;
    if relative_residual > RECOVERY_RESIDUAL_TOL {
        return Err(Error::ResidualTooLarge(relative_residual));
    }
    Ok(RecoveredPhi { phi, relative_residual, iterations })
}

/// Two distinct positive definite forms on `R²` with the same `R_φ`: in
/// dimension 2 the tensor only sees `det φ`.
pub fn dim2_counterexample() -> (BilForm, BilForm) {
    (BilForm::diagonal(&[1.0, 1.0]), BilForm::diagonal(&[2.0, 0.5]))
}

/// `(V, (·,·), R)` with basis `(u_1..u_p, v_1..v_p)`, `(u_i, v_j) = δ_ij`,
/// `R(u_i,u_j,u_k,u_l) = δ_il δ_jk − δ_ik δ_jl` and `R = 0` on any `v`.
#[derive(Debug, Clone)]
pub struct ModelSpace {
    pub p: usize,
    pub inner_product: DMatrix<f64>,
    pub curvature: AlgCurv,
}

impl ModelSpace {
    pub fn signature(&self) -> (usize, usize) {
        linalg::signature(&self.inner_product, 1e-12)
    }
}

pub fn model_space(p: usize) -> Result<ModelSpace> {
    if p == 0 {
        return Err(Error::InvalidArgument("model space needs p >= 1".into()));
    }
    let mut inner_product = DMatrix::zeros(2 * p, 2 * p);
    for i in 0..p {
        inner_product[(i, p + i)] = 1.0;
        inner_product[(p + i, i)] = 1.0;
    }
    let curvature = build_r_phi(&BilForm(DMatrix::identity(p, p))).extend_by_zero(2 * p);
    Ok(ModelSpace { p, inner_product, curvature })
}

/// JSON dump of the model space, keyed like the geometry dump with `r`
/// for the dimension.
#[derive(Debug, Clone, Serialize)]
pub struct ModelDump {
    pub r: usize,
    pub p: usize,
    pub inner_product: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    pub curvature: AlgCurv,
    pub signature: (usize, usize),
    pub symmetries: SymmetryReport,
}

impl ModelDump {
    pub fn new(m: &ModelSpace) -> ModelDump {
        ModelDump {
            r: 2 * m.p,
            p: m.p,
            inner_product: matrix_rows(&m.inner_product),
            curvature: m.curvature.clone(),
            signature: m.signature(),
            symmetries: check_act_symmetries(&m.curvature, 1e-12),
        }
    }
}
