//! Cross-check suite run at a single point: every quantity that can be
//! computed two ways is, and the residuals are compared with tolerances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{Tolerances, DEFAULT_MIXINGS, DEFAULT_SEED};
use crate::error::Result;
use crate::field::{jet3_fd, FieldSpec, Jet3, DEFAULT_FD_STEP};
use crate::frames::{admissible_basis_at, admissible_basis_ordered, check_admissible, homogeneity_map_at, pullback_residuals, random_admissible};
use crate::geometry::{embed_and_normal, levi_civita_full, LocalGeometry, Point};
use crate::invariant::{alpha_at, alpha_basis_spread, alpha_closed_form};
use crate::model::{check_act_symmetries, recover_phi};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn measured(name: &'static str, residual: f64, tolerance: f64) -> Check {
        let status = if residual < tolerance { Status::Pass } else { Status::Fail };
        Check { name, status, residual: Some(residual), tolerance, note: None }
    }

    fn skipped(name: &'static str, tolerance: f64, note: impl Into<String>) -> Check {
        Check { name, status: Status::Skipped, residual: None, tolerance, note: Some(note.into()) }
    }

    fn failed(name: &'static str, tolerance: f64, note: impl Into<String>) -> Check {
        Check { name, status: Status::Fail, residual: None, tolerance, note: Some(note.into()) }
    }

    fn with_note(mut self, note: impl Into<String>) -> Check {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub field: FieldSpec,
    /// Set when `field` is the canonical family for this `Θ`; enables the
    /// closed-form check.
    pub theta: Option<FieldSpec>,
    pub point: Point,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub mixings: usize,
}

impl VerifyConfig {
    pub fn new(field: FieldSpec, point: Point) -> VerifyConfig {
        VerifyConfig {
            field,
            theta: None,
            point,
            seed: DEFAULT_SEED,
            tolerances: Tolerances::default(),
            mixings: DEFAULT_MIXINGS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub p: usize,
    pub field: String,
    pub point: Vec<f64>,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// `max |exact − fd| / max(|exact|, 1)` over all jet entries.
pub fn jet_fd_residual(exact: &Jet3, fd: &Jet3) -> f64 {
    let pairs = std::iter::once((&exact.value, &fd.value))
        .chain(exact.grad.iter().zip(&fd.grad))
        .chain(exact.hess.iter().zip(&fd.hess))
        .chain(exact.third.iter().zip(&fd.third));
    pairs.map(|(e, f)| (e - f).abs() / e.abs().max(1.0)).fold(0.0, f64::max)
}

/// Runs every check. Fails early only when `L` is not positive definite
/// at the point, since most checks are meaningless there.
pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let tol = &cfg.tolerances;
    let local = LocalGeometry::new(&cfg.field, &cfg.point)?;
    local.require_positive_definite()?;
    let p = local.p();
    let mut checks = Vec::new();

    let lc = levi_civita_full(&cfg.field, &cfg.point)?;
    checks.push(Check::measured("dual_route_curvature", lc.riemann.max_abs_diff(&local.full_curvature()), tol.dual_route));

    let sym = check_act_symmetries(&local.curvature, tol.symmetries);
    checks.push(Check::measured("curvature_symmetries", sym.max_violation(), tol.symmetries));

    let basis = admissible_basis_at(&local)?;
    let adm = check_admissible(&basis, &local, tol.admissible);
    checks.push(Check::measured("admissible_normal_form", adm.metric.max(adm.curvature).max(adm.y_slots), tol.admissible));

    let mut bases = vec![basis.clone()];
    for k in 0..cfg.mixings {
        bases.push(random_admissible(&basis, &local, cfg.seed.wrapping_add(k as u64))?);
    }
    let reversed: Vec<usize> = (0..p).rev().collect();
    bases.push(admissible_basis_ordered(&local, &reversed)?);
    checks.push(
        Check::measured("alpha_basis_independence", alpha_basis_spread(&local, &bases), tol.basis_independence)
            .with_note(format!("{} orthogonal mixings and reversed pivot order", cfg.mixings)),
    );

    let alpha = alpha_at(&local)?;
    checks.push(match &cfg.theta {
        Some(theta) => {
            let closed = alpha_closed_form(theta, cfg.point.x[0], p)?;
            Check::measured("alpha_closed_form", (alpha - closed).abs() / closed.abs().max(1.0), tol.closed_form)
        }
        None => Check::skipped("alpha_closed_form", tol.closed_form, "field is not given as a theta profile"),
    });

    checks.push(pullback_check(cfg, &local));

    checks.push(if p < 3 {
        Check::skipped("phi_round_trip", tol.phi_recovery, "phi recovery requires dimension >= 3")
    } else {
        match recover_phi(&local.curvature) {
            Ok(rec) => {
                let l = &local.second_ff.l;
                let err = (rec.phi.matrix() - l).amax() / l.amax().max(f64::MIN_POSITIVE);
                Check::measured("phi_round_trip", err, tol.phi_recovery)
            }
            Err(e) => Check::failed("phi_round_trip", tol.phi_recovery, e.to_string()),
        }
    });

    let fd = jet3_fd(&cfg.field, &cfg.point.x, DEFAULT_FD_STEP)?;
    checks.push(
        Check::measured("jets_vs_finite_differences", jet_fd_residual(&local.jet, &fd), tol.finite_difference)
            .with_note(format!("central differences, h = {DEFAULT_FD_STEP:e}")),
    );

    let emb = embed_and_normal(&cfg.field, &cfg.point)?;
    let emb_res = (emb.pullback_metric() - local.metric.matrix())
        .amax()
        .max(emb.normal_pairings().amax())
        .max((emb.normal_norm() - 1.0).abs())
        .max((emb.shape_form() - &local.second_ff.l).amax());
    checks.push(Check::measured("embedding", emb_res, tol.embedding));

    let passed = checks.iter().all(|c| c.status != Status::Fail);
    Ok(VerifyReport {
        p,
        field: cfg.field.to_string(),
        point: cfg.point.coords(),
        seed: cfg.seed,
        checks,
        passed,
    })
}

/// `Ψ` from the point to a seeded nearby point where the hypothesis also
/// holds; metric and curvature must pull back exactly.
fn pullback_check(cfg: &VerifyConfig, local: &LocalGeometry) -> Check {
    let tol = cfg.tolerances.pullback_metric.max(cfg.tolerances.pullback_curvature);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..32 {
        let x: Vec<f64> = cfg.point.x.iter().map(|v| v + rng.gen_range(-0.5..0.5)).collect();
        let q = Point::from_x(&x);
        let Ok(at_q) = LocalGeometry::new(&cfg.field, &q) else { continue };
        let Ok(psi) = homogeneity_map_at(local, &at_q) else { continue };
        let r = pullback_residuals(&psi, local, &at_q);
        let passed = r.metric < cfg.tolerances.pullback_metric && r.curvature < cfg.tolerances.pullback_curvature;
        let note = format!(
            "Q = {x:?}: metric {:e}, curvature {:e}, nabla {:e} (not expected to vanish)",
            r.metric, r.curvature, r.nabla
        );
        return Check {
            name: "homogeneity_pullback",
            status: if passed { Status::Pass } else { Status::Fail },
            residual: Some(r.metric.max(r.curvature)),
            tolerance: tol,
            note: Some(note),
        };
    }
    Check::failed("homogeneity_pullback", tol, "no admissible comparison point found near P")
}
