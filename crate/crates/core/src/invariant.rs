//! The isometry invariant `α = Σ ∇R(X_i,X_j,X_k,X_l;X_n)²` over an
//! admissible basis, its closed form on the canonical family, and grid
//! scans that refute local homogeneity when `α` is not constant.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{jet3, FieldSpec};
use crate::frames::{admissible_basis_at, AdmissibleBasis};
use crate::geometry::{LocalGeometry, Point};
use crate::model::recover_phi;

/// Relative spread of `α` above which a scan refutes local homogeneity.
pub const CONSTANCY_THRESHOLD: f64 = 1e-6;
/// Floor for the spread denominator, so that rounding-level values of `α`
/// on fields with vanishing third derivatives count as constant.
pub const ALPHA_NOISE_FLOOR: f64 = 1e-9;

/// `α` in the given admissible basis. `∇R` vanishes on `Y`, so only the
/// `x` components of the `X_i` enter.
pub fn alpha_with_basis(local: &LocalGeometry, basis: &AdmissibleBasis) -> f64 {
    let p = local.p();
    let xs = basis.matrix().view((0, 0), (p, p)).into_owned();
    local.nabla.in_frame(&xs).sum_squares()
}

pub fn alpha_at(local: &LocalGeometry) -> Result<f64> {
    let basis = admissible_basis_at(local)?;
    Ok(alpha_with_basis(local, &basis))
}

pub fn alpha(field: &FieldSpec, point: &Point) -> Result<f64> {
    alpha_at(&LocalGeometry::new(field, point)?)
}

/// `α = ‖∇R‖²_φ` with indices raised by the form `φ` recovered from the
/// `x` block of `R` (which is `L` itself for this family).
pub fn alpha_via_phi(local: &LocalGeometry) -> Result<f64> {
    local.require_positive_definite()?;
    let phi = recover_phi(&local.curvature)?.phi;
    let phi_inv = phi
        .matrix()
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Domain("recovered form is singular".into()))?;
    // ‖T‖²_φ = Σ T_{i..} T_{a..} φ^{ia}…, i.e. T contracted with φ⁻¹ on every
    // slot, then paired with T.
    let raised = local.nabla.in_frame(&phi_inv);
    Ok(raised
        .as_slice()
        .iter()
        .zip(local.nabla.as_slice())
        .map(|(a, b)| a * b)
        .sum())
}

/// `4 (p − 1) Θ;111² / (1 + Θ;11)³`.
pub fn alpha_closed_form(theta: &FieldSpec, x1: f64, p: usize) -> Result<f64> {
    if theta.body().max_var() > 1 {
        return Err(Error::InvalidArgument("theta may depend on x1 only".into()));
    }
    let mut x = vec![0.0; theta.dim()];
    x[0] = x1;
    let jet = jet3(theta, &x)?;
    let d2 = jet.hess(0, 0);
    let d3 = jet.third(0, 0, 0);
    let denom = 1.0 + d2;
    if denom.is_nan() || denom <= 0.0 {
        return Err(Error::Hypothesis(format!("1 + theta'' = {denom} is not positive at x1 = {x1}")));
    }
    Ok(4.0 * (p as f64 - 1.0) * d3 * d3 / (denom * denom * denom))
}

/// One axis of a scan grid: `count` evenly spaced values from `start` to
/// `stop` inclusive (`count = 1` gives `start`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Axis {
    pub fn fixed(value: f64) -> Axis {
        Axis { start: value, stop: value, count: 1 }
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.count <= 1 {
            self.start
        } else {
            self.start + (self.stop - self.start) * i as f64 / (self.count - 1) as f64
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    /// `start:stop:count`.
    fn from_str(s: &str) -> Result<Axis> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidArgument(format!("grid axis '{s}' is not start:stop:count"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if count == 0 || !start.is_finite() || !stop.is_finite() {
            return Err(Error::InvalidArgument(format!("grid axis '{s}' needs finite bounds and count >= 1")));
        }
        Ok(Axis { start, stop, count })
    }
}

/// Product grid over `x1..xp` with `y = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub axes: Vec<Axis>,
}

impl Grid {
    /// Axes beyond those given are fixed at 0.
    pub fn new(mut axes: Vec<Axis>, p: usize) -> Result<Grid> {
        if axes.len() > p {
            return Err(Error::InvalidArgument(format!("{} grid axes given for p = {p}", axes.len())));
        }
        axes.resize(p, Axis::fixed(0.0));
        Ok(Grid { axes })
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Point with flat index `k`; the first axis varies slowest.
    pub fn point(&self, mut k: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.axes.len()];
        for (slot, axis) in x.iter_mut().zip(&self.axes).rev() {
            *slot = axis.value(k % axis.count);
            k /= axis.count;
        }
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "NOT locally homogeneous (alpha non-constant)")]
    NotLocallyHomogeneous,
    #[serde(rename = "inconclusive (alpha constant on sampled set)")]
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::NotLocallyHomogeneous => "NOT locally homogeneous (alpha non-constant)",
            Verdict::Inconclusive => "inconclusive (alpha constant on sampled set)",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedPoint {
    pub x: Vec<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSummary {
    pub min: f64,
    pub max: f64,
    pub spread: f64,
    pub verdict: Verdict,
    pub evaluated: usize,
    pub skipped: Vec<SkippedPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaScan {
    pub grid: Grid,
    pub values: Vec<(Vec<f64>, f64)>,
    pub summary: ScanSummary,
}

/// `(max − min) / max(max, ALPHA_NOISE_FLOOR)`.
pub fn relative_spread(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (max - min) / max.abs().max(ALPHA_NOISE_FLOOR)
}

/// Evaluates `α` on every grid point (in parallel; results are ordered by
/// grid index). Points where `L` is not positive definite, or that fall
/// outside the domain, are skipped and reported.
pub fn scan_alpha(field: &FieldSpec, grid: &Grid) -> Result<AlphaScan> {
    if grid.axes.len() != field.dim() {
        return Err(Error::DimensionMismatch { expected: field.dim(), got: grid.axes.len() });
    }
    let results: Vec<(Vec<f64>, Result<f64>)> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let x = grid.point(k);
            let a = alpha(field, &Point::from_x(&x));
            (x, a)
        })
        .collect();

    let mut values = Vec::new();
    let mut skipped = Vec::new();
    for (x, r) in results {
        match r {
            Ok(a) => values.push((x, a)),
            Err(e) => skipped.push(SkippedPoint { x, reason: e.to_string() }),
        }
    }
    let alphas: Vec<f64> = values.iter().map(|(_, a)| *a).collect();
    let (min, max) = if alphas.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        (
            alphas.iter().copied().fold(f64::INFINITY, f64::min),
            alphas.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    };
    let spread = relative_spread(&alphas);
    let verdict = if spread > CONSTANCY_THRESHOLD {
        Verdict::NotLocallyHomogeneous
    } else {
        Verdict::Inconclusive
    };
    Ok(AlphaScan {
        grid: grid.clone(),
        summary: ScanSummary { min, max, spread, verdict, evaluated: values.len(), skipped },
        values,
    })
}

impl AlphaScan {
    /// Header `x1,...,xp,alpha`, one row per evaluated point, shortest
    /// round-trip decimal formatting.
    pub fn to_csv(&self) -> String {
        let p = self.grid.axes.len();
        let mut out = String::new();
        for i in 1..=p {
            out.push_str(&format!("x{i},"));
        }
        out.push_str("alpha\n");
        for (x, a) in &self.values {
            for v in x {
                out.push_str(&format!("{v:?},"));
            }
            out.push_str(&format!("{a:?}\n"));
        }
        out
    }
}

/// Basis-independence check: largest relative deviation of `α` across the
/// given bases.
pub fn alpha_basis_spread(local: &LocalGeometry, bases: &[AdmissibleBasis]) -> f64 {
    let values: Vec<f64> = bases.iter().map(|b| alpha_with_basis(local, b)).collect();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (max - min) / max.abs().max(1.0)
}
