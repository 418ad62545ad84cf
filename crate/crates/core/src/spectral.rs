//! Curvature operators on the full tangent space (Jacobi, Szabó, skew
//! symmetric curvature, higher-order Jacobi), a numerical surrogate for
//! their Jordan normal form, and sampled constancy checks.
//!
//! Operators are `2p × 2p` matrices in the coordinate frame `(∂x, ∂y)`.
//! An operator `A` defined through `g(A U, V) = M(U, V)` is `G⁻¹ Mᵀ`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Schur};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::geometry::{LocalGeometry, Point};
use crate::linalg::random_unit;
use crate::tensor::matrix_rows;

/// Tolerance on `g(e_i, e_j) = ±δ_ij` for supplied orthonormal vectors.
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// Eigenvalues closer than this are the same eigenvalue.
pub const EIGEN_TOL: f64 = 1e-7;
/// Singular values of `A^k` below `RANK_TOL · σ_max(A)^k` count as zero.
pub const RANK_TOL: f64 = 1e-8;

const MAX_RESAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Operator(pub DMatrix<f64>);

impl Operator {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// `max |g(AU,V) − g(U,AV)|` over coordinate vectors.
    pub fn self_adjoint_defect(&self, local: &LocalGeometry) -> f64 {
        let ga = local.metric.matrix() * &self.0;
        (&ga - ga.transpose()).amax()
    }

    /// `max |g(AU,V) + g(U,AV)|` over coordinate vectors.
    pub fn skew_adjoint_defect(&self, local: &LocalGeometry) -> f64 {
        let ga = local.metric.matrix() * &self.0;
        (&ga + ga.transpose()).amax()
    }

    pub fn fingerprint(&self) -> OperatorFingerprint {
        fingerprint(&self.0)
    }
}

fn check_vector(local: &LocalGeometry, v: &[f64]) -> Result<()> {
    if v.len() != 2 * local.p() {
        return Err(Error::DimensionMismatch { expected: 2 * local.p(), got: v.len() });
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument("tangent vector has non-finite entries".into()));
    }
    Ok(())
}

/// `G⁻¹ Mᵀ` with `M` supported on the `x` block.
fn from_x_form(local: &LocalGeometry, mx: &DMatrix<f64>) -> Operator {
    let p = local.p();
    let mut m = DMatrix::zeros(2 * p, 2 * p);
    m.view_mut((0, 0), (p, p)).copy_from(&mx.transpose());
    Operator(local.metric.inverse() * m)
}

/// `g(J(X)U, V) = R(U, X, X, V)`.
pub fn jacobi(local: &LocalGeometry, x: &[f64]) -> Result<Operator> {
    check_vector(local, x)?;
    let p = local.p();
    let r = &local.curvature;
    let mx = DMatrix::from_fn(p, p, |u, v| {
        let mut s = 0.0;
        for j in 0..p {
            for k in 0..p {
                s += r[[u, j, k, v]] * x[j] * x[k];
            }
        }
        s
    });
    Ok(from_x_form(local, &mx))
}

/// `g(S(X)U, V) = ∇R(U, X, X, V; X)`.
pub fn szabo(local: &LocalGeometry, x: &[f64]) -> Result<Operator> {
    check_vector(local, x)?;
    let p = local.p();
    let nr = &local.nabla;
    let mx = DMatrix::from_fn(p, p, |u, v| {
        let mut s = 0.0;
        for j in 0..p {
            for k in 0..p {
                for n in 0..p {
                    s += nr[[u, j, k, v, n]] * x[j] * x[k] * x[n];
                }
            }
        }
        s
    });
    Ok(from_x_form(local, &mx))
}

/// `g(𝓡(π)U, V) = R(Y, Z, U, V)` for an orthonormal pair `{Y, Z}` of the
/// same causal type.
pub fn skew_curv(local: &LocalGeometry, y: &[f64], z: &[f64]) -> Result<Operator> {
    check_vector(local, y)?;
    check_vector(local, z)?;
    let gyy = local.g(y, y);
    let gzz = local.g(z, z);
    let gyz = local.g(y, z);
    if (gyy.abs() - 1.0).abs() > ORTHONORMAL_TOL
        || (gzz - gyy).abs() > 2.0 * ORTHONORMAL_TOL
        || gyz.abs() > ORTHONORMAL_TOL
    {
        return Err(Error::InvalidArgument(format!(
            "pair is not orthonormal of one causal type: g(Y,Y) = {gyy}, g(Z,Z) = {gzz}, g(Y,Z) = {gyz}"
        )));
    }
    Ok(skew_form(local, y, z))
}

/// The operator `g(A U, V) = R(Y, Z, U, V)` without the orthonormality
/// requirement on `{Y, Z}`.
pub(crate) fn skew_form(local: &LocalGeometry, y: &[f64], z: &[f64]) -> Operator {
    let p = local.p();
    let r = &local.curvature;
    let mx = DMatrix::from_fn(p, p, |u, v| {
        let mut s = 0.0;
        for i in 0..p {
            for j in 0..p {
                s += r[[i, j, u, v]] * y[i] * z[j];
            }
        }
        s
    });
    from_x_form(local, &mx)
}

/// `J(π) = Σ g(E_i, E_i) J(E_i)` for a `g`-orthonormal basis of `π`.
pub fn higher_jacobi(local: &LocalGeometry, basis: &[Vec<f64>]) -> Result<Operator> {
    if basis.is_empty() {
        return Err(Error::InvalidArgument("empty basis".into()));
    }
    for v in basis {
        check_vector(local, v)?;
    }
    for (i, u) in basis.iter().enumerate() {
        for (j, v) in basis.iter().enumerate().skip(i) {
            let gij = local.g(u, v);
            let ok = if i == j { (gij.abs() - 1.0).abs() <= ORTHONORMAL_TOL } else { gij.abs() <= ORTHONORMAL_TOL };
            if !ok {
                return Err(Error::InvalidArgument(format!(
                    "basis is not orthonormal: g(E{}, E{}) = {gij}",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let n = 2 * local.p();
    let mut acc = DMatrix::zeros(n, n);
    for v in basis {
        let sign = local.g(v, v).signum();
        acc += jacobi(local, v)?.0 * sign;
    }
    Ok(Operator(acc))
}

/// `g(A U, V) = g^{ab} R(U, e_a, e_b, V)`: the higher-order Jacobi
/// operator of the whole tangent space, independent of any basis.
pub fn ricci_operator(local: &LocalGeometry) -> Operator {
    let p = local.p();
    let ginv = local.metric.inverse();
    let r = &local.curvature;
    let mx = DMatrix::from_fn(p, p, |u, v| {
        let mut s = 0.0;
        for a in 0..p {
            for b in 0..p {
                s += ginv[(a, b)] * r[[u, a, b, v]];
            }
        }
        s
    });
    from_x_form(local, &mx)
}

/// An eigenvalue cluster `(re, im)` with its algebraic multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenCluster {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
}

/// Eigenvalue multiset plus the rank sequence `rank(A^0), rank(A^1), …`
/// up to stabilisation. Together they determine the Jordan structure of
/// the nilpotent part and the distinct eigenvalues of the rest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorFingerprint {
    pub eigenvalues: Vec<EigenCluster>,
    pub ranks: Vec<usize>,
}

impl OperatorFingerprint {
    pub fn is_zero(&self) -> bool {
        self.ranks.get(1) == Some(&0)
    }

    /// Exact rank sequences and matching eigenvalue clusters within `tol`.
    pub fn matches(&self, other: &OperatorFingerprint, tol: f64) -> bool {
        self.ranks == other.ranks
            && self.eigenvalues.len() == other.eigenvalues.len()
            && self.eigenvalues.iter().zip(&other.eigenvalues).all(|(a, b)| {
                a.multiplicity == b.multiplicity && (a.re - b.re).abs() <= tol && (a.im - b.im).abs() <= tol
            })
    }
}

impl fmt::Display for OperatorFingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ranks {:?}, eigenvalues [", self.ranks)?;
        for (i, c) in self.eigenvalues.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{:.3e}{:+.3e}i x{}", c.re, c.im, c.multiplicity)?;
        }
        f.write_str("]")
    }
}

fn numerical_rank(a: &DMatrix<f64>, threshold: f64) -> usize {
    a.clone().singular_values().iter().filter(|&&s| s > threshold).count()
}

pub fn rank_sequence(a: &DMatrix<f64>) -> Vec<usize> {
    let n = a.nrows();
    let smax = a.clone().singular_values().amax();
    let mut ranks = vec![n];
    let mut power = DMatrix::identity(n, n);
    for k in 1..=n + 1 {
        power = &power * a;
        let r = numerical_rank(&power, RANK_TOL * smax.powi(k as i32));
        if r == *ranks.last().unwrap() {
            break;
        }
        ranks.push(r);
    }
    ranks
}

/// The nilpotent part contributes exactly `n − r_∞` zero eigenvalues, with
/// `r_∞` the stable rank of the powers; the remaining `r_∞` eigenvalues are
/// the largest in magnitude from a real Schur decomposition.
pub fn fingerprint(a: &DMatrix<f64>) -> OperatorFingerprint {
    let n = a.nrows();
    let ranks = rank_sequence(a);
    let stable = *ranks.last().unwrap();
    let mut eig: Vec<(f64, f64)> = vec![(0.0, 0.0); n - stable];
    if stable > 0 {
        let schur = Schur::try_new(a.clone(), f64::EPSILON, 100_000).unwrap_or_else(|| Schur::new(a.clone()));
        let mut all: Vec<(f64, f64)> = schur.complex_eigenvalues().iter().map(|c| (c.re, c.im)).collect();
        all.sort_by(|x, y| (y.0.hypot(y.1)).total_cmp(&x.0.hypot(x.1)));
        eig.extend(all.into_iter().take(stable));
    }
    eig.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let mut clusters: Vec<EigenCluster> = Vec::new();
    for (re, im) in eig {
        if let Some(c) = clusters
            .iter_mut()
            .find(|c| (c.re - re).abs() <= EIGEN_TOL && (c.im - im).abs() <= EIGEN_TOL)
        {
            let m = c.multiplicity as f64;
            c.re = (c.re * m + re) / (m + 1.0);
            c.im = (c.im * m + im) / (m + 1.0);
            c.multiplicity += 1;
        } else {
            clusters.push(EigenCluster { re, im, multiplicity: 1 });
        }
    }
    for c in &mut clusters {
        if c.re == 0.0 {
            c.re = 0.0;
        }
        if c.im == 0.0 {
            c.im = 0.0;
        }
    }
    OperatorFingerprint { eigenvalues: clusters, ranks }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Causal {
    Spacelike,
    Timelike,
}

impl Causal {
    pub fn sign(self) -> f64 {
        match self {
            Causal::Spacelike => 1.0,
            Causal::Timelike => -1.0,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Causal::Spacelike => "spacelike",
            Causal::Timelike => "timelike",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    Jacobi(Causal),
    Szabo(Causal),
    Skew(Causal),
    HigherJacobi { r: usize, s: usize },
}

impl SampleKind {
    pub const POSITIVE_KINDS: [SampleKind; 6] = [
        SampleKind::Jacobi(Causal::Spacelike),
        SampleKind::Jacobi(Causal::Timelike),
        SampleKind::Szabo(Causal::Spacelike),
        SampleKind::Szabo(Causal::Timelike),
        SampleKind::Skew(Causal::Spacelike),
        SampleKind::Skew(Causal::Timelike),
    ];
}

impl fmt::Display for SampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleKind::Jacobi(c) => write!(f, "jacobi-{}", c.name()),
            SampleKind::Szabo(c) => write!(f, "szabo-{}", c.name()),
            SampleKind::Skew(c) => write!(f, "skew-{}", c.name()),
            SampleKind::HigherJacobi { r, s } => write!(f, "higher-jacobi({r},{s})"),
        }
    }
}

impl Serialize for SampleKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Parses `r,s` (also accepts surrounding parentheses).
pub fn parse_rs(src: &str) -> Result<(usize, usize)> {
    let inner = src.trim().trim_start_matches('(').trim_end_matches(')');
    let bad = || Error::InvalidArgument(format!("'{src}' is not r,s"));
    let (r, s) = inner.split_once(',').ok_or_else(bad)?;
    Ok((r.trim().parse().map_err(|_| bad())?, s.trim().parse().map_err(|_| bad())?))
}

impl FromStr for SampleKind {
    type Err = Error;

    fn from_str(src: &str) -> Result<SampleKind> {
        let s = src.trim();
        if let Some(rest) = s.strip_prefix("higher-jacobi") {
            let (r, s) = parse_rs(rest)?;
            return Ok(SampleKind::HigherJacobi { r, s });
        }
        let (op, causal) = s
            .split_once('-')
            .ok_or_else(|| Error::InvalidArgument(format!("unknown operator kind '{src}'")))?;
        let causal = match causal {
            "spacelike" => Causal::Spacelike,
            "timelike" => Causal::Timelike,
            _ => return Err(Error::InvalidArgument(format!("unknown causal type in '{src}'"))),
        };
        match op {
            "jacobi" => Ok(SampleKind::Jacobi(causal)),
            "szabo" => Ok(SampleKind::Szabo(causal)),
            "skew" => Ok(SampleKind::Skew(causal)),
            _ => Err(Error::InvalidArgument(format!("unknown operator kind '{src}'"))),
        }
    }
}

/// A vector with `g(Z, Z) = sign`: `x` part uniform on the sphere, `y` part
/// Gaussian shifted along `x` to fix the norm (the `y` directions are null,
/// so direct rescaling does not work).
pub fn sample_unit<R: Rng>(local: &LocalGeometry, causal: Causal, rng: &mut R) -> Result<Vec<f64>> {
    let p = local.p();
    let grad = &local.jet.grad;
    for _ in 0..MAX_RESAMPLES {
        let a = random_unit(p, rng);
        let b: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
        let a2: f64 = a.iter().map(|v| v * v).sum();
        if 2.0 * a2 < 1e-12 {
            continue;
        }
        let ag: f64 = a.iter().zip(grad).map(|(x, y)| x * y).sum();
        let ab: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        let t = (causal.sign() - ag * ag - 2.0 * ab) / (2.0 * a2);
        let mut z = a.clone();
        z.extend(b.iter().zip(&a).map(|(bi, ai)| bi + t * ai));
        return Ok(z);
    }
    Err(Error::Domain("could not sample a unit vector".into()))
}

/// `g`-orthonormal vectors with the given signs, by signed Gram–Schmidt on
/// Gaussian draws; a draw whose residual norm has the wrong sign or is too
/// small is discarded.
pub fn sample_orthonormal<R: Rng>(local: &LocalGeometry, signs: &[Causal], rng: &mut R) -> Result<Vec<Vec<f64>>> {
    let n = 2 * local.p();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(signs.len());
    if signs.iter().filter(|c| **c == Causal::Spacelike).count() > local.p()
        || signs.iter().filter(|c| **c == Causal::Timelike).count() > local.p()
    {
        return Err(Error::InvalidArgument(format!(
            "no such non-degenerate subspace in signature ({0},{0})",
            local.p()
        )));
    }
    for &c in signs {
        let mut found = None;
        for _ in 0..MAX_RESAMPLES {
            let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            for e in &out {
                let coef = local.g(&v, e) * local.g(e, e);
                for (vi, ei) in v.iter_mut().zip(e) {
                    *vi -= coef * ei;
                }
            }
            let q = local.g(&v, &v);
            if q * c.sign() > 1e-3 {
                let scale = 1.0 / q.abs().sqrt();
                v.iter_mut().for_each(|x| *x *= scale);
                found = Some(v);
                break;
            }
        }
        out.push(found.ok_or_else(|| Error::Domain("could not sample an orthonormal frame".into()))?);
    }
    Ok(out)
}

fn signs_for(kind: SampleKind) -> Vec<Causal> {
    match kind {
        SampleKind::HigherJacobi { r, s } => {
            let mut v = vec![Causal::Spacelike; r];
            v.extend(std::iter::repeat_n(Causal::Timelike, s));
            v
        }
        SampleKind::Skew(c) => vec![c, c],
        SampleKind::Jacobi(c) | SampleKind::Szabo(c) => vec![c],
    }
}

/// One random operator of the given kind.
pub fn sample_operator<R: Rng>(local: &LocalGeometry, kind: SampleKind, rng: &mut R) -> Result<Operator> {
    match kind {
        SampleKind::Jacobi(c) => jacobi(local, &sample_unit(local, c, rng)?),
        SampleKind::Szabo(c) => szabo(local, &sample_unit(local, c, rng)?),
        SampleKind::Skew(c) => {
            let e = sample_orthonormal(local, &[c, c], rng)?;
            skew_curv(local, &e[0], &e[1])
        }
        SampleKind::HigherJacobi { .. } => higher_jacobi(local, &sample_orthonormal(local, &signs_for(kind), rng)?),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FingerprintCount {
    pub fingerprint: OperatorFingerprint,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstancyReport {
    pub kind: SampleKind,
    pub n: usize,
    pub seed: u64,
    pub point: Vec<f64>,
    pub num_distinct_fingerprints: usize,
    pub fingerprints: Vec<FingerprintCount>,
}

/// Groups fingerprints into classes of mutually matching ones (by first
/// representative), preserving first-seen order.
pub fn distinct_fingerprints(prints: impl IntoIterator<Item = OperatorFingerprint>, tol: f64) -> Vec<FingerprintCount> {
    let mut classes: Vec<FingerprintCount> = Vec::new();
    for fp in prints {
        match classes.iter_mut().find(|c| c.fingerprint.matches(&fp, tol)) {
            Some(c) => c.count += 1,
            None => classes.push(FingerprintCount { fingerprint: fp, count: 1 }),
        }
    }
    classes
}

/// Samples `n` operators of `kind` at the point and counts distinct
/// fingerprints. Sample `i` draws from stream `i` of a ChaCha generator
/// seeded with `seed`, so the report does not depend on thread scheduling.
pub fn sample_constancy_at(local: &LocalGeometry, kind: SampleKind, n: usize, seed: u64) -> Result<ConstancyReport> {
    local.require_positive_definite()?;
    let prints: Vec<OperatorFingerprint> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            sample_operator(local, kind, &mut rng).map(|op| op.fingerprint())
        })
        .collect::<Result<_>>()?;
    let fingerprints = distinct_fingerprints(prints, EIGEN_TOL);
    Ok(ConstancyReport {
        kind,
        n,
        seed,
        point: local.point.coords(),
        num_distinct_fingerprints: fingerprints.len(),
        fingerprints,
    })
}

pub fn sample_constancy(field: &FieldSpec, point: &Point, kind: SampleKind, n: usize, seed: u64) -> Result<ConstancyReport> {
    sample_constancy_at(&LocalGeometry::new(field, point)?, kind, n, seed)
}

/// Another `g`-orthonormal basis of the span of `basis`, with the same
/// signs: a random rotation within each causal block, followed by a
/// hyperbolic boost mixing the first spacelike and first timelike vectors
/// when both exist.
pub fn rebase<R: Rng>(local: &LocalGeometry, basis: &[Vec<f64>], rng: &mut R) -> Vec<Vec<f64>> {
    let (space, time): (Vec<&Vec<f64>>, Vec<&Vec<f64>>) = basis.iter().partition(|v| local.g(v, v) > 0.0);
    let rotate = |block: &[&Vec<f64>], rng: &mut R| -> Vec<Vec<f64>> {
        let k = block.len();
        if k == 0 {
            return Vec::new();
        }
        let o = crate::linalg::random_orthogonal(k, rng);
        (0..k)
            .map(|i| {
                let mut v = vec![0.0; block[0].len()];
                for (j, e) in block.iter().enumerate() {
                    for (vi, ei) in v.iter_mut().zip(e.iter()) {
                        *vi += o[(i, j)] * ei;
                    }
                }
                v
            })
            .collect()
    };
    let mut s = rotate(&space, rng);
    let mut t = rotate(&time, rng);
    if !s.is_empty() && !t.is_empty() {
        let phi: f64 = rng.gen_range(-1.0..1.0);
        let (ch, sh) = (phi.cosh(), phi.sinh());
        let (a, b) = (s[0].clone(), t[0].clone());
        s[0] = a.iter().zip(&b).map(|(x, y)| ch * x + sh * y).collect();
        t[0] = a.iter().zip(&b).map(|(x, y)| sh * x + ch * y).collect();
    }
    s.extend(t);
    s
}

/// JSON view of an operator with its fingerprint.
#[derive(Debug, Clone, Serialize)]
pub struct OperatorDump {
    pub matrix: Vec<Vec<f64>>,
    pub fingerprint: OperatorFingerprint,
}

impl From<&Operator> for OperatorDump {
    fn from(op: &Operator) -> OperatorDump {
        OperatorDump { matrix: matrix_rows(&op.0), fingerprint: op.fingerprint() }
    }
}
