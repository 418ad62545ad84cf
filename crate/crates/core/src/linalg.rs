use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Pivots at or below this value mark a form as not positive definite.
pub const PD_PIVOT_TOL: f64 = 1e-12;

/// Lower-triangular `C` with `A = C Cᵀ`, processing indices in natural
/// order. Fails on the first pivot `≤ PD_PIVOT_TOL`.
pub fn cholesky(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "cholesky needs a square matrix");
    let mut c = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= c[(j, k)] * c[(j, k)];
        }
        if d.is_nan() || d <= PD_PIVOT_TOL {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let d = d.sqrt();
        c[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= c[(i, k)] * c[(j, k)];
            }
            c[(i, j)] = s / d;
        }
    }
    Ok(c)
}

pub fn is_positive_definite(a: &DMatrix<f64>) -> bool {
    cholesky(a).is_ok()
}

/// Inverse of a lower-triangular matrix with non-zero diagonal.
pub fn lower_triangular_inverse(c: &DMatrix<f64>) -> DMatrix<f64> {
    let n = c.nrows();
    let mut inv = DMatrix::zeros(n, n);
    for col in 0..n {
        for i in col..n {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for k in col..i {
                s -= c[(i, k)] * inv[(k, col)];
            }
            inv[(i, col)] = s / c[(i, i)];
        }
    }
    inv
}

pub fn max_asymmetry(a: &DMatrix<f64>) -> f64 {
    (a - a.transpose()).amax()
}

/// Counts of positive and negative eigenvalues of a symmetric matrix;
/// eigenvalues within `tol · max|λ|` of zero are counted in neither.
pub fn signature(a: &DMatrix<f64>, tol: f64) -> (usize, usize) {
    let eig = a.clone().symmetric_eigen();
    let scale = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    let pos = eig.eigenvalues.iter().filter(|&&l| l > tol * scale).count();
    let neg = eig.eigenvalues.iter().filter(|&&l| l < -tol * scale).count();
    (pos, neg)
}

/// Haar-distributed orthogonal matrix from a Gaussian QR.
pub fn random_orthogonal<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// Unit vector drawn uniformly from the sphere `S^{n-1}`.
pub fn random_unit<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cholesky_roundtrip() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 2.0, 0.4, 2.0, 3.0, 0.5, 0.4, 0.5, 2.0]);
        let c = cholesky(&a).unwrap();
        assert!((&c * c.transpose() - &a).amax() < 1e-14);
        for i in 0..3 {
            assert!(c[(i, i)] > 0.0);
            for j in i + 1..3 {
                assert_eq!(c[(i, j)], 0.0);
            }
        }
        let inv = lower_triangular_inverse(&c);
        assert!((&inv * &c - DMatrix::identity(3, 3)).amax() < 1e-14);
    }

    #[test]
    fn cholesky_rejects_indefinite_and_semidefinite() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0, 1.0]));
        assert!(matches!(cholesky(&a), Err(Error::NotPositiveDefinite { pivot: 1, .. })));
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(!is_positive_definite(&b));
    }

    #[test]
    fn orthogonal_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let q = random_orthogonal(5, &mut rng);
        assert!((q.transpose() * &q - DMatrix::identity(5, 5)).amax() < 1e-13);
    }

    #[test]
    fn neutral_signature() {
        let mut g = DMatrix::zeros(4, 4);
        for i in 0..2 {
            g[(i, i + 2)] = 1.0;
            g[(i + 2, i)] = 1.0;
        }
        assert_eq!(signature(&g, 1e-12), (2, 2));
    }
}
