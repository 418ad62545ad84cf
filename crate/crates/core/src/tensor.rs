use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use serde::ser::{Serialize, SerializeSeq, Serializer};

/// Dense rank-`R` tensor with every axis of length `n`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<const R: usize> {
    n: usize,
    data: Vec<f64>,
}

/// Rank-4 curvature tensor `R(e_i, e_j, e_k, e_l)`.
pub type Curv4 = Tensor<4>;
/// Rank-5 covariant derivative `∇R(e_i, e_j, e_k, e_l; e_n)`.
pub type Curv5 = Tensor<5>;

impl<const R: usize> Tensor<R> {
    pub fn zeros(n: usize) -> Self {
        Tensor { n, data: vec![0.0; n.pow(R as u32)] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut([usize; R]) -> f64) -> Self {
        let mut t = Self::zeros(n);
        for flat in 0..t.data.len() {
            t.data[flat] = f(t.unflatten(flat));
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    fn flatten(&self, idx: [usize; R]) -> usize {
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.n);
            acc * self.n + i
        })
    }

    pub fn unflatten(&self, mut flat: usize) -> [usize; R] {
        let mut idx = [0; R];
        for slot in idx.iter_mut().rev() {
            *slot = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    pub fn indexed(&self) -> impl Iterator<Item = ([usize; R], f64)> + '_ {
        self.data.iter().enumerate().map(|(flat, &v)| (self.unflatten(flat), v))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n, "tensor dimensions differ");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn sum_squares(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// Components in a new frame: `T'(a, b, …) = Σ T(i, j, …) B[i,a] B[j,b] …`,
    /// where column `a` of `basis` expresses the new vector `e'_a` in the old
    /// frame. `basis` may be rectangular (`n × m`).
    pub fn in_frame(&self, basis: &DMatrix<f64>) -> Tensor<R> {
        assert_eq!(basis.nrows(), self.n, "basis rows must match tensor dimension");
        let n = self.n;
        let m = basis.ncols();
        // Contract one axis at a time; `dims` tracks the mixed shape.
        let mut dims = [n; R];
        let mut cur = self.data.clone();
        for axis in 0..R {
            let outer: usize = dims[..axis].iter().product();
            let inner: usize = dims[axis + 1..].iter().product();
            let mut next = vec![0.0; outer * m * inner];
            for o in 0..outer {
                for i in 0..n {
                    let src = &cur[(o * n + i) * inner..(o * n + i + 1) * inner];
                    for a in 0..m {
                        let w = basis[(i, a)];
                        if w == 0.0 {
                            continue;
                        }
                        let dst = &mut next[(o * m + a) * inner..(o * m + a + 1) * inner];
                        for (d, s) in dst.iter_mut().zip(src) {
                            *d += w * s;
                        }
                    }
                }
            }
            dims[axis] = m;
            cur = next;
        }
        Tensor { n: m, data: cur }
    }

    /// Extension by zero from the leading `n` coordinates to `dim ≥ n`.
    pub fn extend_by_zero(&self, dim: usize) -> Tensor<R> {
        assert!(dim >= self.n);
        let mut out = Tensor::zeros(dim);
        for (idx, v) in self.indexed() {
            let flat = out.flatten(idx);
            out.data[flat] = v;
        }
        out
    }

    /// Restriction to the leading `dim` coordinates.
    pub fn leading_block(&self, dim: usize) -> Tensor<R> {
        assert!(dim <= self.n);
        Tensor::from_fn(dim, |idx| self[idx])
    }
}

impl<const R: usize> Index<[usize; R]> for Tensor<R> {
    type Output = f64;
    fn index(&self, idx: [usize; R]) -> &f64 {
        &self.data[self.flatten(idx)]
    }
}

impl<const R: usize> IndexMut<[usize; R]> for Tensor<R> {
    fn index_mut(&mut self, idx: [usize; R]) -> &mut f64 {
        let flat = self.flatten(idx);
        &mut self.data[flat]
    }
}

/// Serializes as nested row-major arrays.
impl<const R: usize> Serialize for Tensor<R> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serialize_nested(serializer, &self.data, self.n, R)
    }
}

struct Nested<'a> {
    data: &'a [f64],
    n: usize,
    rank: usize,
}

impl Serialize for Nested<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serialize_nested(serializer, self.data, self.n, self.rank)
    }
}

fn serialize_nested<S: Serializer>(
    serializer: S,
    data: &[f64],
    n: usize,
    rank: usize,
) -> Result<S::Ok, S::Error> {
    let mut seq = serializer.serialize_seq(Some(n))?;
    if rank == 1 {
        for v in data {
            seq.serialize_element(v)?;
        }
    } else {
        let chunk = data.len() / n.max(1);
        for part in data.chunks(chunk.max(1)).take(n) {
            seq.serialize_element(&Nested { data: part, n, rank: rank - 1 })?;
        }
    }
    seq.end()
}

/// Row-major nested representation of a matrix, for JSON output.
pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}
