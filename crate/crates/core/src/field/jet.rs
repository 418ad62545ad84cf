use std::sync::Arc;

use crate::error::{Error, Result};

/// Index bookkeeping shared by all jets of one dimension: each sorted index
/// tuple is computed once and written to every permutation, which keeps
/// the symmetry of the Hessian and third tensor exact in floating point.
#[derive(Debug)]
pub(crate) struct Layout {
    p: usize,
    pairs: Vec<(usize, usize, [usize; 2])>,
    triples: Vec<(usize, usize, usize, Vec<usize>)>,
}

impl Layout {
    pub(crate) fn new(p: usize) -> Arc<Layout> {
        let mut pairs = Vec::new();
        let mut triples = Vec::new();
        for i in 0..p {
            for j in i..p {
                pairs.push((i, j, [i * p + j, j * p + i]));
                for k in j..p {
                    let mut slots: Vec<usize> = [
                        (i, j, k),
                        (i, k, j),
                        (j, i, k),
                        (j, k, i),
                        (k, i, j),
                        (k, j, i),
                    ]
                    .iter()
                    .map(|&(a, b, c)| (a * p + b) * p + c)
                    .collect();
                    slots.sort_unstable();
                    slots.dedup();
                    triples.push((i, j, k, slots));
                }
            }
        }
        Arc::new(Layout { p, pairs, triples })
    }
}

/// Value, gradient, Hessian and third-derivative tensor of a scalar field
/// at one point. Arrays are row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet3 {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
    pub third: Vec<f64>,
}

impl Jet3 {
    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim() + j]
    }

    pub fn third(&self, i: usize, j: usize, k: usize) -> f64 {
        let p = self.dim();
        self.third[(i * p + j) * p + k]
    }

    /// Third-order Taylor polynomial around the expansion point, evaluated
    /// at `x0 + dx`.
    pub fn taylor(&self, dx: &[f64]) -> f64 {
        let p = self.dim();
        let mut s = self.value;
        for i in 0..p {
            s += self.grad[i] * dx[i];
            for j in 0..p {
                s += 0.5 * self.hess(i, j) * dx[i] * dx[j];
                for k in 0..p {
                    s += self.third(i, j, k) * dx[i] * dx[j] * dx[k] / 6.0;
                }
            }
        }
        s
    }
}

/// Working jet used during expression evaluation.
#[derive(Debug, Clone)]
pub(crate) struct JetNum {
    layout: Arc<Layout>,
    jet: Jet3,
}

impl JetNum {
    pub(crate) fn constant(layout: &Arc<Layout>, value: f64) -> JetNum {
        let p = layout.p;
        JetNum {
            layout: layout.clone(),
            jet: Jet3 {
                value,
                grad: vec![0.0; p],
                hess: vec![0.0; p * p],
                third: vec![0.0; p * p * p],
            },
        }
    }

    pub(crate) fn variable(layout: &Arc<Layout>, index: usize, value: f64) -> JetNum {
        let mut v = JetNum::constant(layout, value);
        v.jet.grad[index] = 1.0;
        v
    }

    pub(crate) fn into_jet(self) -> Jet3 {
        self.jet
    }

    fn zero_like(&self, value: f64) -> JetNum {
        JetNum::constant(&self.layout, value)
    }

    pub(crate) fn neg(&self) -> JetNum {
        let mut out = self.clone();
        out.jet.value = -out.jet.value;
        for v in out
            .jet
            .grad
            .iter_mut()
            .chain(out.jet.hess.iter_mut())
            .chain(out.jet.third.iter_mut())
        {
            *v = -*v;
        }
        out
    }

    fn zip(&self, other: &JetNum, sign: f64) -> JetNum {
        let mut out = self.clone();
        out.jet.value += sign * other.jet.value;
        let pairs = out
            .jet
            .grad
            .iter_mut()
            .zip(&other.jet.grad)
            .chain(out.jet.hess.iter_mut().zip(&other.jet.hess))
            .chain(out.jet.third.iter_mut().zip(&other.jet.third));
        for (a, b) in pairs {
            *a += sign * b;
        }
        out
    }

    pub(crate) fn add(&self, other: &JetNum) -> JetNum {
        self.zip(other, 1.0)
    }

    pub(crate) fn sub(&self, other: &JetNum) -> JetNum {
        self.zip(other, -1.0)
    }

    pub(crate) fn mul(&self, other: &JetNum) -> JetNum {
        let (u, v) = (&self.jet, &other.jet);
        let p = self.layout.p;
        let mut out = self.zero_like(u.value * v.value);
        for i in 0..p {
            out.jet.grad[i] = u.grad[i] * v.value + u.value * v.grad[i];
        }
        for &(i, j, slots) in &self.layout.pairs {
            let h = u.hess(i, j) * v.value
                + (u.grad[i] * v.grad[j] + u.grad[j] * v.grad[i])
                + u.value * v.hess(i, j);
            for s in slots {
                out.jet.hess[s] = h;
            }
        }
        for (i, j, k, slots) in &self.layout.triples {
            let (i, j, k) = (*i, *j, *k);
            let t = u.third(i, j, k) * v.value
                + u.hess(i, j) * v.grad[k]
                + u.hess(i, k) * v.grad[j]
                + u.hess(j, k) * v.grad[i]
                + u.grad[i] * v.hess(j, k)
                + u.grad[j] * v.hess(i, k)
                + u.grad[k] * v.hess(i, j)
                + u.value * v.third(i, j, k);
            for &s in slots {
                out.jet.third[s] = t;
            }
        }
        out
    }

    /// Composition `g(u)` given `[g, g', g'', g''']` at `u.value`.
    pub(crate) fn compose(&self, d: [f64; 4]) -> JetNum {
        let u = &self.jet;
        let p = self.layout.p;
        let mut out = self.zero_like(d[0]);
        for i in 0..p {
            out.jet.grad[i] = d[1] * u.grad[i];
        }
        for &(i, j, slots) in &self.layout.pairs {
            let h = d[2] * u.grad[i] * u.grad[j] + d[1] * u.hess(i, j);
            for s in slots {
                out.jet.hess[s] = h;
            }
        }
        for (i, j, k, slots) in &self.layout.triples {
            let (i, j, k) = (*i, *j, *k);
            let t = d[3] * u.grad[i] * u.grad[j] * u.grad[k]
                + d[2]
                    * (u.hess(i, j) * u.grad[k]
                        + u.hess(i, k) * u.grad[j]
                        + u.hess(j, k) * u.grad[i])
                + d[1] * u.third(i, j, k);
            for &s in slots {
                out.jet.third[s] = t;
            }
        }
        out
    }

    pub(crate) fn value(&self) -> f64 {
        self.jet.value
    }

    pub(crate) fn recip(&self) -> Result<JetNum> {
        let t = self.jet.value;
        if t == 0.0 {
            return Err(Error::Domain("division by zero".into()));
        }
        let r = 1.0 / t;
        Ok(self.compose([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r]))
    }

    pub(crate) fn powi(&self, n: i32) -> Result<JetNum> {
        Ok(self.compose(powi_derivatives(self.jet.value, n)?))
    }
}

/// `[t^n, n t^(n-1), n(n-1) t^(n-2), n(n-1)(n-2) t^(n-3)]`, with the
/// vanishing coefficients of low non-negative powers kept exactly zero.
pub(crate) fn powi_derivatives(t: f64, n: i32) -> Result<[f64; 4]> {
    if t == 0.0 && n < 0 {
        return Err(Error::Domain(format!("0 raised to negative power {n}")));
    }
    let mut out = [0.0; 4];
    let mut coeff = 1.0;
    for (k, slot) in out.iter_mut().enumerate() {
        let e = n - k as i32;
        if k > 0 {
            coeff *= (n - k as i32 + 1) as f64;
        }
        if coeff == 0.0 {
            break;
        }
        *slot = coeff * t.powi(e);
    }
    Ok(out)
}
