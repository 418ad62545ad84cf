//! Scalar fields `f: O ⊂ R^p → R` given as expressions, with exact
//! derivative jets through third order and a finite-difference oracle.

mod expr;
mod jet;
mod parse;

use std::fmt;
use std::sync::Arc;

pub use expr::{Expr, Func};
pub use jet::Jet3;

use crate::error::{Error, Result};
use jet::{JetNum, Layout};

/// Central-difference step used by [`jet3_fd`] when the caller has no
/// preference.
pub const DEFAULT_FD_STEP: f64 = 1e-3;

/// An immutable scalar field on an open subset of `R^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec {
    p: usize,
    body: Expr,
}

impl FieldSpec {
    pub fn new(p: usize, body: Expr) -> Result<FieldSpec> {
        if p == 0 {
            return Err(Error::InvalidArgument("field dimension must be at least 1".into()));
        }
        let max = body.max_var();
        if max > p {
            return Err(Error::VariableOutOfRange { index: max, p });
        }
        Ok(FieldSpec { p, body })
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn body(&self) -> &Expr {
        &self.body
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_len(x)?;
        let v = eval_f64(&self.body, x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain(format!("field value {v} is not finite")))
        }
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.p {
            return Err(Error::DimensionMismatch { expected: self.p, got: x.len() });
        }
        Ok(())
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.body)
    }
}

pub fn parse_field(source: &str, p: usize) -> Result<FieldSpec> {
    if p == 0 {
        return Err(Error::InvalidArgument("field dimension must be at least 1".into()));
    }
    FieldSpec::new(p, parse::parse_expr(source, p)?)
}

fn eval_f64(e: &Expr, x: &[f64]) -> Result<f64> {
    Ok(match e {
        Expr::Const(c) => *c,
        Expr::Var(i) => x[*i],
        Expr::Neg(a) => -eval_f64(a, x)?,
        Expr::Add(a, b) => eval_f64(a, x)? + eval_f64(b, x)?,
        Expr::Sub(a, b) => eval_f64(a, x)? - eval_f64(b, x)?,
        Expr::Mul(a, b) => eval_f64(a, x)? * eval_f64(b, x)?,
        Expr::Div(a, b) => {
            let d = eval_f64(b, x)?;
            if d == 0.0 {
                return Err(Error::Domain("division by zero".into()));
            }
            eval_f64(a, x)? / d
        }
        Expr::Pow(a, n) => jet::powi_derivatives(eval_f64(a, x)?, *n)?[0],
        Expr::Call(f, a) => f.derivatives(eval_f64(a, x)?)?[0],
    })
}

fn eval_jet(e: &Expr, layout: &Arc<Layout>, x: &[f64]) -> Result<JetNum> {
    Ok(match e {
        Expr::Const(c) => JetNum::constant(layout, *c),
        Expr::Var(i) => JetNum::variable(layout, *i, x[*i]),
        Expr::Neg(a) => eval_jet(a, layout, x)?.neg(),
        Expr::Add(a, b) => eval_jet(a, layout, x)?.add(&eval_jet(b, layout, x)?),
        Expr::Sub(a, b) => eval_jet(a, layout, x)?.sub(&eval_jet(b, layout, x)?),
        Expr::Mul(a, b) => eval_jet(a, layout, x)?.mul(&eval_jet(b, layout, x)?),
        Expr::Div(a, b) => eval_jet(a, layout, x)?.mul(&eval_jet(b, layout, x)?.recip()?),
        Expr::Pow(a, n) => eval_jet(a, layout, x)?.powi(*n)?,
        Expr::Call(f, a) => {
            let u = eval_jet(a, layout, x)?;
            let d = f.derivatives(u.value())?;
            u.compose(d)
        }
    })
}

/// Exact (to rounding) value, gradient, Hessian and third derivatives of
/// `field` at `x`, by third-order forward propagation through the tree.
pub fn jet3(field: &FieldSpec, x: &[f64]) -> Result<Jet3> {
    field.check_len(x)?;
    let layout = Layout::new(field.p);
    let jet = eval_jet(&field.body, &layout, x)?.into_jet();
    let finite = std::iter::once(&jet.value)
        .chain(&jet.grad)
        .chain(&jet.hess)
        .chain(&jet.third)
        .all(|v| v.is_finite());
    if !finite {
        return Err(Error::Domain(format!("non-finite derivative at {x:?}")));
    }
    Ok(jet)
}

/// Central finite-difference estimate of the jet, used as an oracle for
/// [`jet3`]. Mixed derivatives are nested central differences, so the
/// stencil reaches `3h` from `x` along a single axis; the error is `O(h²)`.
pub fn jet3_fd(field: &FieldSpec, x: &[f64], h: f64) -> Result<Jet3> {
    field.check_len(x)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {h}")));
    }
    let p = field.p;
    let mut probe = x.to_vec();
    let mut eval_at = |offsets: &[(usize, f64)]| -> Result<f64> {
        probe.copy_from_slice(x);
        for &(axis, s) in offsets {
            probe[axis] += s * h;
        }
        field.eval(&probe)
    };

    let value = eval_at(&[])?;
    let mut grad = vec![0.0; p];
    for (i, g) in grad.iter_mut().enumerate() {
        *g = (eval_at(&[(i, 1.0)])? - eval_at(&[(i, -1.0)])?) / (2.0 * h);
    }

    const SIGNS: [f64; 2] = [1.0, -1.0];
    let mut hess = vec![0.0; p * p];
    for i in 0..p {
        for j in i..p {
            let mut acc = 0.0;
            for si in SIGNS {
                for sj in SIGNS {
                    acc += si * sj * eval_at(&[(i, si), (j, sj)])?;
                }
            }
            let v = acc / (4.0 * h * h);
            hess[i * p + j] = v;
            hess[j * p + i] = v;
        }
    }

    let mut third = vec![0.0; p * p * p];
    for i in 0..p {
        for j in i..p {
            for k in j..p {
                let mut acc = 0.0;
                for si in SIGNS {
                    for sj in SIGNS {
                        for sk in SIGNS {
                            acc += si * sj * sk * eval_at(&[(i, si), (j, sj), (k, sk)])?;
                        }
                    }
                }
                let v = acc / (8.0 * h * h * h);
                for (a, b, c) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                    third[(a * p + b) * p + c] = v;
                }
            }
        }
    }
    Ok(Jet3 { value, grad, hess, third })
}

/// `f(x) = ½(x1² + … + xp²) + Θ(x1)`.
pub fn canonical_f(theta: &FieldSpec, p: usize) -> Result<FieldSpec> {
    if p == 0 {
        return Err(Error::InvalidArgument("field dimension must be at least 1".into()));
    }
    if theta.body.max_var() > 1 {
        return Err(Error::InvalidArgument(format!(
            "theta may depend on x1 only, got '{}'",
            theta.body
        )));
    }
    let mut squares = Expr::pow(Expr::var(0), 2)?;
    for i in 1..p {
        squares = Expr::add(squares, Expr::pow(Expr::var(i), 2)?)?;
    }
    let quadratic = Expr::mul(Expr::Const(0.5), squares)?;
    FieldSpec::new(p, Expr::add(quadratic, theta.body.clone())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn f0() -> FieldSpec {
        parse_field("0.5*(x1^2+x2^2+x3^2)", 3).unwrap()
    }

    fn sin_family() -> FieldSpec {
        parse_field("0.5*(x1^2+x2^2+x3^2)+0.5*sin(x1)", 3).unwrap()
    }

    #[test]
    fn parse_examples() {
        assert_eq!(f0().dim(), 3);
        assert_eq!(sin_family().dim(), 3);
        assert_eq!(
            parse_field("x4", 3),
            Err(Error::VariableOutOfRange { index: 4, p: 3 })
        );
    }

    #[test]
    fn quadratic_jet() {
        let j = jet3(&f0(), &[1.0, 2.0, 0.0]).unwrap();
        assert_eq!(j.value, 2.5);
        assert_eq!(j.grad, vec![1.0, 2.0, 0.0]);
        for i in 0..3 {
            for k in 0..3 {
                assert_eq!(j.hess(i, k), if i == k { 1.0 } else { 0.0 });
            }
        }
        assert!(j.third.iter().all(|&t| t == 0.0));
    }

    #[test]
    fn sine_family_jet_at_origin() {
        let j = jet3(&sin_family(), &[0.0; 3]).unwrap();
        assert_eq!(j.grad, vec![0.5, 0.0, 0.0]);
        for i in 0..3 {
            for k in 0..3 {
                assert_eq!(j.hess(i, k), if i == k { 1.0 } else { 0.0 });
            }
        }
        for (idx, &t) in j.third.iter().enumerate() {
            if idx == 0 {
                assert_eq!(t, -0.5);
            } else {
                assert_eq!(t, 0.0);
            }
        }
    }

    #[test]
    fn fd_matches_examples() {
        let fd = jet3_fd(&f0(), &[1.0, 2.0, 0.0], 1e-3).unwrap();
        for i in 0..3 {
            for k in 0..3 {
                let expect = if i == k { 1.0 } else { 0.0 };
                assert!((fd.hess(i, k) - expect).abs() < 1e-6);
            }
        }
        let fd = jet3_fd(&sin_family(), &[0.0; 3], 1e-2).unwrap();
        assert!((fd.third(0, 0, 0) + 0.5).abs() < 1e-4);

        let one = parse_field("1", 2).unwrap();
        let fd = jet3_fd(&one, &[0.3, -0.7], 1e-3).unwrap();
        assert!(fd.grad.iter().chain(&fd.hess).chain(&fd.third).all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn fd_rejects_bad_step() {
        assert!(jet3_fd(&f0(), &[0.0; 3], 0.0).is_err());
        assert!(jet3_fd(&f0(), &[0.0; 3], -1e-3).is_err());
    }

    #[test]
    fn domain_violations() {
        let f = parse_field("log(x1)", 1).unwrap();
        assert!(matches!(jet3(&f, &[-1.0]), Err(Error::Domain(_))));
        assert!(matches!(jet3(&f, &[0.0]), Err(Error::Domain(_))));
        // stencil crosses into the excluded region
        assert!(matches!(jet3_fd(&f, &[1e-3], 1e-3), Err(Error::Domain(_))));
        let g = parse_field("1/x1", 1).unwrap();
        assert!(matches!(jet3(&g, &[0.0]), Err(Error::Domain(_))));
        let h = parse_field("x1^-1", 1).unwrap();
        assert!(matches!(jet3(&h, &[0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            jet3(&f0(), &[0.0; 2]),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn canonical_family() {
        let zero = parse_field("0", 1).unwrap();
        let f = canonical_f(&zero, 3).unwrap();
        for x in [[0.0, 0.0, 0.0], [0.3, -1.2, 2.0]] {
            let j = jet3(&f, &x).unwrap();
            for i in 0..3 {
                for k in 0..3 {
                    assert_eq!(j.hess(i, k), if i == k { 1.0 } else { 0.0 });
                }
            }
        }

        let theta = parse_field("0.5*sin(x1)", 1).unwrap();
        let f = canonical_f(&theta, 3).unwrap();
        let j = jet3(&f, &[FRAC_PI_2, 0.0, 0.0]).unwrap();
        assert!((j.hess(0, 0) - 0.5).abs() < 1e-15);
        assert_eq!(j.hess(1, 1), 1.0);
        assert_eq!(j.hess(2, 2), 1.0);
        assert_eq!(j.hess(0, 1), 0.0);

        let bad = parse_field("x2", 3).unwrap();
        assert!(canonical_f(&bad, 3).is_err());
    }

    #[test]
    fn negative_powers_and_quotients() {
        // d/dx (1/x) = -1/x², d²=2/x³, d³=-6/x⁴
        let f = parse_field("x1^-1", 1).unwrap();
        let j = jet3(&f, &[2.0]).unwrap();
        assert_eq!(j.grad[0], -0.25);
        assert_eq!(j.hess[0], 0.25);
        assert_eq!(j.third[0], -0.375);
        let g = parse_field("1/x1", 1).unwrap();
        assert_eq!(jet3(&g, &[2.0]).unwrap(), j);
    }

    #[test]
    fn low_powers_at_zero_are_finite() {
        let f = parse_field("x1^2 + x1^1 + x1^0", 1).unwrap();
        let j = jet3(&f, &[0.0]).unwrap();
        assert_eq!(j.value, 1.0);
        assert_eq!(j.grad[0], 1.0);
        assert_eq!(j.hess[0], 2.0);
        assert_eq!(j.third[0], 0.0);
    }
}
