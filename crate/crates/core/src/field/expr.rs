use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            _ => None,
        }
    }

    /// Value and first three derivatives at `t`.
    pub(crate) fn derivatives(self, t: f64) -> Result<[f64; 4]> {
        Ok(match self {
            Func::Sin => {
                let (s, c) = t.sin_cos();
                [s, c, -s, -c]
            }
            Func::Cos => {
                let (s, c) = t.sin_cos();
                [c, -s, -c, s]
            }
            Func::Exp => {
                let e = t.exp();
                [e, e, e, e]
            }
            Func::Log => {
                if t <= 0.0 || t.is_nan() {
                    return Err(Error::Domain(format!("log of non-positive value {t}")));
                }
                let r = 1.0 / t;
                [t.ln(), r, -r * r, 2.0 * r * r * r]
            }
        })
    }
}

/// Expression tree over `x1..xp`. Variables are stored zero-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

// Smart constructors fold constants so every stored tree is canonical.
#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn constant(value: f64) -> Result<Expr> {
        if value.is_finite() {
            Ok(Expr::Const(value))
        } else {
            Err(Error::Domain(format!("constant expression evaluates to {value}")))
        }
    }

    pub fn var(index: usize) -> Expr {
        Expr::Var(index)
    }

    pub fn neg(a: Expr) -> Result<Expr> {
        match a {
            Expr::Const(c) => Expr::constant(-c),
            a => Ok(Expr::Neg(Box::new(a))),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Result<Expr> {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::constant(x + y),
            (a, b) => Ok(Expr::Add(Box::new(a), Box::new(b))),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Result<Expr> {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::constant(x - y),
            (a, b) => Ok(Expr::Sub(Box::new(a), Box::new(b))),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Result<Expr> {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::constant(x * y),
            (a, b) => Ok(Expr::Mul(Box::new(a), Box::new(b))),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Result<Expr> {
        match (a, b) {
            (Expr::Const(_), Expr::Const(0.0)) => {
                Err(Error::Domain("division by zero in constant expression".into()))
            }
            (Expr::Const(x), Expr::Const(y)) => Expr::constant(x / y),
            (a, b) => Ok(Expr::Div(Box::new(a), Box::new(b))),
        }
    }

    pub fn pow(a: Expr, n: i32) -> Result<Expr> {
        match a {
            Expr::Const(x) => {
                if x == 0.0 && n < 0 {
                    return Err(Error::Domain("negative power of zero".into()));
                }
                Expr::constant(x.powi(n))
            }
            a => Ok(Expr::Pow(Box::new(a), n)),
        }
    }

    pub fn call(f: Func, a: Expr) -> Result<Expr> {
        match a {
            Expr::Const(x) => Expr::constant(f.derivatives(x)?[0]),
            a => Ok(Expr::Call(f, Box::new(a))),
        }
    }

    /// Largest one-based variable index referenced, 0 for constant trees.
    pub fn max_var(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.max_var().max(b.max_var())
            }
        }
    }

    /// True if the tree references variable `index` (zero-based).
    pub fn references(&self, index: usize) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(i) => *i == index,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.references(index),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.references(index) || b.references(index)
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Const(c) if c.is_sign_negative() => 3,
            Expr::Pow(..) => 4,
            Expr::Const(_) | Expr::Var(_) | Expr::Call(..) => 5,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // Debug formatting of f64 is the shortest string that parses back
            // to the same bits.
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.fmt_child(f, 3)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let (prec, op) = match self {
                    Expr::Add(..) => (1, "+"),
                    Expr::Sub(..) => (1, "-"),
                    Expr::Mul(..) => (2, "*"),
                    _ => (2, "/"),
                };
                a.fmt_child(f, prec)?;
                f.write_str(op)?;
                b.fmt_child(f, prec + 1)
            }
            Expr::Pow(a, n) => {
                a.fmt_child(f, 5)?;
                write!(f, "^{n}")
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
