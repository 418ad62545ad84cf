#![allow(dead_code)]

use curvhom::{canonical_f, parse_field, FieldSpec, Point};
use nalgebra::DMatrix;
use rand::Rng;

fn signed(c: f64) -> String {
    if c < 0.0 {
        format!(" - {:.6}", -c)
    } else {
        format!(" + {c:.6}")
    }
}

/// A smooth field in `x1..xp` mixing every supported operation: a
/// diagonal quadratic, cross and cubic monomials, and sin, cos, exp, log
/// and reciprocal terms. Coefficients are moderate so that derivatives up
/// to order three stay of order one on `[-1, 1]^p`.
pub fn random_field_source<R: Rng>(rng: &mut R, p: usize) -> String {
    let mut s = String::new();
    for i in 1..=p {
        if i > 1 {
            s.push_str(" + ");
        }
        s.push_str(&format!("{:.6}*x{i}^2", rng.gen_range(0.3..1.5)));
    }
    for _ in 0..p {
        let (i, j) = (rng.gen_range(1..=p), rng.gen_range(1..=p));
        s.push_str(&format!("{}*x{i}*x{j}", signed(rng.gen_range(-0.2..0.2))));
    }
    let (i, j, k) = (rng.gen_range(1..=p), rng.gen_range(1..=p), rng.gen_range(1..=p));
    s.push_str(&format!("{}*x{i}*x{j}*x{k}", signed(rng.gen_range(-0.3..0.3))));
    let (i, j) = (rng.gen_range(1..=p), rng.gen_range(1..=p));
    s.push_str(&format!(
        "{}*sin({:.6}*x{i} - {:.6}*x{j} + {:.6})",
        signed(rng.gen_range(-0.5..0.5)),
        rng.gen_range(0.2..1.2),
        rng.gen_range(0.2..1.2),
        rng.gen_range(-1.0..1.0)
    ));
    let i = rng.gen_range(1..=p);
    s.push_str(&format!("{}*cos(x{i})^2", signed(rng.gen_range(-0.3..0.3))));
    let i = rng.gen_range(1..=p);
    s.push_str(&format!("{}*exp({:.6}*x{i})", signed(rng.gen_range(-0.3..0.3)), rng.gen_range(-0.5..0.5)));
    let i = rng.gen_range(1..=p);
    s.push_str(&format!("{}*log(3 + x{i})", signed(rng.gen_range(-0.5..0.5))));
    let i = rng.gen_range(1..=p);
    s.push_str(&format!("{}/(2 + x{i}^2)", signed(rng.gen_range(-0.5..0.5))));
    s
}

pub fn random_field<R: Rng>(rng: &mut R, p: usize) -> FieldSpec {
    let src = random_field_source(rng, p);
    parse_field(&src, p).unwrap_or_else(|e| panic!("generated field '{src}' failed to parse: {e}"))
}

/// A cubic polynomial with random coefficients.
pub fn random_cubic<R: Rng>(rng: &mut R, p: usize) -> FieldSpec {
    let mut s = format!("{:.6}", rng.gen_range(-1.0..1.0));
    for i in 1..=p {
        s.push_str(&format!("{}*x{i}", signed(rng.gen_range(-1.0..1.0))));
        for j in i..=p {
            s.push_str(&format!("{}*x{i}*x{j}", signed(rng.gen_range(-1.0..1.0))));
            for k in j..=p {
                s.push_str(&format!("{}*x{i}*x{j}*x{k}", signed(rng.gen_range(-1.0..1.0))));
            }
        }
    }
    parse_field(&s, p).unwrap()
}

/// `Θ = a sin(b x1 + c) + d x1³` with `|Θ''| < 1` on `[-1, 1]`.
pub fn random_theta<R: Rng>(rng: &mut R) -> FieldSpec {
    let src = format!(
        "{:.6}*sin({:.6}*x1 + {:.6}){}*x1^3",
        rng.gen_range(-0.4..0.4),
        rng.gen_range(0.5..1.2),
        rng.gen_range(-1.0..1.0),
        signed(rng.gen_range(-0.05..0.05))
    );
    parse_field(&src, 1).unwrap()
}

pub fn random_canonical<R: Rng>(rng: &mut R, p: usize) -> (FieldSpec, FieldSpec) {
    let theta = random_theta(rng);
    let f = canonical_f(&theta, p).unwrap();
    (theta, f)
}

pub fn random_point<R: Rng>(rng: &mut R, p: usize) -> Point {
    let x = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let y = (0..p).map(|_| rng.gen_range(-2.0..2.0)).collect();
    Point::new(x, y).unwrap()
}

/// `A Aᵀ + (r/2) I` with uniform entries in `A`; positive definite and well conditioned.
pub fn random_spd<R: Rng>(rng: &mut R, r: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(r, r, |_, _| rng.gen_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(r, r) * (0.5 * r as f64)
}

pub fn theta_sin() -> FieldSpec {
    parse_field("0.5*sin(x1)", 1).unwrap()
}
