//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::*;
use curvhom::field::{canonical_f, jet3, jet3_fd, parse_field, DEFAULT_FD_STEP};
use curvhom::frames::{admissible_basis_at, check_admissible, homogeneity_map_at, pullback_residuals, random_admissible};
use curvhom::geometry::{levi_civita_full, LocalGeometry, Point};
use curvhom::invariant::{alpha_at, alpha_basis_spread, alpha_closed_form, scan_alpha, Axis, Grid, Verdict};
use curvhom::model::{build_r_phi, check_act_symmetries, dim2_counterexample, recover_phi, BilForm};
use curvhom::spectral::{sample_constancy_at, SampleKind};
use curvhom::verify::jet_fd_residual;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn closed_form_agreement() -> Outcome {
    let theta = theta_sin();
    let mut worst = 0.0_f64;
    for p in 3..=5 {
        let f = canonical_f(&theta, p).unwrap();
        for k in 0..21 {
            let x1 = -1.0 + 0.1 * k as f64;
            let mut x = vec![0.0; p];
            x[0] = x1;
            let brute = alpha_at(&LocalGeometry::new(&f, &Point::from_x(&x)).unwrap()).map_err(|e| e.to_string())?;
            let closed = alpha_closed_form(&theta, x1, p).map_err(|e| e.to_string())?;
            worst = worst.max((brute - closed).abs() / closed.abs().max(f64::MIN_POSITIVE));
        }
    }
    let spot = alpha_at(&LocalGeometry::new(&canonical_f(&theta, 3).unwrap(), &Point::origin(3)).unwrap()).unwrap();
    ensure(
        worst < 1e-8 && (spot - 2.0).abs() < 1e-12,
        format!("max relative error {worst:.2e} over p=3..5 x 21 points; alpha(p=3, x1=0) = {spot}"),
    )
}

fn symmetric_case() -> Outcome {
    let f = canonical_f(&parse_field("0", 1).unwrap(), 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut nabla, mut alpha) = (0.0_f64, 0.0_f64);
    for _ in 0..10 {
        let local = LocalGeometry::new(&f, &random_point(&mut rng, 3)).unwrap();
        nabla = nabla.max(local.nabla.max_abs());
        alpha = alpha.max(alpha_at(&local).unwrap());
    }
    ensure(nabla < 1e-12 && alpha < 1e-20, format!("max |nabla R| = {nabla:e}, max alpha = {alpha:e} at 10 points"))
}

fn homogeneity_witness() -> Outcome {
    let p = 3;
    let f = canonical_f(&theta_sin(), p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut g, mut r, mut n) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..50 {
        let lp = LocalGeometry::new(&f, &random_point(&mut rng, p)).unwrap();
        let lq = LocalGeometry::new(&f, &random_point(&mut rng, p)).unwrap();
        let psi = homogeneity_map_at(&lp, &lq).map_err(|e| e.to_string())?;
        let res = pullback_residuals(&psi, &lp, &lq);
        g = g.max(res.metric);
        r = r.max(res.curvature);
        n = n.max(res.nabla);
    }
    ensure(
        g < 1e-10 && r < 1e-9 && n > 1e-3,
        format!("50 pairs: metric {g:.2e}, curvature {r:.2e}, largest nabla R residual {n:.3}"),
    )
}

fn non_homogeneity_verdict() -> Outcome {
    let grid = Grid::new(vec!["-1:1:21".parse::<Axis>().unwrap()], 3).unwrap();
    let sin = scan_alpha(&canonical_f(&theta_sin(), 3).unwrap(), &grid).unwrap();
    let flat = scan_alpha(&canonical_f(&parse_field("0", 1).unwrap(), 3).unwrap(), &grid).unwrap();
    ensure(
        sin.summary.verdict == Verdict::NotLocallyHomogeneous
            && sin.summary.spread > 1e-6
            && flat.summary.verdict == Verdict::Inconclusive,
        format!(
            "sin profile: spread {:.3} -> {}; flat profile: spread {:e} -> {}",
            sin.summary.spread, sin.summary.verdict, flat.summary.spread, flat.summary.verdict
        ),
    )
}

fn dual_route() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut diff, mut sym) = (0.0_f64, 0.0_f64);
    for k in 0..100 {
        let p = 1 + k % 4;
        let f = if k % 2 == 0 { random_field(&mut rng, p) } else { random_canonical(&mut rng, p).1 };
        let pt = random_point(&mut rng, p);
        let local = LocalGeometry::new(&f, &pt).unwrap();
        let lc = levi_civita_full(&f, &pt).unwrap();
        diff = diff.max(lc.riemann.max_abs_diff(&local.full_curvature()));
        sym = sym.max(check_act_symmetries(&local.curvature, 1e-10).max_violation());
        sym = sym.max(check_act_symmetries(&lc.riemann, 1e-10).max_violation());
    }
    ensure(diff < 1e-10 && sym < 1e-10, format!("100 draws: Gauss vs Levi-Civita {diff:.2e}, symmetries/Bianchi {sym:.2e}"))
}

fn admissible_normal_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut residual, mut spread) = (0.0_f64, 0.0_f64);
    let mut found = 0;
    let mut tries = 0;
    while found < 20 && tries < 1000 {
        tries += 1;
        let p = 2 + tries % 4;
        let f = if tries % 2 == 0 { random_field(&mut rng, p) } else { random_canonical(&mut rng, p).1 };
        let local = LocalGeometry::new(&f, &random_point(&mut rng, p)).unwrap();
        if local.require_positive_definite().is_err() {
            continue;
        }
        found += 1;
        let basis = admissible_basis_at(&local).unwrap();
        let rep = check_admissible(&basis, &local, 1e-9);
        residual = residual.max(rep.metric).max(rep.curvature).max(rep.y_slots);
        let mut bases = vec![basis.clone()];
        for s in 0..20 {
            bases.push(random_admissible(&basis, &local, 100 * found as u64 + s).unwrap());
        }
        spread = spread.max(alpha_basis_spread(&local, &bases));
    }
    ensure(
        found == 20 && residual < 1e-9 && spread < 1e-9,
        format!("{found} points: normal-form residual {residual:.2e}, alpha spread over 20 mixings {spread:.2e}"),
    )
}

fn phi_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0_f64;
    for r in 3..=6 {
        for _ in 0..100 {
            let phi = random_spd(&mut rng, r);
            let rec = recover_phi(&build_r_phi(&BilForm::new(phi.clone()).unwrap())).map_err(|e| format!("r={r}: {e}"))?;
            worst = worst.max((rec.phi.matrix() - &phi).amax());
        }
    }
    let (a, b) = dim2_counterexample();
    let same = build_r_phi(&a).max_abs_diff(&build_r_phi(&b));
    let distinct = (a.matrix() - b.matrix()).amax();
    ensure(
        worst < 1e-6 && same < 1e-15 && distinct > 0.1 && a.is_positive_definite() && b.is_positive_definite(),
        format!("400 forms, max recovery error {worst:.2e}; dim 2: |R_a - R_b| = {same:e}, |a - b| = {distinct}"),
    )
}

fn spectral_constancy() -> Outcome {
    let p = 3;
    let f = canonical_f(&theta_sin(), p).unwrap();
    let mut counts = Vec::new();
    for x in [[0.0, 0.0, 0.0], [0.7, -0.3, 0.2], [-1.2, 0.5, 0.9]] {
        let local = LocalGeometry::new(&f, &Point::from_x(&x)).unwrap();
        for kind in SampleKind::POSITIVE_KINDS {
            let rep = sample_constancy_at(&local, kind, 50, 1729).map_err(|e| e.to_string())?;
            counts.push((kind, rep.num_distinct_fingerprints));
        }
    }
    let bad: Vec<String> = counts.iter().filter(|(_, n)| *n != 1).map(|(k, n)| format!("{k}: {n}")).collect();
    ensure(
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} runs of 50 samples, each with exactly 1 fingerprint", counts.len())
        } else {
            format!("runs with several fingerprints: {}", bad.join(", "))
        },
    )
}

fn derivative_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0_f64;
    let mut round_trip_failures = 0;
    for k in 0..100 {
        let p = 1 + k % 4;
        let f = random_field(&mut rng, p);
        let x = random_point(&mut rng, p).x;
        let exact = jet3(&f, &x).unwrap();
        let fd = jet3_fd(&f, &x, DEFAULT_FD_STEP).unwrap();
        worst = worst.max(jet_fd_residual(&exact, &fd));
        let canon = canonical_f(&random_theta(&mut rng), p).unwrap();
        for g in [&f, &canon] {
            let printed = g.to_string();
            match parse_field(&printed, p) {
                Ok(h) if &h == g && h.to_string() == printed => {}
                _ => round_trip_failures += 1,
            }
        }
    }
    ensure(
        worst < 1e-5 && round_trip_failures == 0,
        format!("100 draws: max relative jet deviation {worst:.2e}; {round_trip_failures} parser round-trip failures in 200"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("closed-form alpha agreement", closed_form_agreement),
        ("symmetric case", symmetric_case),
        ("curvature homogeneity witness", homogeneity_witness),
        ("non-homogeneity verdict", non_homogeneity_verdict),
        ("dual-route curvature", dual_route),
        ("admissible-basis normal form", admissible_normal_form),
        ("form recovery round trip", phi_round_trip),
        ("spectral constancy (sampled)", spectral_constancy),
        ("derivative oracle", derivative_oracle),
    ];
    let start = Instant::now();
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} [{}] {name}: {detail} ({:.2}s)", k + 1, t.elapsed().as_secs_f64());
    }
    println!(
        "acceptance: {}/{} criteria passed in {:.2}s",
        criteria.len() - failures,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
