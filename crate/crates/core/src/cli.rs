//! Command-line front end. [`run`] takes the argument list and output
//! streams and returns the process exit code, so it can be driven from
//! tests without spawning a process.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 violated mathematical
//! hypothesis (for example `L` not positive definite at the point), 3 a
//! `verify` run in which some check failed.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{Tolerances, DEFAULT_P_CAP, DEFAULT_SAMPLES, DEFAULT_SEED, SEED_ENV};
use crate::error::{Error, Result};
use crate::field::{canonical_f, parse_field, FieldSpec};
use crate::frames::{admissible_basis_at, BasisDump, ADMISSIBLE_TOL};
use crate::geometry::{LocalGeometry, Point, TensorDump};
use crate::invariant::{scan_alpha, Axis, Grid, ScanSummary};
use crate::model::{model_space, ModelDump};
use crate::spectral::{parse_rs, sample_constancy, SampleKind};
use crate::verify::{run_verify, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_CHECKS_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "curvhom", version, about = "Curvature tensors, admissible frames and homogeneity invariants of neutral signature hypersurface metrics")]
pub struct Cli {
    /// Largest accepted dimension p.
    #[arg(long, global = true, default_value_t = DEFAULT_P_CAP)]
    pub max_p: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dump g, L, R and nabla R at a point as JSON.
    Tensors {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        point: PointArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Evaluate alpha on a grid; CSV (or JSON) plus a summary and verdict.
    AlphaScan {
        #[command(flatten)]
        field: FieldArgs,
        /// Grid axis start:stop:count, one per x coordinate in order;
        /// missing axes are fixed at 0.
        #[arg(long, allow_hyphen_values = true)]
        grid: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Where to write the JSON summary in CSV mode (default: stderr).
        #[arg(long)]
        summary: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run the cross-check suite at a point; exits 0 iff every check passes.
    Verify {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        point: PointArg,
        /// Override every tolerance with this value.
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        seed: SeedArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Sample curvature operators and count distinct Jordan fingerprints.
    Spectral {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        point: PointArg,
        /// jacobi-spacelike, jacobi-timelike, szabo-spacelike,
        /// szabo-timelike, skew-spacelike, skew-timelike or higher-jacobi.
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Signature r,s of the sampled planes for higher-jacobi.
        #[arg(long)]
        rs: Option<String>,
        #[command(flatten)]
        seed: SeedArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Dump the model space (inner product and curvature) of dimension 2p.
    Model {
        #[arg(long)]
        p: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Dump the admissible basis at a point with its normalization residuals.
    Basis {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        point: PointArg,
        #[arg(long, default_value_t = ADMISSIBLE_TOL)]
        tol: f64,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).multiple(false)))]
pub struct FieldArgs {
    /// Half-dimension of the manifold.
    #[arg(long)]
    pub p: usize,
    /// Field f(x1..xp) as an expression.
    #[arg(long, allow_hyphen_values = true, group = "source")]
    pub field: Option<String>,
    /// Profile Theta(x1) of f = (x1^2 + ... + xp^2)/2 + Theta(x1).
    #[arg(long, allow_hyphen_values = true, group = "source")]
    pub theta: Option<String>,
}

#[derive(Debug, Args)]
pub struct PointArg {
    /// Comma-separated coordinates: 2p values (x then y), or p values with
    /// y = 0. Defaults to the origin.
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
}

#[derive(Debug, Args)]
pub struct SeedArg {
    #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A parsed field, plus the profile when given as `--theta`.
struct Source {
    field: FieldSpec,
    theta: Option<FieldSpec>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Math(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        if e.is_hypothesis_violation() {
            Failure::Math(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Io(e.to_string())
    }
}

type CmdResult = std::result::Result<i32, Failure>;

fn check_p(p: usize, max_p: usize) -> Result<()> {
    if p == 0 || p > max_p {
        return Err(Error::InvalidArgument(format!("p must be in 1..={max_p}, got {p} (raise the cap with --max-p)")));
    }
    Ok(())
}

fn load_source(args: &FieldArgs, max_p: usize) -> Result<Source> {
    check_p(args.p, max_p)?;
    match (&args.field, &args.theta) {
        (Some(src), None) => Ok(Source { field: parse_field(src, args.p)?, theta: None }),
        (None, Some(src)) => {
            let theta = parse_field(src, 1)?;
            Ok(Source { field: canonical_f(&theta, args.p)?, theta: Some(theta) })
        }
        _ => Err(Error::InvalidArgument("exactly one of --field and --theta is required".into())),
    }
}

fn parse_reals(src: &str) -> Result<Vec<f64>> {
    src.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::InvalidArgument(format!("'{t}' is not a finite real number")))
        })
        .collect()
}

fn load_point(arg: &PointArg, p: usize) -> Result<Point> {
    let Some(src) = &arg.point else { return Ok(Point::origin(p)) };
    let coords = parse_reals(src)?;
    if coords.len() == p {
        Ok(Point::from_x(&coords))
    } else if coords.len() == 2 * p {
        Point::from_coords(&coords)
    } else {
        Err(Error::InvalidArgument(format!("point needs {} (or {p}) coordinates, got {}", 2 * p, coords.len())))
    }
}

fn emit(out: &OutArg, text: &str, stdout: &mut dyn Write) -> std::io::Result<()> {
    match &out.out {
        Some(path) => fs::write(path, text),
        None => stdout.write_all(text.as_bytes()),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct ScanPoint<'a> {
    x: &'a [f64],
    alpha: f64,
}

#[derive(Serialize)]
struct ScanDocument<'a> {
    p: usize,
    field: String,
    grid: &'a Grid,
    points: Vec<ScanPoint<'a>>,
    summary: &'a ScanSummary,
}

fn dispatch(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let max_p = cli.max_p;
    match cli.command {
        Command::Tensors { field, point, out } => {
            let src = load_source(&field, max_p)?;
            let local = LocalGeometry::new(&src.field, &load_point(&point, field.p)?)?;
            emit(&out, &to_json(&TensorDump::new(&local)), stdout)?;
            Ok(EXIT_OK)
        }
        Command::AlphaScan { field, grid, format, summary, out } => {
            let src = load_source(&field, max_p)?;
            let axes = grid.iter().map(|g| g.parse::<Axis>()).collect::<Result<Vec<_>>>()?;
            let grid = Grid::new(axes, field.p)?;
            let scan = scan_alpha(&src.field, &grid)?;
            match format {
                Format::Csv => {
                    emit(&out, &scan.to_csv(), stdout)?;
                    let text = to_json(&scan.summary);
                    match summary {
                        Some(path) => fs::write(path, text)?,
                        None => stderr.write_all(text.as_bytes())?,
                    }
                }
                Format::Json => {
                    let doc = ScanDocument {
                        p: field.p,
                        field: src.field.to_string(),
                        grid: &scan.grid,
                        points: scan.values.iter().map(|(x, a)| ScanPoint { x, alpha: *a }).collect(),
                        summary: &scan.summary,
                    };
                    emit(&out, &to_json(&doc), stdout)?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Verify { field, point, tol, seed, out } => {
            let src = load_source(&field, max_p)?;
            let mut cfg = VerifyConfig::new(src.field, load_point(&point, field.p)?);
            cfg.theta = src.theta;
            cfg.seed = seed.seed;
            if let Some(t) = tol {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(Failure::Usage(format!("--tol must be positive, got {t}")));
                }
                cfg.tolerances = Tolerances::uniform(t);
            }
            let report = run_verify(&cfg)?;
            emit(&out, &to_json(&report), stdout)?;
            Ok(if report.passed { EXIT_OK } else { EXIT_CHECKS_FAILED })
        }
        Command::Spectral { field, point, kind, samples, rs, seed, out } => {
            let src = load_source(&field, max_p)?;
            let kind = match (kind.trim(), rs) {
                ("higher-jacobi", Some(rs)) => {
                    let (r, s) = parse_rs(&rs)?;
                    SampleKind::HigherJacobi { r, s }
                }
                ("higher-jacobi", None) => return Err(Failure::Usage("higher-jacobi needs --rs r,s".into())),
                (_, Some(_)) => return Err(Failure::Usage("--rs only applies to higher-jacobi".into())),
                (k, None) => k.parse::<SampleKind>()?,
            };
            if let SampleKind::HigherJacobi { r, s } = kind {
                if r + s == 0 || r > field.p || s > field.p {
                    return Err(Failure::Usage(format!("--rs {r},{s} is not a non-degenerate signature for p = {}", field.p)));
                }
            }
            if samples == 0 {
                return Err(Failure::Usage("--samples must be at least 1".into()));
            }
            let report = sample_constancy(&src.field, &load_point(&point, field.p)?, kind, samples, seed.seed)?;
            emit(&out, &to_json(&report), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Model { p, out } => {
            check_p(p, max_p)?;
            emit(&out, &to_json(&ModelDump::new(&model_space(p)?)), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Basis { field, point, tol, out } => {
            let src = load_source(&field, max_p)?;
            let local = LocalGeometry::new(&src.field, &load_point(&point, field.p)?)?;
            let basis = admissible_basis_at(&local)?;
            emit(&out, &to_json(&BasisDump::new(&local, &basis, tol)), stdout)?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli, stdout, stderr) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) | Err(Failure::Io(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Math(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_HYPOTHESIS
        }
    }
}
