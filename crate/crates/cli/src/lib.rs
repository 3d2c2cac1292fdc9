//! The `commute-calc` command line, as a library so tests can drive it in-process.
//!
//! Exit codes: 0 success, 2 domain or validation error (JSON object on stderr),
//! 64 usage error, 65 malformed input file, 74 output file could not be written.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use commute_core::applications::{check_convex_segment, check_local_monotone, Certificate, MonotoneOptions, Verdict};
use commute_core::contour::DEFAULT_NODES;
use commute_core::curve::{default_step, Curve};
use commute_core::derivative::{derivative_along_curve, derivative_entrywise, derivative_formula, fd_derivative_oracle};
use commute_core::divdiff::{contour_dd_auto, divided_difference};
use commute_core::expr::{parse_expr, parse_function};
use commute_core::higher::{contour_higher_derivative, default_contour, fd_higher_derivative, higher_derivative_from_jet, CurveJet};
use commute_core::io::{from_json, to_json, DiagJson, MatrixJson, TupleJson};
use commute_core::matfun::{self, eval_contour, eval_matfun, eval_poly_direct};
use commute_core::spectral_flow::{leading_eigenvector_angle, rellich_fixture, track_eigenvalues, uniform_grid};
use commute_core::tangency::{tangency_check, witness_curve};
use commute_core::types::max_entry_norm;
use commute_core::{joint_diagonalize, validate_commuting, CommutingTuple, Error, Interval, ScalarFunction, SelfAdjointTuple, Settings};

pub mod curves;

pub use curves::CurveSpec;

pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_MALFORMED: i32 = 65;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Parser)]
#[command(name = "commute-calc", version, about = "Matrix functions of commuting Hermitian tuples")]
struct Cli {
    /// Seed for every random draw; runs with equal seeds produce equal bytes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Domain of x as lo:hi (either end may be inf or -inf).
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_interval)]
    dom_x: Option<Interval>,
    /// Domain of y as lo:hi.
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_interval)]
    dom_y: Option<Interval>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Joint diagonalization of a commuting tuple.
    Diag {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// Evaluate F(S).
    Eval {
        #[arg(long)]
        f: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Spectral)]
        method: Method,
        #[command(flatten)]
        out: Out,
    },
    /// Decide whether a direction is tangent to the commuting variety.
    Tangent {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        dir: PathBuf,
        /// Also write samples of the witness curve to this file.
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[command(flatten)]
        out: Out,
    },
    /// First derivative of F at a base tuple in a tangent direction.
    Dfirst {
        #[arg(long)]
        f: String,
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        dir: PathBuf,
        /// Compare against a central difference along the witness curve with this step.
        #[arg(long)]
        check_fd: Option<f64>,
        #[command(flatten)]
        out: Out,
    },
    /// First derivative of F along a registered curve.
    Dcurve {
        #[arg(long)]
        f: String,
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[command(flatten)]
        out: Out,
    },
    /// Divided difference f^{[k, j-k]}(x_0..x_k; y_0..y_{j-k}).
    Dd {
        #[arg(long)]
        f: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        j: usize,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_list)]
        x: NodeList,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_list)]
        y: NodeList,
        #[command(flatten)]
        out: Out,
    },
    /// Higher derivative of F along a curve of pairs.
    Dhigh {
        #[arg(long)]
        f: String,
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, default_value_t = 2)]
        order: u32,
        #[arg(long, value_enum)]
        check: Option<Check>,
        /// Step of the finite-difference check.
        #[arg(long)]
        h: Option<f64>,
        #[command(flatten)]
        out: Out,
    },
    /// Track joint eigenvalues along a curve and write CSV.
    Track {
        #[arg(long)]
        curve: PathBuf,
        /// lo:hi:count
        #[arg(long, allow_hyphen_values = true, value_parser = parse_grid)]
        grid: Grid,
        #[command(flatten)]
        out: Out,
    },
    /// Built-in demonstrations.
    Demo {
        #[command(subcommand)]
        which: Demo,
    },
    /// Census of local matrix monotonicity.
    Monotone {
        #[arg(long)]
        f: String,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Matrix convexity along commuting segments.
    Convex {
        #[arg(long)]
        f: String,
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long, default_value_t = commute_core::applications::DEFAULT_CONVEX_GRID)]
        grid: usize,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Debug, Subcommand)]
enum Demo {
    /// Eigenvalues and top-eigenvector angle of the smooth 2x2 curve without continuous eigenvectors.
    Rellich {
        #[arg(long, allow_hyphen_values = true, value_parser = parse_grid, default_value = "-1:1:401")]
        grid: Grid,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Debug, Args)]
struct Out {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Spectral,
    Poly,
    Contour,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum Check {
    Contour,
    Fd,
    Both,
}

#[derive(Debug, Clone)]
struct Grid(f64, f64, usize);

#[derive(Debug, Clone)]
struct NodeList(Vec<f64>);

fn parse_interval(s: &str) -> std::result::Result<Interval, String> {
    let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad lower end {lo:?}"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad upper end {hi:?}"))?;
    Interval::new(lo, hi).map_err(|e| e.to_string())
}

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err("expected lo:hi:count".into());
    }
    let lo = parts[0].trim().parse().map_err(|_| format!("bad lo {:?}", parts[0]))?;
    let hi = parts[1].trim().parse().map_err(|_| format!("bad hi {:?}", parts[1]))?;
    let count = parts[2].trim().parse().map_err(|_| format!("bad count {:?}", parts[2]))?;
    Ok(Grid(lo, hi, count))
}

fn parse_list(s: &str) -> std::result::Result<NodeList, String> {
    s.split(',').map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad number {p:?}"))).collect::<Result<_, _>>().map(NodeList)
}

/// Why a command failed, and therefore which exit code it gets.
#[derive(Debug)]
enum Failure {
    Domain(Error),
    Malformed(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: &'a str,
    message: String,
}

/// Runs one invocation. `args` includes the program name.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(Failure::Domain(e)) => {
            let _ = stderr.write_all(to_json(&ErrorJson { error: e.kind(), message: e.to_string() }).as_bytes());
            EXIT_DOMAIN
        }
        Err(Failure::Malformed(m)) => {
            let _ = stderr.write_all(to_json(&ErrorJson { error: "MalformedInput", message: m }).as_bytes());
            EXIT_MALFORMED
        }
        Err(Failure::Io(m)) => {
            let _ = stderr.write_all(to_json(&ErrorJson { error: "OutputError", message: m }).as_bytes());
            EXIT_IO
        }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Outcome<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Malformed(format!("{}: {e}", path.display())))?;
    from_json(&text).map_err(|e| Failure::Malformed(format!("{}: {e}", path.display())))
}

fn read_tuple(path: &Path) -> Outcome<SelfAdjointTuple> {
    let t: TupleJson = read_json(path)?;
    t.to_tuple().map_err(|e| Failure::Malformed(format!("{}: {e}", path.display())))
}

fn read_commuting(path: &Path, settings: &Settings) -> Outcome<CommutingTuple> {
    Ok(validate_commuting(&read_tuple(path)?, &settings.tol)?)
}

fn read_curve(path: &Path, settings: &Settings) -> Outcome<Box<dyn Curve>> {
    let spec: CurveSpec = read_json(path)?;
    spec.build(settings).map_err(|e| match e {
        Error::InvalidInput(m) => Failure::Malformed(format!("{}: {m}", path.display())),
        other => Failure::Domain(other),
    })
}

fn emit(out: &Out, bytes: &[u8], stdout: &mut dyn Write) -> Outcome<()> {
    match &out.out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => stdout.write_all(bytes).map_err(|e| Failure::Io(e.to_string())),
    }
}

fn emit_json<T: Serialize>(out: &Out, value: &T, stdout: &mut dyn Write) -> Outcome<()> {
    emit(out, to_json(value).as_bytes(), stdout)
}

fn csv_bytes(header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Outcome<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    w.into_inner().map_err(|e| Failure::Io(e.to_string()))
}

/// Shortest text that parses back to the same `f64`, with an exponent for very small or large values.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e15).contains(&a) || !a.is_finite() {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn function(cli: &Cli, text: &str, arity: usize) -> Outcome<ScalarFunction> {
    let domains = [cli.dom_x, cli.dom_y];
    Ok(parse_function(text, arity, &domains[..arity.min(2)])?)
}

#[derive(Serialize, Deserialize)]
struct TangencyJson {
    tangent: bool,
    commutation_residual: f64,
    block_residual: f64,
    q_spread: f64,
    scale: f64,
}

#[derive(Serialize, Deserialize)]
struct WitnessSamplesJson {
    t: Vec<f64>,
    samples: Vec<TupleJson>,
    /// Largest normalized commutator over the samples.
    max_commutator: f64,
}

#[derive(Serialize, Deserialize)]
struct FirstDerivativeJson {
    derivative: MatrixJson,
    /// Max-entry distance between the closed form and the entrywise form.
    entrywise_discrepancy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    fd_step: Option<f64>,
    /// Max-entry distance to a central difference along the witness curve.
    #[serde(skip_serializing_if = "Option::is_none")]
    fd_discrepancy: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct CurveDerivativeJson {
    t: f64,
    derivative: MatrixJson,
}

#[derive(Serialize, Deserialize)]
struct DividedDifferenceJson {
    k: usize,
    j: usize,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    contour: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct HigherDerivativeJson {
    t: f64,
    order: u32,
    derivative: MatrixJson,
    raw_asymmetry: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    contour_discrepancy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fd_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fd_discrepancy: Option<f64>,
}

/// One commuting segment for `convex`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairJson {
    pub a: TupleJson,
    pub b: TupleJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairsJson {
    pub pairs: Vec<PairJson>,
}

#[derive(Serialize, Deserialize)]
struct ConvexJson {
    verdict: Verdict,
    certificates: Vec<Certificate>,
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Outcome<()> {
    let settings = Settings::with_seed(cli.seed);
    match &cli.command {
        Command::Diag { input, out } => {
            let s = read_commuting(input, &settings)?;
            let jd = joint_diagonalize(&s, &settings)?;
            emit_json(out, &DiagJson::from_diag(&jd), stdout)
        }
        Command::Eval { f, input, method, out } => {
            let s = read_tuple(input)?;
            let func = function(cli, f, s.d())?;
            let value = match method {
                Method::Spectral => eval_matfun(&func, &validate_commuting(&s, &settings.tol)?, &settings)?,
                Method::Poly => {
                    let p = parse_expr(f)?.to_polynomial(s.d()).ok_or_else(|| Error::InvalidInput(format!("{f:?} is not a polynomial")))?;
                    eval_poly_direct(&p, &s)?
                }
                Method::Contour => {
                    let s = validate_commuting(&s, &settings.tol)?;
                    let spec = matfun::default_contour(&func, s.as_tuple(), DEFAULT_NODES)?;
                    eval_contour(&func, s.as_tuple(), &spec)?
                }
            };
            emit_json(out, &MatrixJson::from_matrix(value.matrix()), stdout)
        }
        Command::Tangent { base, dir, witness, samples, out } => {
            let s = read_commuting(base, &settings)?;
            let delta = read_tuple(dir)?;
            let rep = tangency_check(&s, &delta, &settings)?;
            let summary = TangencyJson {
                tangent: rep.tangent,
                commutation_residual: rep.commutation_residual,
                block_residual: rep.block_residual,
                q_spread: rep.q_spread,
                scale: rep.scale,
            };
            emit_json(out, &summary, stdout)?;
            if let Some(path) = witness {
                let td = rep.data.ok_or(Error::NotTangent { commutation: rep.commutation_residual, block: rep.block_residual })?;
                let curve = witness_curve(&td)?;
                let ts = if *samples == 1 { vec![0.0] } else { uniform_grid(-1.0, 1.0, *samples)? };
                let mut max_commutator = 0.0f64;
                let mut tuples = Vec::with_capacity(ts.len());
                for &t in &ts {
                    let v = curve.value(t);
                    for r in 0..v.d() {
                        for q in r + 1..v.d() {
                            let c = commute_core::types::commutator(v.component(r).matrix(), v.component(q).matrix());
                            let scale = (1.0 + v.component(r).max_entry_norm()) * (1.0 + v.component(q).max_entry_norm());
                            max_commutator = max_commutator.max(max_entry_norm(&c) / scale);
                        }
                    }
                    tuples.push(TupleJson::from_tuple(&v));
                }
                let body = WitnessSamplesJson { t: ts, samples: tuples, max_commutator };
                emit_json(&Out { out: Some(path.clone()) }, &body, stdout)?;
            }
            Ok(())
        }
        Command::Dfirst { f, base, dir, check_fd, out } => {
            let s = read_commuting(base, &settings)?;
            let delta = read_tuple(dir)?;
            s.check_shape(&delta)?;
            let func = function(cli, f, s.d())?;
            let rep = tangency_check(&s, &delta, &settings)?;
            let td = rep.data.ok_or(Error::NotTangent { commutation: rep.commutation_residual, block: rep.block_residual })?;
            let a = derivative_formula(&td, &func)?;
            let b = derivative_entrywise(&td, &func)?;
            let fd_discrepancy = match check_fd {
                Some(h) => {
                    if !(*h > 0.0 && h.is_finite()) {
                        return Err(Error::InvalidInput(format!("finite-difference step must be positive, got {h}")).into());
                    }
                    let curve = witness_curve(&td)?;
                    let fd = fd_derivative_oracle(&func, &curve, 0.0, *h, &settings)?;
                    Some(max_entry_norm(&(a.matrix() - fd.matrix())))
                }
                None => None,
            };
            let body = FirstDerivativeJson {
                derivative: MatrixJson::from_matrix(a.matrix()),
                entrywise_discrepancy: max_entry_norm(&(a.matrix() - b.matrix())),
                fd_step: *check_fd,
                fd_discrepancy,
            };
            emit_json(out, &body, stdout)
        }
        Command::Dcurve { f, curve, t, out } => {
            let c = read_curve(curve, &settings)?;
            let func = function(cli, f, c.d())?;
            let m = derivative_along_curve(&func, c.as_ref(), *t, &settings)?;
            emit_json(out, &CurveDerivativeJson { t: *t, derivative: MatrixJson::from_matrix(m.matrix()) }, stdout)
        }
        Command::Dd { f, k, j, x, y, out } => {
            let func = function(cli, f, 2)?;
            let value = divided_difference(&func, *k, *j, &x.0, &y.0)?;
            let contour = if func.has_complex_extension() { Some(contour_dd_auto(&func, *k, *j, &x.0, &y.0)?) } else { None };
            emit_json(out, &DividedDifferenceJson { k: *k, j: *j, value, contour }, stdout)
        }
        Command::Dhigh { f, curve, t, order, check, h, out } => {
            let c = read_curve(curve, &settings)?;
            let func = function(cli, f, c.d())?;
            let jet = CurveJet::from_curve(c.as_ref(), *t, *order, &settings)?;
            let hd = higher_derivative_from_jet(&func, &jet, *order, &settings)?;
            let wants = |k: Check| check.is_some_and(|c| c == k || c == Check::Both);
            let contour_discrepancy = if wants(Check::Contour) {
                let spec = default_contour(&func, &jet)?;
                let m = contour_higher_derivative(&func, &jet, *order, &spec)?;
                Some(max_entry_norm(&(hd.matrix.matrix() - m.matrix())))
            } else {
                None
            };
            let (fd_step, fd_discrepancy) = if wants(Check::Fd) {
                let step = h.unwrap_or_else(|| default_step(*order, *t));
                let m = fd_higher_derivative(&func, c.as_ref(), *t, *order, step, &settings)?;
                (Some(step), Some(max_entry_norm(&(hd.matrix.matrix() - m.matrix()))))
            } else {
                (None, None)
            };
            let body = HigherDerivativeJson {
                t: *t,
                order: *order,
                derivative: MatrixJson::from_matrix(hd.matrix.matrix()),
                raw_asymmetry: hd.raw_asymmetry,
                contour_discrepancy,
                fd_step,
                fd_discrepancy,
            };
            emit_json(out, &body, stdout)
        }
        Command::Track { curve, grid, out } => {
            let c = read_curve(curve, &settings)?;
            let ts = uniform_grid(grid.0, grid.1, grid.2)?;
            let bundle = track_eigenvalues(c.as_ref(), &ts, &settings)?;
            let mut header = vec!["t".to_string(), "path_index".to_string()];
            header.extend((1..=c.d()).map(|r| format!("x{r}")));
            let rows = ts.iter().enumerate().flat_map(|(k, t)| {
                bundle.paths.iter().enumerate().map(move |(p, path)| {
                    let mut row = vec![format_number(*t), p.to_string()];
                    row.extend(path[k].iter().map(|v| format_number(*v)));
                    row
                })
            });
            emit(out, &csv_bytes(&header, rows)?, stdout)
        }
        Command::Demo { which: Demo::Rellich { grid, out } } => {
            let ts = uniform_grid(grid.0, grid.1, grid.2)?;
            let header: Vec<String> = ["t", "lambda1", "lambda2", "angle"].iter().map(|s| s.to_string()).collect();
            let rows = ts.iter().map(|&t| {
                let m = rellich_fixture(t);
                let ev = m.eigenvalues();
                vec![format_number(t), format_number(ev[0]), format_number(ev[1]), format_number(leading_eigenvector_angle(&m))]
            });
            emit(out, &csv_bytes(&header, rows)?, stdout)
        }
        Command::Monotone { f, n, d, samples, out } => {
            let func = function(cli, f, *d)?;
            let cert = check_local_monotone(&func, &MonotoneOptions { n: *n, samples: *samples, seed: cli.seed }, &settings)?;
            emit_json(out, &cert, stdout)
        }
        Command::Convex { f, pairs, grid, out } => {
            let list: PairsJson = read_json(pairs)?;
            let mut certificates = Vec::with_capacity(list.pairs.len());
            let mut func: Option<ScalarFunction> = None;
            for (i, p) in list.pairs.iter().enumerate() {
                let bad = |e: Error| Failure::Malformed(format!("{}: pair {i}: {e}", pairs.display()));
                let (a, b) = (p.a.to_tuple().map_err(bad)?, p.b.to_tuple().map_err(bad)?);
                let func = match &func {
                    Some(g) => g,
                    None => func.insert(function(cli, f, a.d())?),
                };
                let a = validate_commuting(&a, &settings.tol)?;
                let b = validate_commuting(&b, &settings.tol)?;
                certificates.push(check_convex_segment(func, &a, &b, *grid, &settings)?);
            }
            let verdict = if certificates.iter().any(|c| c.verdict == Verdict::Refuted) {
                Verdict::Refuted
            } else if certificates.iter().all(|c| c.verdict == Verdict::CertifiedPositive) && !certificates.is_empty() {
                Verdict::CertifiedPositive
            } else {
                Verdict::Inconclusive
            };
            emit_json(out, &ConvexJson { verdict, certificates }, stdout)
        }
    }
}
