//! Command-line front end for the `germlab` binary.
//!
//! Every command writes one JSON document (or CSV rows where offered) to
//! stdout or `--out`. Failures print `{schema, code, message}` to stderr and
//! exit with 2 (unknown command), 3 (invalid configuration) or 4 (numeric
//! failure).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use rug::{Complex, Integer};
use serde::Serialize;
use serde_json::{json, Value};

use crate::cf::{
    self, build_quotients_saturating, evaluate_condition, ConditionKind, ConditionParams, ContinuedFraction, Magnitude,
};
use crate::divisors::{MultiplierSpec, RotationDoc};
use crate::error::{Error, Result};
use crate::linearizer::{
    conjugacy_defect, estimate_gevrey_exponent, gevrey_fit, solve_schroder, Direction, GermSpec, SolveOptions,
};
use crate::numeric::{self, Precision};
use crate::series::{FormalSeries, SeriesDoc, SCHEMA};
use crate::stability::{
    self, escape_scan, iterate_mu, orbit, perez_marco_horizon, radius_grid, stability_horizon_from_measured,
    stability_iteration_params, IterationParams, OrbitOptions, ScanOptions,
};
use crate::truncator::{
    exact_remainder_order, fit_envelope, optimal_truncation, remainder_series, remainder_sup, truncation_sweep,
};

pub const EXIT_UNKNOWN_COMMAND: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "germlab",
    version,
    about = "Formal linearization, small divisors and effective stability of holomorphic germs",
    after_help = "Every JSON document carries {\"schema\": \"germlab/1\"}. Errors go to stderr as \
                  {schema, code, message}; exit 2 = unknown command, 3 = invalid configuration, 4 = numeric failure."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve the conjugacy equation to a given order and fit a Gevrey envelope.
    Linearize(LinearizeArgs),
    /// Small-divisor function Omega(p) over a range of p.
    #[command(after_help = "CSV columns: p,omega,argmin_alpha,argmin_j (argmin_alpha joined by ';').")]
    Divisors(DivisorsArgs),
    /// Bruno-type arithmetic diagnostics of a continued fraction.
    #[command(after_help = "CSV columns: k,value (one row per sequence term).")]
    Bruno(BrunoArgs),
    /// Sup norms of the truncation remainder H_N o F - R_A o H_N.
    Remainder(RemainderArgs),
    /// Optimal truncation order for a remainder envelope.
    TruncateOpt(TruncateOptArgs),
    /// Iterate the germ from one initial point until escape.
    #[command(after_help = "CSV columns: m,re_0,im_0,...,re_{n-1},im_{n-1} (strided trajectory).")]
    Orbit(OrbitArgs),
    /// Median escape time over a grid of radii and phases.
    #[command(after_help = "CSV columns: r,T_median,censored.")]
    Scan(ScanArgs),
    /// Predicted stability horizons.
    Horizon(HorizonArgs),
    /// Fixed, deterministic experiment suite emitted as one JSON report.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Write output to this file instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct PrecisionArg {
    /// Working precision in bits: 53, 128, 256 or 512.
    #[arg(long, value_name = "BITS")]
    pub precision: Option<u32>,
}

#[derive(Args, Debug, Clone)]
pub struct LinearizeArgs {
    /// Germ file (JSON).
    #[arg(long, value_name = "FILE")]
    pub germ: PathBuf,
    /// Truncation order N (at least 2).
    #[arg(long, default_value_t = 10)]
    pub order: u32,
    /// direct: F o H = H o R_A; inverse: H o F = R_A o H.
    #[arg(long, default_value = "direct")]
    pub direction: String,
    #[command(flatten)]
    pub precision: PrecisionArg,
    /// Gevrey exponent used for the envelope fit.
    #[arg(long, default_value_t = 0.0)]
    pub s: f64,
    /// Fail instead of doubling precision on tiny divisors.
    #[arg(long)]
    pub no_escalate: bool,
    /// Where to store the series for later commands (default: <germ>.series.json).
    #[arg(long, value_name = "PATH")]
    pub series_out: Option<PathBuf>,
    /// Do not write the series file.
    #[arg(long)]
    pub no_series_file: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct DivisorsArgs {
    /// Germ file supplying the multipliers.
    #[arg(long, value_name = "FILE", conflicts_with = "rotations")]
    pub germ: Option<PathBuf>,
    /// Comma-separated rotation numbers; entries may be decimals, `golden` or `sqrt2`.
    #[arg(long, value_name = "LIST")]
    pub rotations: Option<String>,
    #[arg(long, default_value_t = 3)]
    pub p_min: u32,
    #[arg(long, default_value_t = 12)]
    pub p_max: u32,
    #[command(flatten)]
    pub precision: PrecisionArg,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Default)]
pub struct QuotientSource {
    /// Inline partial quotients a_0,a_1,... (arbitrary-size integers).
    #[arg(long, value_name = "LIST")]
    pub quotients: Option<String>,
    /// Golden mean [0;1,1,1,...].
    #[arg(long)]
    pub golden: bool,
    /// sqrt(2) - 1 = [0;2,2,2,...].
    #[arg(long)]
    pub sqrt2: bool,
    /// Factorial-growth generator, e.g. `s=1` or `s=0.5,q1=2`.
    #[arg(long, value_name = "SPEC")]
    pub factorial_growth: Option<String>,
    /// Number of partial quotients after a_0 for presets and generators.
    #[arg(long)]
    pub depth: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct BrunoArgs {
    #[command(flatten)]
    pub source: QuotientSource,
    /// Condition: btilde_s, bprime_s, bgammasigma or perez_marco.
    #[arg(long, default_value = "bprime_s")]
    pub kind: String,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    /// Inclusive index window `lo:hi`.
    #[arg(long, value_name = "LO:HI")]
    pub window: Option<String>,
    #[command(flatten)]
    pub precision: PrecisionArg,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct RemainderArgs {
    #[arg(long, value_name = "FILE")]
    pub germ: PathBuf,
    /// Truncation order N.
    #[arg(long)]
    pub order: u32,
    /// Probe radius, strictly below 0.5.
    #[arg(long)]
    pub radius: f64,
    /// Torus grid size.
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    /// Linearization to truncate (default: <germ>.series.json if present, else recomputed).
    #[arg(long, value_name = "FILE")]
    pub series: Option<PathBuf>,
    #[command(flatten)]
    pub precision: PrecisionArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct TruncateOptArgs {
    #[arg(long)]
    pub rstar: f64,
    /// |z|.
    #[arg(long)]
    pub z: f64,
    #[arg(long)]
    pub s: f64,
    #[arg(long = "B4", value_name = "B4")]
    pub b4: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct OrbitArgs {
    #[arg(long, value_name = "FILE")]
    pub germ: PathBuf,
    /// Initial point, one complex number per component: `a+bi[,c+di]`.
    #[arg(long, allow_hyphen_values = true)]
    pub z0: String,
    #[arg(long, default_value_t = 10_000_000)]
    pub max_iter: u64,
    /// Escape radius.
    #[arg(long, default_value_t = 0.5)]
    pub escape: f64,
    /// Keep every k-th trajectory point (0 = none).
    #[arg(long, default_value_t = 0)]
    pub stride: u64,
    #[command(flatten)]
    pub precision: PrecisionArg,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct ScanArgs {
    #[arg(long, value_name = "FILE")]
    pub germ: PathBuf,
    /// Radius grid `r1:r2:steps`.
    #[arg(long, value_name = "R1:R2:STEPS")]
    pub radii: String,
    /// Exponent in the regressor (1/r)^{1/s}.
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub cells: usize,
    /// Initial phases per radius.
    #[arg(long, default_value_t = 8)]
    pub phases: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_iter: u64,
    #[arg(long, default_value_t = 0.5)]
    pub escape: f64,
    #[command(flatten)]
    pub precision: PrecisionArg,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum HorizonMode {
    /// K* from measured constants A*, B*, r*, r**, J2.
    Stability,
    /// Radius/horizon pairs from the continued fraction.
    Pm,
    /// Iteration-lemma horizon K and the mu sequence.
    Lemma,
}

#[derive(Args, Debug, Clone)]
pub struct HorizonArgs {
    #[arg(long, value_enum)]
    pub mode: HorizonMode,
    /// stability: A*.
    #[arg(long)]
    pub a_star: Option<f64>,
    /// stability: B*.
    #[arg(long)]
    pub b_star: Option<f64>,
    /// stability: r*.
    #[arg(long)]
    pub rstar: Option<f64>,
    /// stability: r** (default r*).
    #[arg(long)]
    pub r2: Option<f64>,
    /// stability: J2, the confinement factor C**.
    #[arg(long, default_value_t = 1.0)]
    pub j2: f64,
    /// stability: Gevrey exponent.
    #[arg(long)]
    pub s: Option<f64>,
    /// stability: |z0|.
    #[arg(long)]
    pub z: Option<f64>,
    #[command(flatten)]
    pub source: QuotientSource,
    /// pm: first index k.
    #[arg(long, default_value_t = 1)]
    pub k_min: usize,
    /// pm: last index k (default: depth).
    #[arg(long)]
    pub k_max: Option<usize>,
    /// pm: C1.
    #[arg(long, default_value_t = 1.0)]
    pub c1: f64,
    /// pm: C2.
    #[arg(long, default_value_t = 1.0)]
    pub c2: f64,
    /// lemma: R.
    #[arg(long = "R", value_name = "R")]
    pub big_r: Option<f64>,
    /// lemma: a.
    #[arg(long)]
    pub a: Option<f64>,
    /// lemma: b.
    #[arg(long)]
    pub b: Option<f64>,
    /// lemma: alpha.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// lemma: number of steps (default K).
    #[arg(long)]
    pub steps: Option<usize>,
    #[command(flatten)]
    pub precision: PrecisionArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct ReportArgs {
    /// Worker threads for the escape scan (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub cells: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Help for the top level and every subcommand, in a fixed order.
pub fn full_help() -> String {
    let mut cmd = Cli::command();
    let mut out = cmd.render_long_help().to_string();
    for sub in cmd.get_subcommands_mut() {
        out.push_str("\n\n=== germlab ");
        out.push_str(sub.get_name());
        out.push_str(" ===\n");
        out.push_str(&sub.render_long_help().to_string());
    }
    out
}

fn error_object(code: &str, message: &str) -> String {
    json!({"schema": SCHEMA, "code": code, "message": message.trim_end()}).to_string()
}

/// Parse `argv` and run one command, writing to the given streams.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    use clap::error::ErrorKind;
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let (code, exit) = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    return 0;
                }
                ErrorKind::InvalidSubcommand => ("unknown_command", EXIT_UNKNOWN_COMMAND),
                ErrorKind::MissingSubcommand | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    ("missing_command", EXIT_UNKNOWN_COMMAND)
                }
                _ => ("invalid_config", EXIT_CONFIG),
            };
            let _ = writeln!(stderr, "{}", error_object(code, &e.to_string()));
            return exit;
        }
    };
    match dispatch(&cli.command) {
        Ok((text, out)) => match write_output(&text, out.as_deref(), stdout) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(stderr, "{}", error_object("io", &e.to_string()));
                EXIT_CONFIG
            }
        },
        Err(e) => {
            let _ = writeln!(stderr, "{}", error_object(e.code(), &e.to_string()));
            if e.is_config_error() {
                EXIT_CONFIG
            } else {
                EXIT_NUMERIC
            }
        }
    }
}

fn write_output(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> std::io::Result<()> {
    match out {
        Some(p) => fs::write(p, text),
        None => stdout.write_all(text.as_bytes()),
    }
}

/// Binary entry point.
pub fn main_entry() -> i32 {
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    run(std::env::args_os(), &mut out, &mut err)
}

type Output = (String, Option<PathBuf>);

fn dispatch(cmd: &Command) -> Result<Output> {
    match cmd {
        Command::Linearize(a) => cmd_linearize(a).map(|t| (t, a.output.out.clone())),
        Command::Divisors(a) => cmd_divisors(a).map(|t| (t, a.output.out.clone())),
        Command::Bruno(a) => cmd_bruno(a).map(|t| (t, a.output.out.clone())),
        Command::Remainder(a) => cmd_remainder(a).map(|t| (t, a.output.out.clone())),
        Command::TruncateOpt(a) => cmd_truncate_opt(a).map(|t| (t, a.output.out.clone())),
        Command::Orbit(a) => cmd_orbit(a).map(|t| (t, a.output.out.clone())),
        Command::Scan(a) => cmd_scan(a).map(|t| (t, a.output.out.clone())),
        Command::Horizon(a) => cmd_horizon(a).map(|t| (t, a.output.out.clone())),
        Command::Report(a) => cmd_report(a).map(|t| (t, a.output.out.clone())),
    }
}

/// `{"schema": ..., "command": ..., <fields of body>}` as pretty JSON.
fn document(command: &str, body: Value) -> String {
    let mut map = serde_json::Map::new();
    map.insert("schema".into(), json!(SCHEMA));
    map.insert("command".into(), json!(command));
    match body {
        Value::Object(fields) => map.extend(fields),
        other => {
            map.insert("result".into(), other);
        }
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(map)).expect("JSON values serialize");
    text.push('\n');
    text
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn resolve_precision(arg: &PrecisionArg, fallback: Precision) -> Result<Precision> {
    match arg.precision {
        Some(bits) => Precision::from_user(bits),
        None => Ok(fallback),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Missing(format!("{}: {e}", path.display())))
}

fn load_germ(path: &Path, prec: &PrecisionArg, fallback: Precision) -> Result<GermSpec> {
    let text = read_text(path)?;
    let doc: crate::linearizer::GermDoc =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let file_prec = match doc.precision {
        Some(bits) => Precision::from_user(bits)?,
        None => fallback,
    };
    let target = resolve_precision(prec, file_prec)?;
    GermSpec::from_doc(&doc, target)?.with_precision(target)
}

/// Where `linearize` stores its series for later commands: `g.json -> g.series.json`.
pub fn series_sidecar(germ: &Path) -> PathBuf {
    let stem = germ.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    germ.with_file_name(format!("{stem}.series.json"))
}

fn parse_direction(s: &str) -> Result<Direction> {
    Direction::parse(s)
}

fn cmd_linearize(a: &LinearizeArgs) -> Result<String> {
    if a.order < 2 {
        return Err(Error::InvalidArgument("order must be at least 2".into()));
    }
    let germ = load_germ(&a.germ, &a.precision, Precision::DOUBLE)?;
    let dir = parse_direction(&a.direction)?;
    let lin = solve_schroder(&germ, a.order, dir, SolveOptions { escalate: !a.no_escalate, trace: false })?;
    let fit = gevrey_fit(&lin.series, a.s)?;
    let mut body = json!({
        "summary": lin.summary(),
        "gevrey_fit": fit,
        "series": lin.series.to_doc(),
    });
    if let Ok(est) = estimate_gevrey_exponent(&lin.series) {
        body["gevrey_exponent"] = to_value(&est);
    }
    let text = document("linearize", body);
    if !a.no_series_file {
        let path = a.series_out.clone().unwrap_or_else(|| series_sidecar(&a.germ));
        fs::write(&path, &text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
    }
    Ok(text)
}

fn parse_rotation_token(tok: &str) -> Result<RotationDoc> {
    let t = tok.trim();
    Ok(match t {
        "golden" | "sqrt2" => RotationDoc::Preset { preset: t.into(), depth: None },
        "" => return Err(Error::Parse("empty rotation entry".into())),
        _ => RotationDoc::Text(t.into()),
    })
}

fn cmd_divisors(a: &DivisorsArgs) -> Result<String> {
    let spec = match (&a.germ, &a.rotations) {
        (Some(path), None) => load_germ(path, &a.precision, Precision::DOUBLE)?.multipliers().clone(),
        (None, Some(list)) => {
            let prec = resolve_precision(&a.precision, Precision::DOUBLE)?;
            let rots =
                list.split(',').map(|t| parse_rotation_token(t)?.to_rotation(prec)).collect::<Result<Vec<_>>>()?;
            MultiplierSpec::from_rotations(rots, prec)?
        }
        _ => return Err(Error::Missing("give --germ or --rotations".into())),
    };
    let rows = spec.omega_sweep(a.p_min, a.p_max)?;
    Ok(match a.format {
        Format::Json => document("divisors", json!({"n": spec.dim(), "rows": rows})),
        Format::Csv => {
            let mut s = String::from("p,omega,argmin_alpha,argmin_j\n");
            for r in &rows {
                let alpha: Vec<String> = r.argmin_alpha.iter().map(|x| x.to_string()).collect();
                s.push_str(&format!("{},{:e},{},{}\n", r.p, r.omega, alpha.join(";"), r.argmin_j));
            }
            s
        }
    })
}

/// Parsed `s=1,q1=2` generator options.
fn parse_growth_spec(spec: &str) -> Result<(f64, u64)> {
    let mut s = None;
    let mut q1 = 2u64;
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').unwrap_or(("s", part));
        match k.trim() {
            "s" => s = Some(v.trim().parse::<f64>().map_err(|e| Error::Parse(format!("s: {e}")))?),
            "q1" => q1 = v.trim().parse().map_err(|e| Error::Parse(format!("q1: {e}")))?,
            other => return Err(Error::Parse(format!("unknown generator key {other:?}"))),
        }
    }
    Ok((s.ok_or_else(|| Error::Missing("generator needs s=...".into()))?, q1))
}

/// Continued fraction from exactly one of the quotient sources.
fn quotient_source(src: &QuotientSource, prec: Precision) -> Result<(ContinuedFraction, Value)> {
    let chosen =
        [src.quotients.is_some(), src.golden, src.sqrt2, src.factorial_growth.is_some()].iter().filter(|&&b| b).count();
    if chosen != 1 {
        return Err(Error::Missing("give exactly one of --quotients, --golden, --sqrt2, --factorial-growth".into()));
    }
    if let Some(list) = &src.quotients {
        let qs = list
            .split(',')
            .map(|t| {
                Integer::from_str_radix(t.trim(), 10)
                    .map(Magnitude::Exact)
                    .map_err(|e| Error::Parse(format!("quotient {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let cf = ContinuedFraction::new(qs, prec)?;
        return Ok((cf, json!({"source": "quotients"})));
    }
    if src.golden {
        let depth = src.depth.unwrap_or(crate::divisors::DEFAULT_PRESET_DEPTH);
        return Ok((cf::golden(depth, prec)?, json!({"source": "golden", "depth": depth})));
    }
    if src.sqrt2 {
        let depth = src.depth.unwrap_or(crate::divisors::DEFAULT_PRESET_DEPTH);
        return Ok((cf::sqrt2_minus_one(depth, prec)?, json!({"source": "sqrt2", "depth": depth})));
    }
    let (s, q1) = parse_growth_spec(src.factorial_growth.as_deref().unwrap_or_default())?;
    let depth = src.depth.unwrap_or(8);
    let out = build_quotients_saturating(s, depth, q1, prec)?;
    let meta = json!({
        "source": "factorial_growth", "s": s, "q1": q1,
        "requested_depth": out.requested, "reached_depth": out.reached, "saturated": out.saturated(),
    });
    Ok((ContinuedFraction::new(out.quotients, prec)?, meta))
}

fn parse_window(w: &str) -> Result<(usize, usize)> {
    let (lo, hi) = w.split_once(':').ok_or_else(|| Error::Parse(format!("window {w:?} is not LO:HI")))?;
    let p = |x: &str| x.trim().parse::<usize>().map_err(|e| Error::Parse(format!("window {w:?}: {e}")));
    Ok((p(lo)?, p(hi)?))
}

fn cmd_bruno(a: &BrunoArgs) -> Result<String> {
    let prec = resolve_precision(&a.precision, Precision::QUAD)?;
    let (cf, source) = quotient_source(&a.source, prec)?;
    let kind = ConditionKind::parse(&a.kind)?;
    let mut params = if kind == ConditionKind::Bgammasigma {
        ConditionParams::geometric_sequences(a.s, cf.depth())
    } else {
        ConditionParams::with_s(a.s)
    };
    if let Some(w) = &a.window {
        params.window = Some(parse_window(w)?);
    }
    let diag = evaluate_condition(kind, &cf, &params)?;
    Ok(match a.format {
        Format::Json => {
            let mut body = to_value(&diag);
            body["quotient_source"] = source;
            document("bruno", body)
        }
        Format::Csv => {
            let mut s = String::from("k,value\n");
            for (k, v) in diag.indices.iter().zip(&diag.sequence) {
                s.push_str(&format!("{k},{v:e}\n"));
            }
            s
        }
    })
}

/// Linearization in the `H o F = R_A o H` direction, truncated to `order`.
fn load_or_solve_inverse(a: &RemainderArgs, germ: &GermSpec) -> Result<(FormalSeries, &'static str)> {
    let path = match &a.series {
        Some(p) => Some(p.clone()),
        None => Some(series_sidecar(&a.germ)).filter(|p| p.exists()),
    };
    if let Some(path) = path {
        let text = read_text(&path)?;
        let value: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let (series_value, dir) = match value.get("series") {
            Some(s) => {
                let dir = value["summary"]["direction"].as_str().unwrap_or("inverse");
                (s.clone(), parse_direction(dir)?)
            }
            None => (value, Direction::Inverse),
        };
        let doc: SeriesDoc =
            serde_json::from_value(series_value).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let series = FormalSeries::from_doc(&doc, germ.precision())?.with_precision(germ.precision());
        if series.dim() != germ.dim() {
            return Err(Error::DimensionMismatch { expected: germ.dim(), found: series.dim() });
        }
        if series.order() >= a.order {
            let h = match dir {
                Direction::Inverse => series.truncate(a.order),
                Direction::Direct => series.invert_tangent_identity(a.order)?,
            };
            return Ok((h, "file"));
        }
    }
    let lin = solve_schroder(germ, a.order, Direction::Inverse, SolveOptions::default())?;
    Ok((lin.series, "computed"))
}

fn cmd_remainder(a: &RemainderArgs) -> Result<String> {
    if a.order < 2 {
        return Err(Error::InvalidArgument("order must be at least 2".into()));
    }
    let germ = load_germ(&a.germ, &a.precision, Precision::DOUBLE)?;
    let (h, source) = load_or_solve_inverse(a, &germ)?;
    let h_n = h.truncate(a.order);
    let out_order = exact_remainder_order(a.order, &germ).max(a.order + 1);
    let r = remainder_series(&h_n, &germ, out_order)?;
    let sup = remainder_sup(&r, a.radius, a.samples)?;
    let low = r.max_abs_in(1, a.order);
    let overall = r.max_abs();
    Ok(document(
        "remainder",
        json!({
            "order": a.order,
            "out_order": out_order,
            "radius": a.radius,
            "samples": sup.points,
            "series_source": source,
            "sup_grid": sup.sup_grid,
            "sup_coeffsum": sup.sup_coeffsum,
            "low_order_max": low,
            "low_order_relative": if overall > 0.0 { low / overall } else { 0.0 },
        }),
    ))
}

fn cmd_truncate_opt(a: &TruncateOptArgs) -> Result<String> {
    let opt = optimal_truncation(a.rstar, a.z, a.s, a.b4)?;
    Ok(document("truncate-opt", to_value(&opt)))
}

/// `a+bi`, `a-bi`, `a`, `bi`, `-i` and the like.
pub fn parse_complex(text: &str, prec: Precision) -> Result<Complex> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let err = || Error::Parse(format!("not a complex number: {text:?}"));
    if t.is_empty() {
        return Err(err());
    }
    let parse_real = |s: &str| numeric::parse_float(prec, s).map_err(|_| err());
    let parse_imag = |s: &str| match s {
        "" | "+" => numeric::parse_float(prec, "1"),
        "-" => numeric::parse_float(prec, "-1"),
        _ => parse_real(s),
    };
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        let re = parse_real(&t)?;
        return Ok(Complex::with_val(prec.bits(), (re, 0)));
    };
    // split at the last sign that is not an exponent sign or the leading one
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (parse_real(&body[..i])?, parse_imag(&body[i..])?),
        None => (numeric::parse_float(prec, "0")?, parse_imag(body)?),
    };
    Ok(Complex::with_val(prec.bits(), (re, im)))
}

fn cmd_orbit(a: &OrbitArgs) -> Result<String> {
    let germ = load_germ(&a.germ, &a.precision, Precision::QUAD)?;
    let prec = germ.precision();
    let z0 = a.z0.split(',').map(|t| parse_complex(t, prec)).collect::<Result<Vec<_>>>()?;
    let opts = OrbitOptions { max_iter: a.max_iter, escape_radius: a.escape, precision: prec, stride: a.stride };
    let rec = orbit(&germ, &z0, &opts)?;
    Ok(match a.format {
        Format::Json => document("orbit", to_value(&rec)),
        Format::Csv => {
            let mut s = String::from("m");
            for j in 0..germ.dim() {
                s.push_str(&format!(",re_{j},im_{j}"));
            }
            s.push('\n');
            for (m, z) in &rec.trajectory {
                s.push_str(&m.to_string());
                for [re, im] in z {
                    s.push_str(&format!(",{re:e},{im:e}"));
                }
                s.push('\n');
            }
            s
        }
    })
}

/// `r1:r2:steps`.
pub fn parse_radii(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let err = || Error::Parse(format!("radius grid {spec:?} is not r1:r2:steps"));
    if parts.len() != 3 {
        return Err(err());
    }
    let r1: f64 = parts[0].trim().parse().map_err(|_| err())?;
    let r2: f64 = parts[1].trim().parse().map_err(|_| err())?;
    let steps: usize = parts[2].trim().parse().map_err(|_| err())?;
    radius_grid(r1, r2, steps)
}

fn cmd_scan(a: &ScanArgs) -> Result<String> {
    let germ = load_germ(&a.germ, &a.precision, Precision::QUAD)?;
    let radii = parse_radii(&a.radii)?;
    let opts = ScanOptions {
        phases: a.phases,
        max_iter: a.max_iter,
        escape_radius: a.escape,
        precision: germ.precision(),
        cells: a.cells,
    };
    let rep = escape_scan(&germ, &radii, a.s, &opts)?;
    Ok(match a.format {
        Format::Json => document("scan", to_value(&rep)),
        Format::Csv => {
            let mut s = String::from("r,T_median,censored\n");
            for row in &rep.rows {
                s.push_str(&format!("{},{},{}\n", row.r, row.t_median, row.censored));
            }
            s
        }
    })
}

fn required(v: Option<f64>, flag: &str) -> Result<f64> {
    v.ok_or_else(|| Error::Missing(format!("--{flag} is required for this mode")))
}

fn cmd_horizon(a: &HorizonArgs) -> Result<String> {
    match a.mode {
        HorizonMode::Stability => {
            let a_star = required(a.a_star, "a-star")?;
            let b_star = required(a.b_star, "b-star")?;
            let r_star = required(a.rstar, "rstar")?;
            let s = required(a.s, "s")?;
            let z = required(a.z, "z")?;
            let r2 = a.r2.unwrap_or(r_star);
            let spec_form = stability_horizon_from_measured(a_star, b_star, a.j2, r_star, r2, s, z)?;
            let lemma = stability_iteration_params(a_star, b_star, r_star, s, z)?;
            Ok(document(
                "horizon",
                json!({
                    "mode": "stability",
                    "horizon": spec_form,
                    "lemma_form": {"params": lemma, "ln_k": lemma.ln_horizon(), "k": lemma.horizon()},
                }),
            ))
        }
        HorizonMode::Pm => {
            let prec = resolve_precision(&a.precision, Precision::QUAD)?;
            let (cf, source) = quotient_source(&a.source, prec)?;
            let k_max = a.k_max.unwrap_or(cf.depth());
            let rows = perez_marco_horizon(&cf, a.k_min, k_max, a.c1, a.c2)?;
            Ok(document("horizon", json!({"mode": "pm", "quotient_source": source, "rows": rows})))
        }
        HorizonMode::Lemma => {
            let p = IterationParams::new(
                required(a.big_r, "R")?,
                required(a.a, "a")?,
                required(a.b, "b")?,
                required(a.alpha, "alpha")?,
            )?;
            let steps = match a.steps {
                Some(s) => s,
                None => usize::try_from(p.horizon())
                    .ok()
                    .filter(|&k| k <= 10_000_000)
                    .ok_or_else(|| Error::InvalidArgument("K is too large to tabulate; pass --steps".into()))?
                    .max(1),
            };
            let seq = iterate_mu(p, steps)?;
            let within = seq.mu.iter().all(|&m| m <= 2.0 * p.r);
            Ok(document("horizon", json!({"mode": "lemma", "sequence": seq, "within_2R": within})))
        }
    }
}

/// Golden-mean rotation as a germ-file entry.
fn golden_quadratic(prec: Precision) -> Result<GermSpec> {
    GermSpec::quadratic(MultiplierSpec::golden(prec)?)
}

/// The fixed experiment suite behind `germlab report`.
pub fn build_report(cells: usize) -> Result<Value> {
    let prec = Precision::QUAD;
    let germ = golden_quadratic(prec)?;

    let direct = solve_schroder(&germ, 12, Direction::Direct, SolveOptions::default())?;
    let defect = conjugacy_defect(&germ, &direct.series, Direction::Direct, 12)?;
    let fit = gevrey_fit(&direct.series, 0.0)?;

    let two_dim = MultiplierSpec::from_rotations(
        vec![
            RotationDoc::Preset { preset: "golden".into(), depth: None }.to_rotation(prec)?,
            RotationDoc::Preset { preset: "sqrt2".into(), depth: None }.to_rotation(prec)?,
        ],
        prec,
    )?;
    let omega = two_dim.omega_sweep(3, 12)?;

    let mut bprime = Vec::new();
    for s in [0.5, 1.0, 2.0] {
        let out = build_quotients_saturating(s, 8, 2, prec)?;
        let cf = ContinuedFraction::new(out.quotients, prec)?;
        let diag = evaluate_condition(ConditionKind::BprimeS, &cf, &ConditionParams::with_s(s))?;
        bprime.push(json!({"s": s, "reached_depth": out.reached, "diagnostic": diag}));
    }
    let golden_cf = cf::golden(30, prec)?;
    let btilde = evaluate_condition(ConditionKind::BtildeS, &golden_cf, &ConditionParams::with_s(1.0))?;

    let inverse = solve_schroder(&germ, 16, Direction::Inverse, SolveOptions::default())?;
    let orders: Vec<u32> = (3..=12).collect();
    let samples = truncation_sweep(&inverse.series, &germ, &orders, 0.1, 128)?;
    let envelope = fit_envelope(&samples, 0.4, 0.0)?;
    let n_bar = optimal_truncation(envelope.r_star, 0.05, 1.0, envelope.b4)?;

    let lemma = iterate_mu(IterationParams::new(0.1, 1.0, 1.0, 1.0)?, 14)?;
    let scan_opts = ScanOptions { phases: 4, max_iter: 20_000, escape_radius: 0.5, precision: prec, cells };
    let scan = escape_scan(&germ, &[0.3, 0.35, 0.4, 0.45], 1.0, &scan_opts)?;
    let pm = stability::perez_marco_horizon(&golden_cf, 1, 10, 1.0, 1.0)?;

    Ok(json!({
        "linearize": {
            "summary": direct.summary(),
            "conjugacy_defect_max": defect.max_abs(),
            "gevrey_fit": fit,
        },
        "divisors": {"rotations": ["golden", "sqrt2"], "rows": omega},
        "bruno": {"bprime_s": bprime, "btilde_s_golden": btilde},
        "truncation": {"fit": envelope, "optimal_order_z0_05_s1": n_bar},
        "lemma": lemma,
        "scan": scan,
        "perez_marco_golden": pm,
    }))
}

fn cmd_report(a: &ReportArgs) -> Result<String> {
    Ok(document("report", build_report(a.cells)?))
}
