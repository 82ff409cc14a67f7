//! Terminal front end. Every subcommand routes straight into the library
//! with the same arguments, so a shell pipeline and an in-process call on
//! the same seed produce bit-identical numbers.
//!
//! Output conventions: CSV with '#'-comment header lines (version, exact
//! command line, seed) or JSON carrying the same metadata under "meta".
//! Usage mistakes exit 2, data and numeric failures exit 1.

mod csvio;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use csvio::{csv_field, ingest_csv, CsvError, MissingPolicy};
use tailcausal::analysis::{cross_extremogram, minimal_delay, sweep_k, sweep_p, AnalysisError};
use tailcausal::estimator::{
    causal_tail_estimate, default_k, DivisorMode, EstimatorError, GammaEstimate, GammaVariant,
};
use tailcausal::experiments::{run_experiment, ExperimentError, ExperimentId, ExperimentSpec};
use tailcausal::granger::{granger_test, GrangerError, GrangerResult};
use tailcausal::graph::{build_graph, GraphError};
use tailcausal::hill::{hill_estimate, HillError};
use tailcausal::prep::{preprocess, PrepError, PrepStep};
use tailcausal::preset::{ModelError, ModelSpec, Preset};
use tailcausal::rng::NoiseSpec;
use tailcausal::series::{Series, SeriesError};

const EXIT_DATA: i32 = 1;
const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
enum CliError {
    /// Flag combinations and values that clap's grammar can't rule out.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Granger(#[from] GrangerError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Hill(#[from] HillError),
    #[error(transparent)]
    Prep(#[from] PrepError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("cannot read {path}: {source}")]
    ReadFile {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    WriteFile {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: not a model spec: {source}")]
    BadSpecFile {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("JSON encoding failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    #[value(name = "csv")]
    Csv,
    #[value(name = "json")]
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    /// Window j = 0..p.
    #[value(name = "standard")]
    Standard,
    /// Window j = 1..p: instantaneous co-extremes excluded.
    #[value(name = "no0")]
    No0,
    /// Standard on |x|, |y|.
    #[value(name = "abs")]
    Abs,
}

impl VariantArg {
    fn to_variant(self) -> GammaVariant {
        match self {
            VariantArg::Standard => GammaVariant::Standard,
            VariantArg::No0 => GammaVariant::NoInstantaneous,
            VariantArg::Abs => GammaVariant::AbsoluteValue,
        }
    }
}

fn variant_cell(v: GammaVariant) -> &'static str {
    match v {
        GammaVariant::Standard => "standard",
        GammaVariant::NoInstantaneous => "no0",
        GammaVariant::AbsoluteValue => "abs",
    }
}

fn divisor_cell(d: DivisorMode) -> &'static str {
    match d {
        DivisorMode::PaperK => "paper_k",
        DivisorMode::Renormalize => "renormalize",
    }
}

/// Causal direction between heavy-tailed time series from their joint extremes.
#[derive(Debug, Parser)]
#[command(name = "tailcausal", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Master seed for anything stochastic.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Output format; `graph` defaults to json, everything else to csv.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Number of upper order statistics; defaults to ⌊√n⌋ of the input length.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Extremal delay; doubles as the maximum lag for scanning subcommands.
    #[arg(long, global = true)]
    p: Option<usize>,
    /// Estimator window variant.
    #[arg(long, global = true, value_enum, default_value_t = VariantArg::Standard)]
    variant: VariantArg,
    /// Decision threshold: a forward Γ̂ at or above this supports an edge.
    #[arg(long, global = true, default_value_t = 0.9)]
    tau_hi: f64,
    /// Decision threshold: a reverse Γ̂ below this keeps the edge one-way.
    #[arg(long, global = true, default_value_t = 0.8)]
    tau_lo: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a preset model (or a JSON spec file) to a CSV table.
    Simulate(SimulateArgs),
    /// Γ̂ in both directions for one pair of columns.
    Gamma(PairArgs),
    /// Γ̂ over a grid of delays p.
    SweepP(SweepArgs),
    /// Γ̂ over a grid of k values.
    SweepK(SweepArgs),
    /// Smallest delay at which the forward Γ̂ reaches --tau-hi.
    MinDelay(PairArgs),
    /// How often an extreme of x is echoed by an extreme of y, per lag.
    Extremogram(PairArgs),
    /// Hill estimate of a column's tail index.
    Tailindex(TailindexArgs),
    /// Linear Granger F-test in both directions.
    Granger(GrangerArgs),
    /// Pairwise causal graph over all (or selected) columns.
    Graph(GraphArgs),
    /// Run a bundled Monte Carlo experiment.
    Bench(BenchArgs),
    /// Column transformations (seasonal anomaly, detrend, difference, negate).
    Preprocess(PreprocessArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// CSV file with a header row; '#' lines are ignored.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Missing-cell policy.
    #[arg(long, value_enum, default_value_t = MissingPolicy::Error)]
    missing: MissingPolicy,
}

#[derive(Debug, Args)]
struct PairArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Column treated as the candidate cause.
    #[arg(long, value_name = "NAME")]
    x: String,
    /// Column treated as the candidate effect.
    #[arg(long, value_name = "NAME")]
    y: String,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// Comma-separated grid; defaults to 0..=p (1..=p for no0) for sweep-p
    /// and a spread of k values below n for sweep-k.
    #[arg(long, value_name = "LIST")]
    grid: Option<String>,
}

#[derive(Debug, Args)]
struct TailindexArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Column to fit.
    #[arg(long, value_name = "NAME")]
    column: String,
    /// Two-sided confidence level of the reported interval.
    #[arg(long, default_value_t = 0.95)]
    confidence: f64,
}

#[derive(Debug, Args)]
struct GrangerArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// VAR order of the fitted autoregressions.
    #[arg(long, default_value_t = 1)]
    order: usize,
    /// Test level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

#[derive(Debug, Args)]
struct GraphArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Restrict to these columns (comma list); default: every column.
    #[arg(long, value_name = "LIST")]
    columns: Option<String>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Which bundled experiment (table1, table2, table3, fig3_hist,
    /// fig4_ksweep, fig5_psweep, fig67_tau, example1_limit).
    #[arg(long)]
    experiment: ExperimentId,
    /// Repetitions; default: the experiment's reference count.
    #[arg(long)]
    reps: Option<usize>,
    /// Per-repetition sample length; default: the reference length.
    #[arg(long)]
    n: Option<usize>,
    /// Divide the repetition count by this factor for a quick pass.
    #[arg(long, default_value_t = 1)]
    scale: usize,
    /// Worker threads; results are identical for every value.
    #[arg(long, default_value_t = 1)]
    parallelism: usize,
    /// Keep per-repetition values in the summary (json output only).
    #[arg(long)]
    keep_raw: bool,
    /// Cross coefficient override, where the experiment uses one.
    #[arg(long)]
    delta: Option<f64>,
    /// Cross coefficients of the confounded three-channel model.
    #[arg(long)]
    delta_x: Option<f64>,
    #[arg(long)]
    delta_y: Option<f64>,
    /// Student-t noise dof triple "x,y,z" for the confounded model.
    #[arg(long, value_name = "X,Y,Z")]
    theta: Option<String>,
    /// Threshold grid override for fig67_tau.
    #[arg(long, value_name = "LIST")]
    tau_grid: Option<String>,
    /// Grid override for fig4_ksweep.
    #[arg(long, value_name = "LIST")]
    k_grid: Option<String>,
    /// Grid override for fig5_psweep and the p-axis of fig67_tau.
    #[arg(long, value_name = "LIST")]
    p_grid: Option<String>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Preset name: motivating, example1, example2, example3, model1,
    /// model2, model3, model4.
    #[arg(long, value_name = "NAME", conflicts_with = "spec")]
    model: Option<String>,
    /// JSON model-spec file, as an alternative to --model.
    #[arg(long, value_name = "FILE")]
    spec: Option<PathBuf>,
    /// Sample length after burn-in.
    #[arg(long)]
    n: usize,
    /// Cross coefficient δ (model1 only).
    #[arg(long)]
    delta: Option<f64>,
    /// Noise for both channels of model1: pareto:SCALE,SHAPE | gauss |
    /// cauchy | student:NU.
    #[arg(long, value_name = "DIST")]
    noise: Option<String>,
    /// Per-channel noise overriding --noise (model1 only).
    #[arg(long, value_name = "DIST")]
    noise_x: Option<String>,
    #[arg(long, value_name = "DIST")]
    noise_y: Option<String>,
    /// Cross coefficients δ_X, δ_Y (model3 only; default 0).
    #[arg(long)]
    delta_x: Option<f64>,
    #[arg(long)]
    delta_y: Option<f64>,
    /// Student-t noise dof "x,y,z" (model3 only; default 1,1,1).
    #[arg(long, value_name = "X,Y,Z")]
    theta: Option<String>,
}

#[derive(Debug, Args)]
struct PreprocessArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Restrict to these columns (comma list); default: every column.
    #[arg(long, value_name = "LIST")]
    columns: Option<String>,
    /// Subtract the per-phase mean over this season length.
    #[arg(long, value_name = "PERIOD")]
    seasonal: Option<usize>,
    /// Remove an OLS straight-line trend.
    #[arg(long)]
    detrend: bool,
    /// First differences (output is one row shorter).
    #[arg(long)]
    difference: bool,
    /// Flip sign, so the lower tail becomes the upper one.
    #[arg(long)]
    negate: bool,
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    // Graph's natural interchange form is the JSON document; everything
    // else prints tables.
    let format = cli.global.format.unwrap_or(match cli.command {
        Command::Graph(_) => OutputFormat::Json,
        _ => OutputFormat::Csv,
    });
    let g = &cli.global;
    let text = match &cli.command {
        Command::Simulate(a) => cmd_simulate(g, a, format)?,
        Command::Gamma(a) => cmd_gamma(g, a, format)?,
        Command::SweepP(a) => cmd_sweep_p(g, a, format)?,
        Command::SweepK(a) => cmd_sweep_k(g, a, format)?,
        Command::MinDelay(a) => cmd_min_delay(g, a, format)?,
        Command::Extremogram(a) => cmd_extremogram(g, a, format)?,
        Command::Tailindex(a) => cmd_tailindex(g, a, format)?,
        Command::Granger(a) => cmd_granger(g, a, format)?,
        Command::Graph(a) => cmd_graph(g, a, format)?,
        Command::Bench(a) => cmd_bench(g, a, format)?,
        Command::Preprocess(a) => cmd_preprocess(g, a, format)?,
    };
    write_output(g.out.as_deref(), &text)
}

// --- output plumbing ---

fn fmt_num(v: f64) -> String {
    // Shortest representation that parses back to the same double.
    format!("{v}")
}

fn command_line() -> String {
    std::env::args()
        .map(|a| {
            if a.is_empty() || a.chars().any(|c| c.is_whitespace() || c == '"') {
                format!("{a:?}")
            } else {
                a
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn push_preamble(out: &mut String, seed: u64) {
    out.push_str(&format!("# version={}\n", env!("CARGO_PKG_VERSION")));
    out.push_str(&format!("# command={}\n", command_line()));
    out.push_str(&format!("# seed={seed}\n"));
}

fn csv_table(seed: u64, header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut out = String::new();
    push_preamble(&mut out, seed);
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct Meta {
    version: &'static str,
    command: String,
    seed: u64,
}

#[derive(Serialize)]
struct Envelope<T: Serialize> {
    meta: Meta,
    result: T,
}

fn envelope<T: Serialize>(seed: u64, result: T) -> Result<String, CliError> {
    let doc = Envelope {
        meta: Meta {
            version: env!("CARGO_PKG_VERSION"),
            command: command_line(),
            seed,
        },
        result,
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    Ok(text)
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::WriteFile {
            path: path.display().to_string(),
            source,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::WriteFile {
                path: "<stdout>".to_string(),
                source,
            }),
    }
}

fn series_table(seed: u64, columns: &[Series]) -> String {
    let mut out = String::new();
    push_preamble(&mut out, seed);
    let header: Vec<String> = columns.iter().map(|s| csv_field(s.name())).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    let rows = columns.first().map_or(0, |s| s.len());
    for i in 0..rows {
        let line: Vec<String> = columns.iter().map(|s| fmt_num(s.values()[i])).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct ColumnOut<'a> {
    name: &'a str,
    values: &'a [f64],
}

fn series_json(seed: u64, columns: &[Series]) -> Result<String, CliError> {
    let cols: Vec<ColumnOut> = columns
        .iter()
        .map(|s| ColumnOut {
            name: s.name(),
            values: s.values(),
        })
        .collect();
    envelope(seed, cols)
}

// --- shared argument resolution ---

fn require_p(global: &GlobalArgs, command: &str) -> Result<usize, CliError> {
    global.p.ok_or_else(|| usage(format!("{command} needs --p")))
}

fn pick_k(global: &GlobalArgs, n: usize) -> usize {
    global.k.unwrap_or_else(|| default_k(n))
}

fn load_pair(args: &PairArgs) -> Result<(Series, Series), CliError> {
    let names = [args.x.clone(), args.y.clone()];
    let data = ingest_csv(&args.input.input, Some(&names), args.input.missing)?;
    Ok((data.column(&args.x)?.clone(), data.column(&args.y)?.clone()))
}

fn parse_list<T: FromStr>(raw: &str, flag: &str) -> Result<Vec<T>, CliError> {
    let mut out = Vec::new();
    for tok in raw.split(',') {
        let tok = tok.trim();
        match tok.parse::<T>() {
            Ok(v) => out.push(v),
            Err(_) => return Err(usage(format!("--{flag}: cannot parse {tok:?}"))),
        }
    }
    if out.is_empty() {
        return Err(usage(format!("--{flag}: empty list")));
    }
    Ok(out)
}

/// The analysis grids must be strictly increasing; sort-and-dedup lets the
/// flag accept any order.
fn normalize_grid(mut grid: Vec<usize>) -> Vec<usize> {
    grid.sort_unstable();
    grid.dedup();
    grid
}

fn parse_names(raw: &str, flag: &str) -> Result<Vec<String>, CliError> {
    let names: Vec<String> = raw.split(',').map(|t| t.trim().to_string()).collect();
    if names.iter().any(String::is_empty) {
        return Err(usage(format!("--{flag}: empty column name")));
    }
    Ok(names)
}

fn parse_theta(raw: &str) -> Result<[u32; 3], CliError> {
    let v: Vec<u32> = parse_list(raw, "theta")?;
    if v.len() != 3 {
        return Err(usage("--theta needs exactly three values x,y,z"));
    }
    Ok([v[0], v[1], v[2]])
}

/// "pareto:SCALE,SHAPE" | "gauss" | "gaussian" | "cauchy" | "student:NU" | "t:NU".
fn parse_noise(raw: &str) -> Result<NoiseSpec, CliError> {
    let (head, tail) = match raw.split_once(':') {
        Some((h, t)) => (h, Some(t)),
        None => (raw, None),
    };
    let bad_params = |e: tailcausal::rng::NoiseError| usage(format!("--noise {raw:?}: {e}"));
    match (head.to_ascii_lowercase().as_str(), tail) {
        ("gauss" | "gaussian", None) => Ok(NoiseSpec::standard_gaussian()),
        ("cauchy", None) => Ok(NoiseSpec::cauchy()),
        ("pareto", Some(t)) => {
            let ab: Vec<f64> = parse_list(t, "noise")?;
            if ab.len() != 2 {
                return Err(usage("pareto noise needs two parameters: pareto:SCALE,SHAPE"));
            }
            NoiseSpec::pareto(ab[0], ab[1]).map_err(bad_params)
        }
        ("student" | "t", Some(t)) => {
            let nu: u32 = t
                .trim()
                .parse()
                .map_err(|_| usage(format!("student noise dof {t:?} is not a whole number")))?;
            NoiseSpec::student_t(nu).map_err(bad_params)
        }
        _ => Err(usage(format!(
            "unrecognized noise {raw:?}; use pareto:SCALE,SHAPE | gauss | cauchy | student:NU"
        ))),
    }
}

// --- subcommands ---

fn cmd_simulate(
    g: &GlobalArgs,
    args: &SimulateArgs,
    format: OutputFormat,
) -> Result<String, CliError> {
    let columns = match (&args.model, &args.spec) {
        (Some(name), None) => build_preset(name, args)?.simulate(args.n, g.seed)?,
        (None, Some(path)) => {
            forbid_model_flags(args, "a spec file")?;
            let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadFile {
                path: path.display().to_string(),
                source,
            })?;
            let spec: ModelSpec =
                serde_json::from_str(&text).map_err(|source| CliError::BadSpecFile {
                    path: path.display().to_string(),
                    source,
                })?;
            spec.simulate(args.n, g.seed)?
        }
        _ => return Err(usage("pass exactly one of --model and --spec")),
    };
    match format {
        OutputFormat::Csv => Ok(series_table(g.seed, &columns)),
        OutputFormat::Json => series_json(g.seed, &columns),
    }
}

fn forbid(present: bool, flag: &str, model: &str) -> Result<(), CliError> {
    if present {
        return Err(usage(format!("{flag} does not apply to {model}")));
    }
    Ok(())
}

fn forbid_model_flags(args: &SimulateArgs, model: &str) -> Result<(), CliError> {
    forbid(args.delta.is_some(), "--delta", model)?;
    forbid(args.noise.is_some(), "--noise", model)?;
    forbid(args.noise_x.is_some(), "--noise-x", model)?;
    forbid(args.noise_y.is_some(), "--noise-y", model)?;
    forbid(args.delta_x.is_some(), "--delta-x", model)?;
    forbid(args.delta_y.is_some(), "--delta-y", model)?;
    forbid(args.theta.is_some(), "--theta", model)
}

fn build_preset(name: &str, args: &SimulateArgs) -> Result<Preset, CliError> {
    let lower = name.to_ascii_lowercase();
    match lower.as_str() {
        "motivating" | "example1" | "example2" | "example3" | "model2" | "model4" => {
            forbid_model_flags(args, &lower)?;
            Ok(match lower.as_str() {
                "motivating" => Preset::Motivating,
                "example1" => Preset::Example1,
                "example2" => Preset::Example2,
                "example3" => Preset::Example3,
                "model2" => Preset::Model2,
                _ => Preset::Model4,
            })
        }
        "model1" => {
            forbid(args.delta_x.is_some(), "--delta-x", "model1")?;
            forbid(args.delta_y.is_some(), "--delta-y", "model1")?;
            forbid(args.theta.is_some(), "--theta", "model1")?;
            let delta = args
                .delta
                .ok_or_else(|| usage("model1 needs --delta"))?;
            let both = args.noise.as_deref().map(parse_noise).transpose()?;
            let pareto11 = || NoiseSpec::pareto(1.0, 1.0).expect("valid parameters");
            let noise_x = args
                .noise_x
                .as_deref()
                .map(parse_noise)
                .transpose()?
                .or(both)
                .unwrap_or_else(pareto11);
            let noise_y = args
                .noise_y
                .as_deref()
                .map(parse_noise)
                .transpose()?
                .or(both)
                .unwrap_or_else(pareto11);
            Ok(Preset::Model1 {
                delta,
                noise_x,
                noise_y,
            })
        }
        "model3" => {
            forbid(args.delta.is_some(), "--delta", "model3")?;
            forbid(args.noise.is_some(), "--noise", "model3")?;
            forbid(args.noise_x.is_some(), "--noise-x", "model3")?;
            forbid(args.noise_y.is_some(), "--noise-y", "model3")?;
            let [theta_x, theta_y, theta_z] = match &args.theta {
                Some(raw) => parse_theta(raw)?,
                None => [1, 1, 1],
            };
            Ok(Preset::Model3 {
                delta_x: args.delta_x.unwrap_or(0.0),
                delta_y: args.delta_y.unwrap_or(0.0),
                theta_x,
                theta_y,
                theta_z,
            })
        }
        _ => Err(usage(format!(
            "unknown model {name:?}; presets: motivating, example1, example2, example3, \
             model1, model2, model3, model4"
        ))),
    }
}

#[derive(Serialize)]
struct PairOut<T: Serialize> {
    forward: T,
    reverse: T,
}

fn gamma_row(from: &Series, to: &Series, est: &GammaEstimate) -> Vec<String> {
    vec![
        csv_field(&format!("{}->{}", from.name(), to.name())),
        fmt_num(est.value),
        est.p.to_string(),
        est.k.to_string(),
        variant_cell(est.variant).to_string(),
        est.n.to_string(),
        est.selected_count.to_string(),
        divisor_cell(est.divisor_mode).to_string(),
    ]
}

fn cmd_gamma(g: &GlobalArgs, args: &PairArgs, format: OutputFormat) -> Result<String, CliError> {
    let (x, y) = load_pair(args)?;
    let p = require_p(g, "gamma")?;
    let k = pick_k(g, x.len());
    let variant = g.variant.to_variant();
    let fwd = causal_tail_estimate(&x, &y, p, k, variant, DivisorMode::PaperK)?;
    let rev = causal_tail_estimate(&y, &x, p, k, variant, DivisorMode::PaperK)?;
    match format {
        OutputFormat::Csv => Ok(csv_table(
            g.seed,
            &["direction", "value", "p", "k", "variant", "n", "selected_count", "divisor"],
            vec![gamma_row(&x, &y, &fwd), gamma_row(&y, &x, &rev)],
        )),
        OutputFormat::Json => envelope(
            g.seed,
            PairOut {
                forward: fwd,
                reverse: rev,
            },
        ),
    }
}

fn sweep_rows(grid: &[usize], fwd: &[GammaEstimate], rev: &[GammaEstimate]) -> Vec<Vec<String>> {
    grid.iter()
        .zip(fwd.iter().zip(rev))
        .map(|(&g, (f, r))| vec![g.to_string(), fmt_num(f.value), fmt_num(r.value)])
        .collect()
}

fn cmd_sweep_p(g: &GlobalArgs, args: &SweepArgs, format: OutputFormat) -> Result<String, CliError> {
    let (x, y) = load_pair(&args.pair)?;
    let grid = match &args.grid {
        Some(raw) => normalize_grid(parse_list(raw, "grid")?),
        None => {
            let hi = g.p.unwrap_or(12);
            let lo = usize::from(matches!(g.variant, VariantArg::No0));
            if hi < lo {
                return Err(usage("--p must be at least 1 for the no0 variant"));
            }
            (lo..=hi).collect()
        }
    };
    let k = pick_k(g, x.len());
    let res = sweep_p(&x, &y, &grid, k, g.variant.to_variant())?;
    match format {
        OutputFormat::Csv => Ok(csv_table(
            g.seed,
            &["p", "gamma_xy", "gamma_yx"],
            sweep_rows(&res.grid, &res.forward, &res.reverse),
        )),
        OutputFormat::Json => envelope(g.seed, res),
    }
}

/// Default k grid for sweep-k: a rough geometric spread, clipped below n.
const K_GRID_DEFAULT: [usize; 16] = [
    5, 10, 15, 20, 25, 30, 40, 50, 60, 80, 100, 125, 160, 200, 250, 300,
];

fn cmd_sweep_k(g: &GlobalArgs, args: &SweepArgs, format: OutputFormat) -> Result<String, CliError> {
    let (x, y) = load_pair(&args.pair)?;
    let p = require_p(g, "sweep-k")?;
    let grid = match &args.grid {
        Some(raw) => normalize_grid(parse_list(raw, "grid")?),
        None => {
            let grid: Vec<usize> = K_GRID_DEFAULT.iter().copied().filter(|&k| k < x.len()).collect();
            if grid.is_empty() {
                return Err(usage("series too short for the default k grid; pass --grid"));
            }
            grid
        }
    };
    let res = sweep_k(&x, &y, p, &grid, g.variant.to_variant())?;
    match format {
        OutputFormat::Csv => Ok(csv_table(
            g.seed,
            &["k", "gamma_xy", "gamma_yx"],
            sweep_rows(&res.grid, &res.forward, &res.reverse),
        )),
        OutputFormat::Json => envelope(g.seed, res),
    }
}

#[derive(Serialize)]
struct MinDelayOut {
    minimal_delay: Option<usize>,
    tau: f64,
    p_max: usize,
}

fn cmd_min_delay(g: &GlobalArgs, args: &PairArgs, format: OutputFormat) -> Result<String, CliError> {
    let (x, y) = load_pair(args)?;
    let k = pick_k(g, x.len());
    let p_max = g.p.unwrap_or(12);
    let found = minimal_delay(&x, &y, k, g.tau_hi, p_max, g.variant.to_variant())?;
    match format {
        OutputFormat::Csv => Ok(csv_table(
            g.seed,
            &["minimal_delay", "tau", "p_max"],
            vec![vec![
                found.map(|d| d.to_string()).unwrap_or_default(),
                fmt_num(g.tau_hi),
                p_max.to_string(),
            ]],
        )),
        OutputFormat::Json => envelope(
            g.seed,
            MinDelayOut {
                minimal_delay: found,
                tau: g.tau_hi,
                p_max,
            },
        ),
    }
}

fn cmd_extremogram(
    g: &GlobalArgs,
    args: &PairArgs,
    format: OutputFormat,
) -> Result<String, CliError> {
    let (x, y) = load_pair(args)?;
    let k = pick_k(g, x.len());
    let h_max = g.p.unwrap_or(12);
    let h_grid: Vec<usize> = (0..=h_max).collect();
    let res = cross_extremogram(&x, &y, &h_grid, k)?;
    match format {
        OutputFormat::Csv => Ok(csv_table(
            g.seed,
            &["h", "conditioning_count", "frequency"],
            res.points
                .iter()
                .map(|pt| {
                    vec![
                        pt.h.to_string(),
                        pt.conditioning_count.to_string(),
                        pt.frequency.map(fmt_num).unwrap_or_default(),
                    ]
                })
                .collect(),
        )),
        OutputFormat::Json => envelope(g.seed, res),
    }
}

fn cmd_tailindex(
    g: &GlobalArgs,
    args: &TailindexArgs,
    format: OutputFormat,
) -> Result<String, CliError> {
    let names = [args.column.clone()];
    let data = ingest_csv(&args.input.input, Some(&names), args.input.missing)?;
    let series = data.column(&args.column)?;
    let k = pick_k(g, series.len());
    let est = hill_estimate(series, k, args.confidence)?;
    match format {
        OutputFormat::Csv => Ok(csv_table(
            g.seed,
            &["column", "gamma_hat", "k", "ci_low", "ci_high", "confidence"],
            vec![vec![
                csv_field(series.name()),
                fmt_num(est.gamma_hat),
                est.k_used.to_string(),
                fmt_num(est.ci_low),
                fmt_num(est.ci_high),
                fmt_num(est.confidence_level),
            ]],
        )),
        OutputFormat::Json => envelope(g.seed, est),
    }
}

fn granger_row(from: &Series, to: &Series, alpha: f64, res: &GrangerResult) -> Vec<String> {
    vec![
        csv_field(&format!("{}->{}", from.name(), to.name())),
        fmt_num(res.f_statistic),
        fmt_num(res.p_value),
        res.order.to_string(),
        res.dof.0.to_string(),
        res.dof.1.to_string(),
        fmt_num(alpha),
        res.reject_at[0].1.to_string(),
    ]
}

fn cmd_granger(g: &GlobalArgs, args: &GrangerArgs, format: OutputFormat) -> Result<String, CliError> {
    let (x, y) = load_pair(&args.pair)?;
    let fwd = granger_test(&x, &y, args.order, &[args.alpha])?;
    let rev = granger_test(&y, &x, args.order, &[args.alpha])?;
    match format {
        OutputFormat::Csv => Ok(csv_table(
            g.seed,
            &["direction", "f_statistic", "p_value", "order", "dof_num", "dof_den", "alpha", "reject"],
            vec![
                granger_row(&x, &y, args.alpha, &fwd),
                granger_row(&y, &x, args.alpha, &rev),
            ],
        )),
        OutputFormat::Json => envelope(
            g.seed,
            PairOut {
                forward: fwd,
                reverse: rev,
            },
        ),
    }
}

fn cmd_graph(g: &GlobalArgs, args: &GraphArgs, format: OutputFormat) -> Result<String, CliError> {
    let names: Option<Vec<String>> = match &args.columns {
        Some(raw) => Some(parse_names(raw, "columns")?),
        None => None,
    };
    let data = ingest_csv(&args.input.input, names.as_deref(), args.input.missing)?;
    let series = data.columns().to_vec();
    let p = require_p(g, "graph")?;
    let k = pick_k(g, series[0].len());
    let graph = build_graph(&series, p, k, g.tau_hi, g.tau_lo, g.variant.to_variant())?;
    match format {
        OutputFormat::Csv => {
            let mut rows: Vec<Vec<String>> = graph
                .edges
                .iter()
                .map(|e| {
                    vec![
                        "edge".to_string(),
                        csv_field(&e.from),
                        csv_field(&e.to),
                        fmt_num(e.decision.gamma_xy.value),
                        fmt_num(e.decision.gamma_yx.value),
                    ]
                })
                .collect();
            rows.extend(graph.ambiguous.iter().map(|(a, b)| {
                vec![
                    "ambiguous".to_string(),
                    csv_field(a),
                    csv_field(b),
                    String::new(),
                    String::new(),
                ]
            }));
            Ok(csv_table(
                g.seed,
                &["kind", "from", "to", "gamma_fwd", "gamma_rev"],
                rows,
            ))
        }
        OutputFormat::Json => envelope(g.seed, graph.export_json()),
    }
}

fn cmd_bench(g: &GlobalArgs, args: &BenchArgs, format: OutputFormat) -> Result<String, CliError> {
    let mut spec = ExperimentSpec::with_defaults(args.experiment, g.seed);
    if let Some(reps) = args.reps {
        spec.reps = reps;
    }
    if let Some(n) = args.n {
        spec.n = n;
    }
    spec = spec.scaled(args.scale);
    spec.keep_raw = args.keep_raw;
    spec.overrides.delta = args.delta;
    spec.overrides.delta_x = args.delta_x;
    spec.overrides.delta_y = args.delta_y;
    spec.overrides.k = g.k;
    spec.overrides.p = g.p;
    if let Some(raw) = &args.theta {
        spec.overrides.theta = Some(parse_theta(raw)?);
    }
    if let Some(raw) = &args.tau_grid {
        spec.overrides.tau_grid = Some(parse_list(raw, "tau-grid")?);
    }
    if let Some(raw) = &args.k_grid {
        spec.overrides.k_grid = Some(normalize_grid(parse_list(raw, "k-grid")?));
    }
    if let Some(raw) = &args.p_grid {
        spec.overrides.p_grid = Some(normalize_grid(parse_list(raw, "p-grid")?));
    }
    let summary = run_experiment(&spec, args.parallelism.max(1))?;
    match format {
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            summary
                .write_csv_with_preamble(&mut buf, &[("command".to_string(), command_line())])
                .expect("write to memory");
            Ok(String::from_utf8(buf).expect("utf-8 table"))
        }
        OutputFormat::Json => envelope(g.seed, summary),
    }
}

fn cmd_preprocess(
    g: &GlobalArgs,
    args: &PreprocessArgs,
    format: OutputFormat,
) -> Result<String, CliError> {
    let names: Option<Vec<String>> = match &args.columns {
        Some(raw) => Some(parse_names(raw, "columns")?),
        None => None,
    };
    let data = ingest_csv(&args.input.input, names.as_deref(), args.input.missing)?;
    // Fixed application order, whatever the flag order on the command line.
    let mut steps = Vec::new();
    if let Some(period) = args.seasonal {
        steps.push(PrepStep::SeasonalAnomaly { period });
    }
    if args.detrend {
        steps.push(PrepStep::LinearDetrend);
    }
    if args.difference {
        steps.push(PrepStep::Difference);
    }
    if args.negate {
        steps.push(PrepStep::Negate);
    }
    let columns = data
        .columns()
        .iter()
        .map(|s| preprocess(s, &steps))
        .collect::<Result<Vec<_>, _>>()?;
    match format {
        OutputFormat::Csv => Ok(series_table(g.seed, &columns)),
        OutputFormat::Json => series_json(g.seed, &columns),
    }
}
