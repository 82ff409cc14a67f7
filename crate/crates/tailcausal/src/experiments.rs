//! Monte Carlo harness producing the reference tables and figure data.
//!
//! Each experiment id names a fixed grid of cells (model x parameters x
//! sample size). Repetition `r` of a cell derives its seed from the master
//! seed, the cell, and `r` alone, and aggregation always walks repetitions
//! in index order, so a summary is bit-identical for every worker count.

use crate::analysis::{sweep_k, sweep_p, AnalysisError};
use crate::estimator::{causal_tail_estimate, default_k, DivisorMode, EstimatorError, GammaVariant};
use crate::granger::{granger_test, GrangerError};
use crate::preset::{ModelError, ModelSpec, Preset};
use crate::rng::NoiseSpec;
use crate::series::Series;
use crate::var::SimError;
use serde::{Deserialize, Serialize};
use std::io;
use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("reps must be at least 1")]
    NoReps,
    #[error("n = {n} is too small for a meaningful run (need n >= 50)")]
    SampleTooSmall { n: usize },
    #[error("override grid must be non-empty")]
    EmptyGrid,
    #[error("unknown experiment id '{0}'")]
    UnknownId(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Granger(#[from] GrangerError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    /// Noise family x delta x n sweep of Γ̂(2) on the lag-2 VAR.
    Table1,
    /// Γ̂-threshold rule vs. a Granger baseline on the VAR(2) and the
    /// hidden-confounder NAAR, with placeholder rows for external methods.
    Table2,
    /// Confounded three-channel VAR across causal cases and tail indexes.
    Table3,
    /// Per-repetition Γ̂(2) values on the Cauchy VAR(2) (histogram data).
    Fig3Hist,
    /// Both directions of Γ̂(2) as a function of k.
    Fig4Ksweep,
    /// Both directions of Γ̂(p) as a function of p on the lag-6 VAR.
    Fig5Psweep,
    /// Success-rate curves over the decision threshold τ.
    Fig67Tau,
    /// Monte Carlo check of the analytic limits for the lag-1 VAR.
    Example1Limit,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 8] = [
        ExperimentId::Table1,
        ExperimentId::Table2,
        ExperimentId::Table3,
        ExperimentId::Fig3Hist,
        ExperimentId::Fig4Ksweep,
        ExperimentId::Fig5Psweep,
        ExperimentId::Fig67Tau,
        ExperimentId::Example1Limit,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ExperimentId::Table1 => "table1",
            ExperimentId::Table2 => "table2",
            ExperimentId::Table3 => "table3",
            ExperimentId::Fig3Hist => "fig3_hist",
            ExperimentId::Fig4Ksweep => "fig4_ksweep",
            ExperimentId::Fig5Psweep => "fig5_psweep",
            ExperimentId::Fig67Tau => "fig67_tau",
            ExperimentId::Example1Limit => "example1_limit",
        }
    }
}

impl std::fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for ExperimentId {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<ExperimentId, ExperimentError> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.label() == s)
            .ok_or_else(|| ExperimentError::UnknownId(s.to_string()))
    }
}

/// Optional deviations from an experiment's canonical grid. Fields that a
/// given experiment does not use are ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Overrides {
    /// Cross coefficient of the bivariate VAR; restricts every noise block
    /// of `table1` to this single value.
    pub delta: Option<f64>,
    /// Cross coefficients of the confounded VAR (`table3`); setting any of
    /// `delta_x`, `delta_y`, `theta` replaces the canonical cases with one.
    pub delta_x: Option<f64>,
    pub delta_y: Option<f64>,
    /// Noise degrees of freedom (θ_X, θ_Y, θ_Z) for `table3`.
    pub theta: Option<[u32; 3]>,
    /// Fixed k where the experiment uses a single k rule.
    pub k: Option<usize>,
    /// Fixed extremal delay where the experiment uses a single p.
    pub p: Option<usize>,
    /// Threshold grid for `fig67_tau`.
    pub tau_grid: Option<Vec<f64>>,
    /// Grid for `fig4_ksweep`.
    pub k_grid: Option<Vec<usize>>,
    /// Grid for `fig5_psweep` and the p-axis of `fig67_tau`.
    pub p_grid: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub id: ExperimentId,
    pub reps: usize,
    /// Single-n experiments use this directly; grid experiments run their
    /// canonical sample sizes up to and including it.
    pub n: usize,
    pub seed: u64,
    #[serde(default)]
    pub overrides: Overrides,
    /// Keep the per-repetition values behind each aggregated row.
    #[serde(default)]
    pub keep_raw: bool,
}

impl ExperimentSpec {
    /// Canonical repetition counts and sample sizes per experiment.
    pub fn with_defaults(id: ExperimentId, seed: u64) -> ExperimentSpec {
        let (reps, n) = match id {
            ExperimentId::Table1 => (200, 10_000),
            ExperimentId::Table2 => (100, 5_000),
            ExperimentId::Table3 => (500, 1_000),
            ExperimentId::Fig3Hist => (1_000, 5_000),
            ExperimentId::Fig4Ksweep => (100, 1_000),
            ExperimentId::Fig5Psweep => (100, 1_000),
            ExperimentId::Fig67Tau => (200, 500),
            ExperimentId::Example1Limit => (20, 1_000_000),
        };
        ExperimentSpec { id, reps, n, seed, overrides: Overrides::default(), keep_raw: false }
    }

    /// Divide the repetition count (floor, at least 1) for quick runs.
    pub fn scaled(mut self, factor: usize) -> ExperimentSpec {
        if factor > 1 {
            self.reps = (self.reps / factor).max(1);
        }
        self
    }

    fn validate(&self) -> Result<(), ExperimentError> {
        if self.reps == 0 {
            return Err(ExperimentError::NoReps);
        }
        if self.n < 50 {
            return Err(ExperimentError::SampleTooSmall { n: self.n });
        }
        let empty = |len: Option<usize>| len == Some(0);
        if empty(self.overrides.tau_grid.as_ref().map(Vec::len))
            || empty(self.overrides.k_grid.as_ref().map(Vec::len))
            || empty(self.overrides.p_grid.as_ref().map(Vec::len))
        {
            return Err(ExperimentError::EmptyGrid);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub labels: Vec<String>,
    /// Aligned with `value_columns`; `None` renders as an empty CSV cell.
    pub values: Vec<Option<f64>>,
    pub note: Option<String>,
}

impl SummaryRow {
    fn numeric(labels: Vec<String>, values: Vec<f64>) -> SummaryRow {
        SummaryRow { labels, values: values.into_iter().map(Some).collect(), note: None }
    }

    fn external(labels: Vec<String>, width: usize, note: &str) -> SummaryRow {
        SummaryRow { labels, values: vec![None; width], note: Some(note.to_string()) }
    }
}

/// Per-repetition values behind one aggregated quantity, in repetition order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RawSeries {
    pub label: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub id: ExperimentId,
    pub reps: usize,
    pub n: usize,
    pub seed: u64,
    /// Resolved configuration, emitted verbatim as `# key=value` header lines.
    pub config: Vec<(String, String)>,
    pub label_columns: Vec<String>,
    pub value_columns: Vec<String>,
    pub rows: Vec<SummaryRow>,
    pub raw: Option<Vec<RawSeries>>,
}

impl ExperimentSummary {
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        self.write_csv_with_preamble(w, &[])
    }

    /// As `write_csv`, with caller-supplied header lines (e.g. the exact
    /// command line) ahead of the stored configuration.
    pub fn write_csv_with_preamble<W: Write>(
        &self,
        w: &mut W,
        preamble: &[(String, String)],
    ) -> io::Result<()> {
        for (key, value) in preamble.iter().chain(self.config.iter()) {
            writeln!(w, "# {key}={value}")?;
        }
        let has_notes = self.rows.iter().any(|row| row.note.is_some());
        let mut header: Vec<&str> = self
            .label_columns
            .iter()
            .chain(self.value_columns.iter())
            .map(String::as_str)
            .collect();
        if has_notes {
            header.push("note");
        }
        writeln!(w, "{}", header.join(","))?;
        for row in &self.rows {
            let mut fields = row.labels.clone();
            for value in &row.values {
                fields.push(value.map(|v| format!("{v}")).unwrap_or_default());
            }
            if has_notes {
                fields.push(row.note.clone().unwrap_or_default());
            }
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }
}

// --- seeds and worker fan-out ---

/// SplitMix64 step: full-avalanche mixing of a 64-bit word.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for repetition `rep` of grid cell `cell`. Depends only on the
/// arguments, so reruns and any degree of parallelism agree.
fn rep_seed(master: u64, cell: u64, rep: usize) -> u64 {
    mix64(mix64(master ^ mix64(cell)) ^ rep as u64)
}

/// Run `f(0..reps)` on up to `parallelism` workers and return the results
/// indexed by repetition, independent of scheduling.
fn map_reps<T, F>(reps: usize, parallelism: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = parallelism.max(1).min(reps);
    if workers <= 1 {
        return (0..reps).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let collected: Vec<Vec<(usize, T)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                let next = &next;
                let f = &f;
                scope.spawn(move || {
                    let mut mine = Vec::new();
                    loop {
                        let r = next.fetch_add(1, Ordering::Relaxed);
                        if r >= reps {
                            break;
                        }
                        mine.push((r, f(r)));
                    }
                    mine
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|handle| handle.join().expect("experiment worker panicked"))
            .collect()
    });
    let mut slots: Vec<Option<T>> = (0..reps).map(|_| None).collect();
    for (r, value) in collected.into_iter().flatten() {
        slots[r] = Some(value);
    }
    slots.into_iter().map(|slot| slot.expect("repetition not visited")).collect()
}

/// The first failing repetition (in index order) decides the error.
fn run_cell<T, F>(reps: usize, parallelism: usize, run: F) -> Result<Vec<T>, ExperimentError>
where
    T: Send,
    F: Fn(usize) -> Result<T, ExperimentError> + Sync,
{
    map_reps(reps, parallelism, run).into_iter().collect()
}

// --- aggregation ---

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn stderr_of_mean(values: &[f64]) -> f64 {
    let m = values.len();
    if m < 2 {
        return 0.0;
    }
    let mu = mean(values);
    let var = values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (m - 1) as f64;
    (var / m as f64).sqrt()
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Lowest order statistic whose empirical CDF reaches `q`.
fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    let m = sorted.len();
    let idx = (q * m as f64).ceil() as usize;
    sorted[idx.clamp(1, m) - 1]
}

/// The "±" convention of the summary tables: q95 minus the mean.
fn q95_offset(values: &[f64]) -> f64 {
    empirical_quantile(&sorted(values), 0.95) - mean(values)
}

fn percent(count: usize, reps: usize) -> f64 {
    100.0 * count as f64 / reps as f64
}

fn str_vec(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn variant_label(variant: GammaVariant) -> &'static str {
    match variant {
        GammaVariant::Standard => "standard",
        GammaVariant::NoInstantaneous => "no0",
        GammaVariant::AbsoluteValue => "abs",
    }
}

fn divisor_label(mode: DivisorMode) -> &'static str {
    match mode {
        DivisorMode::PaperK => "paper_k",
        DivisorMode::Renormalize => "renormalize",
    }
}

fn base_config(spec: &ExperimentSpec) -> Vec<(String, String)> {
    vec![
        ("version".into(), env!("CARGO_PKG_VERSION").into()),
        ("experiment".into(), spec.id.label().into()),
        ("reps".into(), spec.reps.to_string()),
        ("n".into(), spec.n.to_string()),
        ("seed".into(), spec.seed.to_string()),
    ]
}

/// Unit-root parameterizations (the symmetric feedback loop) are simulated
/// anyway: the zero-start recursion stays finite, only stationarity is
/// lost. Genuinely explosive settings still refuse.
fn simulate_boundary_ok(
    model: &ModelSpec,
    n: usize,
    seed: u64,
) -> Result<Vec<Series>, ExperimentError> {
    match model.simulate(n, seed) {
        Err(ModelError::Var(SimError::Unstable { radius })) if (radius - 1.0).abs() <= 1e-6 => {
            Ok(model.simulate_unchecked(n, seed)?)
        }
        result => Ok(result?),
    }
}

// --- the experiments ---

pub fn run_experiment(
    spec: &ExperimentSpec,
    parallelism: usize,
) -> Result<ExperimentSummary, ExperimentError> {
    spec.validate()?;
    match spec.id {
        ExperimentId::Table1 => run_table1(spec, parallelism),
        ExperimentId::Table2 => run_table2(spec, parallelism),
        ExperimentId::Table3 => run_table3(spec, parallelism),
        ExperimentId::Fig3Hist => run_fig3(spec, parallelism),
        ExperimentId::Fig4Ksweep => run_fig4(spec, parallelism),
        ExperimentId::Fig5Psweep => run_fig5(spec, parallelism),
        ExperimentId::Fig67Tau => run_fig67(spec, parallelism),
        ExperimentId::Example1Limit => run_example1(spec, parallelism),
    }
}

const TABLE1_N: [usize; 3] = [100, 1_000, 10_000];

/// k = ⌊n^{2/5}⌋: slightly fewer extremes than ⌊√n⌋. At these sample sizes
/// the √n choice drags the causal-direction mean visibly below its limit;
/// the smaller order restores it without blowing up the reverse variance.
fn table1_k(n: usize) -> usize {
    (n as f64).powf(0.4).floor() as usize
}

#[derive(Clone, Copy)]
enum Table1Block {
    ParetoPareto,
    GaussGauss,
    ParetoGauss,
    GaussPareto,
}

impl Table1Block {
    const ALL: [Table1Block; 4] = [
        Table1Block::ParetoPareto,
        Table1Block::GaussGauss,
        Table1Block::ParetoGauss,
        Table1Block::GaussPareto,
    ];

    fn label(self) -> &'static str {
        match self {
            Table1Block::ParetoPareto => "pareto-pareto",
            Table1Block::GaussGauss => "gauss-gauss",
            Table1Block::ParetoGauss => "pareto-gauss",
            Table1Block::GaussPareto => "gauss-pareto",
        }
    }

    fn noise(self) -> (NoiseSpec, NoiseSpec) {
        let pareto = NoiseSpec::pareto(1.0, 1.0).expect("static parameters");
        let gauss = NoiseSpec::standard_gaussian();
        match self {
            Table1Block::ParetoPareto => (pareto, pareto),
            Table1Block::GaussGauss => (gauss, gauss),
            Table1Block::ParetoGauss => (pareto, gauss),
            Table1Block::GaussPareto => (gauss, pareto),
        }
    }

    fn deltas(self) -> &'static [f64] {
        match self {
            Table1Block::ParetoPareto | Table1Block::GaussGauss => &[0.1, 0.5, 0.9],
            _ => &[0.5],
        }
    }
}

fn run_table1(
    spec: &ExperimentSpec,
    parallelism: usize,
) -> Result<ExperimentSummary, ExperimentError> {
    let p = spec.overrides.p.unwrap_or(2);
    let variant = GammaVariant::NoInstantaneous;
    let mut config = base_config(spec);
    config.push(("p".into(), p.to_string()));
    config.push(("variant".into(), variant_label(variant).into()));
    config.push(("divisor".into(), divisor_label(DivisorMode::PaperK).into()));
    config.push((
        "k_rule".into(),
        match spec.overrides.k {
            Some(k) => format!("fixed:{k}"),
            None => "floor(n^0.4)".into(),
        },
    ));

    let mut rows = Vec::new();
    let mut raw = spec.keep_raw.then(Vec::new);
    for (bi, block) in Table1Block::ALL.into_iter().enumerate() {
        let single;
        let deltas: &[f64] = match spec.overrides.delta {
            Some(d) => {
                single = [d];
                &single
            }
            None => block.deltas(),
        };
        for (di, &delta) in deltas.iter().enumerate() {
            let (noise_x, noise_y) = block.noise();
            let model = Preset::Model1 { delta, noise_x, noise_y }.spec()?;
            for (ni, &n) in TABLE1_N.iter().enumerate() {
                if n > spec.n {
                    continue;
                }
                let k = spec.overrides.k.unwrap_or_else(|| table1_k(n));
                // cell ids are absolute positions in the full grid, so one
                // cell's stream is unaffected by truncating the n axis
                let cell = ((bi as u64) << 16) | ((di as u64) << 8) | ni as u64;
                let pairs = run_cell(spec.reps, parallelism, |r| {
                    let chs = model.simulate(n, rep_seed(spec.seed, cell, r))?;
                    let fwd =
                        causal_tail_estimate(&chs[0], &chs[1], p, k, variant, DivisorMode::PaperK)?;
                    let rev =
                        causal_tail_estimate(&chs[1], &chs[0], p, k, variant, DivisorMode::PaperK)?;
                    Ok((fwd.value, rev.value))
                })?;
                let (xy, yx): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
                rows.push(SummaryRow::numeric(
                    vec![block.label().to_string(), format!("{delta}"), n.to_string()],
                    vec![mean(&xy), q95_offset(&xy), mean(&yx), q95_offset(&yx)],
                ));
                if let Some(raw) = raw.as_mut() {
                    let tag = format!("{}/delta={delta}/n={n}", block.label());
                    raw.push(RawSeries { label: format!("{tag}/xy"), values: xy });
                    raw.push(RawSeries { label: format!("{tag}/yx"), values: yx });
                }
            }
        }
    }
    Ok(ExperimentSummary {
        id: spec.id,
        reps: spec.reps,
        n: spec.n,
        seed: spec.seed,
        config,
        label_columns: str_vec(&["noise", "delta", "n"]),
        value_columns: str_vec(&["mean_xy", "q95off_xy", "mean_yx", "q95off_yx"]),
        rows,
        raw,
    })
}

const TABLE2_N: [usize; 2] = [500, 5_000];
const EXTERNAL_NOTE: &str = "external — not implemented";

fn run_table2(
    spec: &ExperimentSpec,
    parallelism: usize,
) -> Result<ExperimentSummary, ExperimentError> {
    let p = spec.overrides.p.unwrap_or(3);
    let tau = 0.9;
    let q = 3;
    let variant = GammaVariant::NoInstantaneous;
    let delta = spec.overrides.delta.unwrap_or(0.5);
    let mut config = base_config(spec);
    config.push(("p".into(), p.to_string()));
    config.push(("tau".into(), format!("{tau}")));
    config.push(("variant".into(), variant_label(variant).into()));
    config.push((
        "k_rule".into(),
        match spec.overrides.k {
            Some(k) => format!("fixed:{k}"),
            None => "2*floor(sqrt(n))".into(),
        },
    ));
    config.push(("granger_order".into(), q.to_string()));
    config.push(("granger_alpha".into(), "0.05".into()));

    let models = [
        ("var2", Preset::model1_pareto(delta).spec()?),
        ("hnaar3", Preset::Model4.spec()?),
    ];
    let mut rows = Vec::new();
    let mut raw = spec.keep_raw.then(Vec::new);
    for (mi, (label, model)) in models.iter().enumerate() {
        for (ni, &n) in TABLE2_N.iter().enumerate() {
            if n > spec.n {
                continue;
            }
            let k = spec.overrides.k.unwrap_or_else(|| 2 * default_k(n));
            let cell = ((mi as u64) << 8) | ni as u64;
            let outcomes = run_cell(spec.reps, parallelism, |r| {
                let chs = model.simulate(n, rep_seed(spec.seed, cell, r))?;
                let (x, y) = (&chs[0], &chs[1]);
                let fwd = causal_tail_estimate(x, y, p, k, variant, DivisorMode::PaperK)?.value;
                let rev = causal_tail_estimate(y, x, p, k, variant, DivisorMode::PaperK)?.value;
                let g_xy = granger_test(x, y, q, &[0.05])?;
                let g_yx = granger_test(y, x, q, &[0.05])?;
                Ok(([fwd >= tau, rev < tau, g_xy.reject_at[0].1, !g_yx.reject_at[0].1], fwd, rev))
            })?;
            let count = |idx: usize| outcomes.iter().filter(|(hits, _, _)| hits[idx]).count();
            let labels = |method: &str| vec![label.to_string(), n.to_string(), method.to_string()];
            rows.push(SummaryRow::numeric(
                labels("gamma"),
                vec![percent(count(0), spec.reps), percent(count(1), spec.reps)],
            ));
            rows.push(SummaryRow::numeric(
                labels("granger"),
                vec![percent(count(2), spec.reps), percent(count(3), spec.reps)],
            ));
            rows.push(SummaryRow::external(labels("pcmci"), 2, EXTERNAL_NOTE));
            rows.push(SummaryRow::external(labels("lpcmci"), 2, EXTERNAL_NOTE));
            if let Some(raw) = raw.as_mut() {
                let tag = format!("{label}/n={n}");
                raw.push(RawSeries {
                    label: format!("{tag}/gamma_xy"),
                    values: outcomes.iter().map(|(_, fwd, _)| *fwd).collect(),
                });
                raw.push(RawSeries {
                    label: format!("{tag}/gamma_yx"),
                    values: outcomes.iter().map(|(_, _, rev)| *rev).collect(),
                });
            }
        }
    }
    Ok(ExperimentSummary {
        id: spec.id,
        reps: spec.reps,
        n: spec.n,
        seed: spec.seed,
        config,
        label_columns: str_vec(&["model", "n", "method"]),
        value_columns: str_vec(&["correct_xy_pct", "correct_no_yx_pct"]),
        rows,
        raw,
    })
}

struct Table3Case {
    label: &'static str,
    delta_x: f64,
    delta_y: f64,
    thetas: [[u32; 3]; 3],
}

const TABLE3_CASES: [Table3Case; 4] = [
    Table3Case {
        label: "no-causality",
        delta_x: 0.0,
        delta_y: 0.0,
        thetas: [[1, 1, 1], [1, 1, 2], [2, 2, 1]],
    },
    Table3Case {
        label: "x-to-y",
        delta_x: 1.0,
        delta_y: 0.0,
        thetas: [[1, 1, 1], [1, 1, 2], [2, 2, 1]],
    },
    Table3Case {
        label: "x-to-y-mixed-tails",
        delta_x: 1.0,
        delta_y: 0.0,
        thetas: [[9, 9, 9], [1, 2, 3], [2, 1, 3]],
    },
    Table3Case {
        label: "loop",
        delta_x: 0.5,
        delta_y: 0.5,
        thetas: [[1, 1, 1], [1, 2, 3], [3, 2, 1]],
    },
];

fn run_table3(
    spec: &ExperimentSpec,
    parallelism: usize,
) -> Result<ExperimentSummary, ExperimentError> {
    let p = spec.overrides.p.unwrap_or(3);
    let variant = GammaVariant::Standard;
    let k = spec.overrides.k.unwrap_or_else(|| 2 * default_k(spec.n));
    let mut config = base_config(spec);
    config.push(("p".into(), p.to_string()));
    config.push(("variant".into(), variant_label(variant).into()));
    config.push(("divisor".into(), divisor_label(DivisorMode::PaperK).into()));
    config.push(("k".into(), k.to_string()));

    let o = &spec.overrides;
    let custom;
    let cases: &[Table3Case] =
        if o.delta_x.is_some() || o.delta_y.is_some() || o.theta.is_some() {
            custom = [Table3Case {
                label: "custom",
                delta_x: o.delta_x.unwrap_or(0.0),
                delta_y: o.delta_y.unwrap_or(0.0),
                thetas: [o.theta.unwrap_or([1, 1, 1]); 3],
            }];
            &custom[..1]
        } else {
            &TABLE3_CASES
        };
    let theta_count = if cases.len() == 1 && cases[0].label == "custom" { 1 } else { 3 };

    let mut rows = Vec::new();
    let mut raw = spec.keep_raw.then(Vec::new);
    for (ci, case) in cases.iter().enumerate() {
        for (ti, &[tx, ty, tz]) in case.thetas.iter().take(theta_count).enumerate() {
            let model = Preset::Model3 {
                delta_x: case.delta_x,
                delta_y: case.delta_y,
                theta_x: tx,
                theta_y: ty,
                theta_z: tz,
            }
            .spec()?;
            let cell = ((ci as u64) << 8) | ti as u64;
            let pairs = run_cell(spec.reps, parallelism, |r| {
                let chs = simulate_boundary_ok(&model, spec.n, rep_seed(spec.seed, cell, r))?;
                let fwd =
                    causal_tail_estimate(&chs[0], &chs[1], p, k, variant, DivisorMode::PaperK)?;
                let rev =
                    causal_tail_estimate(&chs[1], &chs[0], p, k, variant, DivisorMode::PaperK)?;
                Ok((fwd.value, rev.value))
            })?;
            let (xy, yx): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let diff: Vec<f64> = xy.iter().zip(&yx).map(|(a, b)| a - b).collect();
            let diff_sorted = sorted(&diff);
            rows.push(SummaryRow::numeric(
                vec![
                    case.label.to_string(),
                    format!("{}", case.delta_x),
                    format!("{}", case.delta_y),
                    tx.to_string(),
                    ty.to_string(),
                    tz.to_string(),
                ],
                vec![
                    mean(&xy),
                    q95_offset(&xy),
                    mean(&yx),
                    q95_offset(&yx),
                    mean(&diff),
                    empirical_quantile(&diff_sorted, 0.05),
                    empirical_quantile(&diff_sorted, 0.95),
                ],
            ));
            if let Some(raw) = raw.as_mut() {
                let tag = format!("{}/theta={tx},{ty},{tz}", case.label);
                raw.push(RawSeries { label: format!("{tag}/xy"), values: xy });
                raw.push(RawSeries { label: format!("{tag}/yx"), values: yx });
            }
        }
    }
    Ok(ExperimentSummary {
        id: spec.id,
        reps: spec.reps,
        n: spec.n,
        seed: spec.seed,
        config,
        label_columns: str_vec(&["case", "delta_x", "delta_y", "theta_x", "theta_y", "theta_z"]),
        value_columns: str_vec(&[
            "mean_xy",
            "q95off_xy",
            "mean_yx",
            "q95off_yx",
            "diff_mean",
            "diff_q05",
            "diff_q95",
        ]),
        rows,
        raw,
    })
}

fn run_fig3(
    spec: &ExperimentSpec,
    parallelism: usize,
) -> Result<ExperimentSummary, ExperimentError> {
    let delta = spec.overrides.delta.unwrap_or(0.5);
    let p = spec.overrides.p.unwrap_or(2);
    let k = spec.overrides.k.unwrap_or_else(|| default_k(spec.n));
    let variant = GammaVariant::Standard;
    let model = Preset::Model1 {
        delta,
        noise_x: NoiseSpec::cauchy(),
        noise_y: NoiseSpec::cauchy(),
    }
    .spec()?;
    let mut config = base_config(spec);
    config.push(("delta".into(), format!("{delta}")));
    config.push(("noise".into(), "cauchy".into()));
    config.push(("p".into(), p.to_string()));
    config.push(("k".into(), k.to_string()));
    config.push(("variant".into(), variant_label(variant).into()));

    let pairs = run_cell(spec.reps, parallelism, |r| {
        let chs = model.simulate(spec.n, rep_seed(spec.seed, 0, r))?;
        let fwd = causal_tail_estimate(&chs[0], &chs[1], p, k, variant, DivisorMode::PaperK)?;
        let rev = causal_tail_estimate(&chs[1], &chs[0], p, k, variant, DivisorMode::PaperK)?;
        Ok((fwd.value, rev.value))
    })?;
    let rows = pairs
        .iter()
        .enumerate()
        .map(|(r, &(xy, yx))| SummaryRow::numeric(vec![r.to_string()], vec![xy, yx]))
        .collect();
    Ok(ExperimentSummary {
        id: spec.id,
        reps: spec.reps,
        n: spec.n,
        seed: spec.seed,
        config,
        label_columns: str_vec(&["rep"]),
        value_columns: str_vec(&["gamma_xy", "gamma_yx"]),
        rows,
        raw: None,
    })
}

const FIG4_K_GRID: [usize; 16] =
    [5, 10, 15, 20, 25, 30, 40, 50, 60, 80, 100, 125, 160, 200, 250, 300];

fn run_fig4(
    spec: &ExperimentSpec,
    parallelism: usize,
) -> Result<ExperimentSummary, ExperimentError> {
    let delta = spec.overrides.delta.unwrap_or(0.5);
    let p = spec.overrides.p.unwrap_or(2);
    let variant = GammaVariant::NoInstantaneous;
    let model = Preset::model1_pareto(delta).spec()?;
    let grid: Vec<usize> = match &spec.overrides.k_grid {
        Some(grid) => grid.clone(),
        None => FIG4_K_GRID.into_iter().filter(|&k| k <= spec.n).collect(),
    };
    let mut config = base_config(spec);
    config.push(("delta".into(), format!("{delta}")));
    config.push(("p".into(), p.to_string()));
    config.push(("variant".into(), variant_label(variant).into()));
    config.push((
        "k_grid".into(),
        grid.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" "),
    ));

    let per_rep = run_cell(spec.reps, parallelism, |r| {
        let chs = model.simulate(spec.n, rep_seed(spec.seed, 0, r))?;
        let sweep = sweep_k(&chs[0], &chs[1], p, &grid, variant)?;
        let fwd: Vec<f64> = sweep.forward.iter().map(|e| e.value).collect();
        let rev: Vec<f64> = sweep.reverse.iter().map(|e| e.value).collect();
        Ok((fwd, rev))
    })?;
    let rows = grid_sweep_rows(&grid, &per_rep);
    let raw = spec.keep_raw.then(|| grid_sweep_raw("k", &grid, &per_rep));
    Ok(ExperimentSummary {
        id: spec.id,
        reps: spec.reps,
        n: spec.n,
        seed: spec.seed,
        config,
        label_columns: str_vec(&["k"]),
        value_columns: sweep_value_columns(),
        rows,
        raw,
    })
}

fn run_fig5(
    spec: &ExperimentSpec,
    parallelism: usize,
) -> Result<ExperimentSummary, ExperimentError> {
    let variant = GammaVariant::Standard;
    let k = spec.overrides.k.unwrap_or_else(|| default_k(spec.n));
    let model = Preset::Model2.spec()?;
    let grid: Vec<usize> = match &spec.overrides.p_grid {
        Some(grid) => grid.clone(),
        None => (0..=12).collect(),
    };
    let mut config = base_config(spec);
    config.push(("k".into(), k.to_string()));
    config.push(("variant".into(), variant_label(variant).into()));
    config.push((
        "p_grid".into(),
        grid.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" "),
    ));

    let per_rep = run_cell(spec.reps, parallelism, |r| {
        let chs = model.simulate(spec.n, rep_seed(spec.seed, 0, r))?;
        let sweep = sweep_p(&chs[0], &chs[1], &grid, k, variant)?;
        let fwd: Vec<f64> = sweep.forward.iter().map(|e| e.value).collect();
        let rev: Vec<f64> = sweep.reverse.iter().map(|e| e.value).collect();
        Ok((fwd, rev))
    })?;
    let rows = grid_sweep_rows(&grid, &per_rep);
    let raw = spec.keep_raw.then(|| grid_sweep_raw("p", &grid, &per_rep));
    Ok(ExperimentSummary {
        id: spec.id,
        reps: spec.reps,
        n: spec.n,
        seed: spec.seed,
        config,
        label_columns: str_vec(&["p"]),
        value_columns: sweep_value_columns(),
        rows,
        raw,
    })
}

fn sweep_value_columns() -> Vec<String> {
    str_vec(&["mean_xy", "q05_xy", "q95_xy", "mean_yx", "q05_yx", "q95_yx"])
}

/// Per grid point: mean and the 5%/95% empirical band, both directions.
fn grid_sweep_rows(grid: &[usize], per_rep: &[(Vec<f64>, Vec<f64>)]) -> Vec<SummaryRow> {
    grid.iter()
        .enumerate()
        .map(|(gi, &g)| {
            let xy: Vec<f64> = per_rep.iter().map(|(fwd, _)| fwd[gi]).collect();
            let yx: Vec<f64> = per_rep.iter().map(|(_, rev)| rev[gi]).collect();
            let (xy_sorted, yx_sorted) = (sorted(&xy), sorted(&yx));
            SummaryRow::numeric(
                vec![g.to_string()],
                vec![
                    mean(&xy),
                    empirical_quantile(&xy_sorted, 0.05),
                    empirical_quantile(&xy_sorted, 0.95),
                    mean(&yx),
                    empirical_quantile(&yx_sorted, 0.05),
                    empirical_quantile(&yx_sorted, 0.95),
                ],
            )
        })
        .collect()
}

fn grid_sweep_raw(
    axis: &str,
    grid: &[usize],
    per_rep: &[(Vec<f64>, Vec<f64>)],
) -> Vec<RawSeries> {
    let mut raw = Vec::new();
    for (gi, &g) in grid.iter().enumerate() {
        raw.push(RawSeries {
            label: format!("{axis}={g}/xy"),
            values: per_rep.iter().map(|(fwd, _)| fwd[gi]).collect(),
        });
        raw.push(RawSeries {
            label: format!("{axis}={g}/yx"),
            values: per_rep.iter().map(|(_, rev)| rev[gi]).collect(),
        });
    }
    raw
}

fn run_fig67(
    spec: &ExperimentSpec,
    parallelism: usize,
) -> Result<ExperimentSummary, ExperimentError> {
    let delta = spec.overrides.delta.unwrap_or(0.5);
    let model = Preset::model1_pareto(delta).spec()?;
    let p_values = spec.overrides.p_grid.clone().unwrap_or_else(|| vec![1, 6, 11]);
    let tau_grid = spec
        .overrides
        .tau_grid
        .clone()
        .unwrap_or_else(|| (80..=99).map(|t| t as f64 / 100.0).collect());
    let cfg = TauEstimatorConfig::default();
    let mut config = base_config(spec);
    config.push(("delta".into(), format!("{delta}")));
    config.push(("variant".into(), variant_label(cfg.variant).into()));
    config.push(("divisor".into(), divisor_label(cfg.divisor).into()));
    config.push(("k_rule".into(), format!("floor({}*sqrt(n))", cfg.k_factor)));
    config.push((
        "p_grid".into(),
        p_values.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" "),
    ));

    let grid = TauGrid::OverP { n: spec.n, p_values };
    let curves =
        tau_sensitivity(&model, &grid, &tau_grid, spec.reps, spec.seed, parallelism, &cfg)?;
    let rows = curves
        .points
        .iter()
        .map(|pt| {
            SummaryRow::numeric(
                vec![pt.grid_value.to_string(), format!("{}", pt.tau)],
                vec![pt.pct_conclude_xy, pt.pct_conclude_not_yx],
            )
        })
        .collect();
    Ok(ExperimentSummary {
        id: spec.id,
        reps: spec.reps,
        n: spec.n,
        seed: spec.seed,
        config,
        label_columns: str_vec(&["p", "tau"]),
        value_columns: str_vec(&["conclude_xy_pct", "conclude_no_yx_pct"]),
        rows,
        raw: None,
    })
}

fn run_example1(
    spec: &ExperimentSpec,
    parallelism: usize,
) -> Result<ExperimentSummary, ExperimentError> {
    let k = spec.overrides.k.unwrap_or(1_000);
    let limit = example1_limit_check(spec.n, k, spec.reps, spec.seed, parallelism)?;
    let mut config = base_config(spec);
    config.push(("k".into(), k.to_string()));
    let row = |label: &str, stat: LimitStat| {
        SummaryRow::numeric(vec![label.to_string()], vec![stat.mean, stat.stderr])
    };
    Ok(ExperimentSummary {
        id: spec.id,
        reps: spec.reps,
        n: spec.n,
        seed: spec.seed,
        config,
        label_columns: str_vec(&["quantity"]),
        value_columns: str_vec(&["mean", "stderr"]),
        rows: vec![
            row("gamma_yx_no0_p1", limit.yx_no0_p1),
            row("gamma_yx_std_p2", limit.yx_std_p2),
            row("gamma_xy_no0_p1", limit.xy_no0_p1),
        ],
        raw: None,
    })
}

// --- threshold sensitivity ---

/// Which axis the success-rate curves walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TauGrid {
    /// Vary the extremal delay at a fixed sample size.
    OverP { n: usize, p_values: Vec<usize> },
    /// Vary the sample size at a fixed extremal delay.
    OverN { p: usize, n_values: Vec<usize> },
}

/// Estimator settings for the threshold curves; k scales with √n so the
/// rule stays meaningful along an n axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauEstimatorConfig {
    pub variant: GammaVariant,
    pub divisor: DivisorMode,
    pub k_factor: f64,
}

impl Default for TauEstimatorConfig {
    fn default() -> TauEstimatorConfig {
        TauEstimatorConfig {
            variant: GammaVariant::NoInstantaneous,
            divisor: DivisorMode::Renormalize,
            k_factor: 1.2,
        }
    }
}

impl TauEstimatorConfig {
    pub fn k_for(&self, n: usize) -> usize {
        ((self.k_factor * (n as f64).sqrt()).floor() as usize).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauCurvePoint {
    /// p or n, depending on the grid axis.
    pub grid_value: usize,
    pub tau: f64,
    /// Share of repetitions with Γ̂_{X→Y} ≥ τ, in percent.
    pub pct_conclude_xy: f64,
    /// Share of repetitions with Γ̂_{Y→X} < τ, in percent.
    pub pct_conclude_not_yx: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauCurves {
    /// "p" or "n".
    pub axis: String,
    pub points: Vec<TauCurvePoint>,
}

pub fn tau_sensitivity(
    model: &ModelSpec,
    grid: &TauGrid,
    tau_grid: &[f64],
    reps: usize,
    seed: u64,
    parallelism: usize,
    cfg: &TauEstimatorConfig,
) -> Result<TauCurves, ExperimentError> {
    if reps == 0 {
        return Err(ExperimentError::NoReps);
    }
    if tau_grid.is_empty() {
        return Err(ExperimentError::EmptyGrid);
    }
    // gammas[g][r] = (Γ̂_{X→Y}, Γ̂_{Y→X}) at grid point g, repetition r
    let (axis, grid_points, gammas): (&str, Vec<usize>, Vec<Vec<(f64, f64)>>) = match grid {
        TauGrid::OverP { n, p_values } => {
            if p_values.is_empty() {
                return Err(ExperimentError::EmptyGrid);
            }
            let k = cfg.k_for(*n);
            // one simulation serves every p
            let per_rep = run_cell(reps, parallelism, |r| {
                let chs = model.simulate(*n, rep_seed(seed, 0, r))?;
                p_values
                    .iter()
                    .map(|&p| {
                        let fwd =
                            causal_tail_estimate(&chs[0], &chs[1], p, k, cfg.variant, cfg.divisor)?;
                        let rev =
                            causal_tail_estimate(&chs[1], &chs[0], p, k, cfg.variant, cfg.divisor)?;
                        Ok((fwd.value, rev.value))
                    })
                    .collect::<Result<Vec<_>, ExperimentError>>()
            })?;
            let by_grid = (0..p_values.len())
                .map(|g| per_rep.iter().map(|v| v[g]).collect())
                .collect();
            ("p", p_values.clone(), by_grid)
        }
        TauGrid::OverN { p, n_values } => {
            if n_values.is_empty() {
                return Err(ExperimentError::EmptyGrid);
            }
            let by_grid = n_values
                .iter()
                .enumerate()
                .map(|(gi, &n)| {
                    let k = cfg.k_for(n);
                    run_cell(reps, parallelism, |r| {
                        let chs = model.simulate(n, rep_seed(seed, gi as u64, r))?;
                        let fwd =
                            causal_tail_estimate(&chs[0], &chs[1], *p, k, cfg.variant, cfg.divisor)?;
                        let rev =
                            causal_tail_estimate(&chs[1], &chs[0], *p, k, cfg.variant, cfg.divisor)?;
                        Ok((fwd.value, rev.value))
                    })
                })
                .collect::<Result<Vec<_>, ExperimentError>>()?;
            ("n", n_values.clone(), by_grid)
        }
    };
    let mut points = Vec::with_capacity(grid_points.len() * tau_grid.len());
    for (g, &grid_value) in grid_points.iter().enumerate() {
        for &tau in tau_grid {
            let xy = gammas[g].iter().filter(|(fwd, _)| *fwd >= tau).count();
            let not_yx = gammas[g].iter().filter(|(_, rev)| *rev < tau).count();
            points.push(TauCurvePoint {
                grid_value,
                tau,
                pct_conclude_xy: percent(xy, reps),
                pct_conclude_not_yx: percent(not_yx, reps),
            });
        }
    }
    Ok(TauCurves { axis: axis.to_string(), points })
}

// --- analytic-limit check ---

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitStat {
    pub mean: f64,
    /// Standard error of the mean (0 for a single repetition).
    pub stderr: f64,
}

/// Monte Carlo means for the lag-1 VAR whose reverse-direction limits are
/// known in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Example1Limit {
    /// Γ̂^{-0}_{Y→X}(1); the limit is 3/4.
    pub yx_no0_p1: LimitStat,
    /// Γ̂_{Y→X}(2); the limit is ≈ 0.8.
    pub yx_std_p2: LimitStat,
    /// Γ̂^{-0}_{X→Y}(1); the causal direction, with limit 1.
    pub xy_no0_p1: LimitStat,
}

pub fn example1_limit_check(
    n: usize,
    k: usize,
    reps: usize,
    seed: u64,
    parallelism: usize,
) -> Result<Example1Limit, ExperimentError> {
    if reps == 0 {
        return Err(ExperimentError::NoReps);
    }
    let model = Preset::Example1.spec()?;
    let triples = run_cell(reps, parallelism, |r| {
        let chs = model.simulate(n, rep_seed(seed, 0, r))?;
        let (x, y) = (&chs[0], &chs[1]);
        let no0 = GammaVariant::NoInstantaneous;
        let yx_no0 = causal_tail_estimate(y, x, 1, k, no0, DivisorMode::PaperK)?.value;
        let yx_std =
            causal_tail_estimate(y, x, 2, k, GammaVariant::Standard, DivisorMode::PaperK)?.value;
        let xy_no0 = causal_tail_estimate(x, y, 1, k, no0, DivisorMode::PaperK)?.value;
        Ok([yx_no0, yx_std, xy_no0])
    })?;
    let stat = |idx: usize| {
        let values: Vec<f64> = triples.iter().map(|t| t[idx]).collect();
        LimitStat { mean: mean(&values), stderr: stderr_of_mean(&values) }
    };
    Ok(Example1Limit { yx_no0_p1: stat(0), yx_std_p2: stat(1), xy_no0_p1: stat(2) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn id_labels_round_trip() {
        for id in ExperimentId::ALL {
            assert_eq!(id.label().parse::<ExperimentId>().unwrap(), id);
        }
        assert!(matches!(
            "nope".parse::<ExperimentId>(),
            Err(ExperimentError::UnknownId(s)) if s == "nope"
        ));
    }

    #[test]
    fn defaults_use_reference_scales() {
        let t1 = ExperimentSpec::with_defaults(ExperimentId::Table1, 0);
        assert_eq!((t1.reps, t1.n), (200, 10_000));
        let t3 = ExperimentSpec::with_defaults(ExperimentId::Table3, 0);
        assert_eq!((t3.reps, t3.n), (500, 1_000));
        let e1 = ExperimentSpec::with_defaults(ExperimentId::Example1Limit, 0);
        assert_eq!((e1.reps, e1.n), (20, 1_000_000));
    }

    #[test]
    fn scaled_floors_at_one() {
        let spec = ExperimentSpec::with_defaults(ExperimentId::Table1, 0);
        assert_eq!(spec.clone().scaled(10).reps, 20);
        assert_eq!(spec.clone().scaled(100_000).reps, 1);
        assert_eq!(spec.scaled(1).reps, 200);
    }

    #[test]
    fn spec_validation() {
        let mut spec = ExperimentSpec::with_defaults(ExperimentId::Fig3Hist, 0);
        spec.reps = 0;
        assert!(matches!(run_experiment(&spec, 1), Err(ExperimentError::NoReps)));
        spec.reps = 1;
        spec.n = 49;
        assert!(matches!(
            run_experiment(&spec, 1),
            Err(ExperimentError::SampleTooSmall { n: 49 })
        ));
        spec.n = 100;
        spec.overrides.tau_grid = Some(vec![]);
        assert!(matches!(run_experiment(&spec, 1), Err(ExperimentError::EmptyGrid)));
    }

    #[test]
    fn quantile_convention_is_lowest_reaching_order_statistic() {
        let values: Vec<f64> = (1..=20).map(|v| v as f64).collect();
        let s = sorted(&values);
        // ⌈0.95·20⌉ = 19th smallest
        assert_eq!(empirical_quantile(&s, 0.95), 19.0);
        assert_eq!(empirical_quantile(&s, 0.05), 1.0);
        assert_eq!(q95_offset(&values), 19.0 - 10.5);
    }

    #[test]
    fn rep_seeds_are_distinct() {
        let seeds = [
            rep_seed(0, 0, 0),
            rep_seed(0, 0, 1),
            rep_seed(0, 1, 0),
            rep_seed(1, 0, 0),
        ];
        for i in 0..seeds.len() {
            for j in i + 1..seeds.len() {
                assert_ne!(seeds[i], seeds[j]);
            }
        }
    }

    #[test]
    fn map_reps_preserves_index_order() {
        let doubled = map_reps(17, 4, |r| 2 * r);
        assert_eq!(doubled, (0..17).map(|r| 2 * r).collect::<Vec<_>>());
    }

    #[test]
    fn summaries_are_deterministic_and_parallelism_invariant() {
        let mut spec = ExperimentSpec::with_defaults(ExperimentId::Table1, 99);
        spec.reps = 2;
        spec.n = 100;
        spec.overrides.delta = Some(0.5);
        let a = run_experiment(&spec, 1).unwrap();
        let b = run_experiment(&spec, 1).unwrap();
        let c = run_experiment(&spec, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        // one row per noise block at the single retained n
        assert_eq!(a.rows.len(), 4);
        assert_eq!(a.rows[0].labels, vec!["pareto-pareto", "0.5", "100"]);
    }

    #[test]
    fn table3_loop_cell_runs_on_the_unit_circle() {
        let mut spec = ExperimentSpec::with_defaults(ExperimentId::Table3, 5);
        spec.reps = 2;
        spec.n = 100;
        spec.overrides.delta_x = Some(0.5);
        spec.overrides.delta_y = Some(0.5);
        spec.overrides.theta = Some([1, 1, 1]);
        let summary = run_experiment(&spec, 1).unwrap();
        assert_eq!(summary.rows.len(), 1);
        assert_eq!(summary.rows[0].labels[0], "custom");
        for value in summary.rows[0].values.iter().flatten() {
            assert!(value.is_finite());
        }
    }

    #[test]
    fn degenerate_thresholds_saturate_the_curves() {
        let model = Preset::model1_pareto(0.5).spec().unwrap();
        let grid = TauGrid::OverP { n: 120, p_values: vec![2] };
        let curves = tau_sensitivity(
            &model,
            &grid,
            &[0.0, 1.0 + 1e-9],
            8,
            3,
            1,
            &TauEstimatorConfig::default(),
        )
        .unwrap();
        assert_eq!(curves.axis, "p");
        assert_eq!(curves.points.len(), 2);
        // τ = 0: everything clears the bar, nothing falls below it
        assert_eq!(curves.points[0].pct_conclude_xy, 100.0);
        assert_eq!(curves.points[0].pct_conclude_not_yx, 0.0);
        // τ > 1: Γ̂ ≤ 1 always loses
        assert_eq!(curves.points[1].pct_conclude_xy, 0.0);
        assert_eq!(curves.points[1].pct_conclude_not_yx, 100.0);
    }

    #[test]
    fn tau_sensitivity_over_n_axis() {
        let model = Preset::model1_pareto(0.5).spec().unwrap();
        let grid = TauGrid::OverN { p: 2, n_values: vec![80, 120] };
        let cfg = TauEstimatorConfig::default();
        let a = tau_sensitivity(&model, &grid, &[0.8, 0.9], 4, 11, 1, &cfg).unwrap();
        let b = tau_sensitivity(&model, &grid, &[0.8, 0.9], 4, 11, 2, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.axis, "n");
        assert_eq!(a.points.len(), 4);
        assert_eq!(a.points[0].grid_value, 80);
        assert_eq!(a.points[3].grid_value, 120);
    }

    #[test]
    fn empty_grids_are_rejected() {
        let model = Preset::model1_pareto(0.5).spec().unwrap();
        let cfg = TauEstimatorConfig::default();
        let no_p = TauGrid::OverP { n: 100, p_values: vec![] };
        assert!(matches!(
            tau_sensitivity(&model, &no_p, &[0.9], 2, 0, 1, &cfg),
            Err(ExperimentError::EmptyGrid)
        ));
        let some_p = TauGrid::OverP { n: 100, p_values: vec![2] };
        assert!(matches!(
            tau_sensitivity(&model, &some_p, &[], 2, 0, 1, &cfg),
            Err(ExperimentError::EmptyGrid)
        ));
    }

    #[test]
    fn example1_check_shape_and_determinism() {
        let a = example1_limit_check(400, 10, 3, 7, 1).unwrap();
        let b = example1_limit_check(400, 10, 3, 7, 2).unwrap();
        assert_eq!(a, b);
        for stat in [a.yx_no0_p1, a.yx_std_p2, a.xy_no0_p1] {
            assert!((0.0..=1.0).contains(&stat.mean));
            assert!(stat.stderr >= 0.0);
        }
    }

    #[test]
    fn fig5_sweep_rows_follow_the_grid() {
        let mut spec = ExperimentSpec::with_defaults(ExperimentId::Fig5Psweep, 21);
        spec.reps = 2;
        spec.n = 80;
        spec.overrides.p_grid = Some(vec![0, 1, 2]);
        let summary = run_experiment(&spec, 1).unwrap();
        assert_eq!(summary.rows.len(), 3);
        assert_eq!(summary.rows[2].labels, vec!["2"]);
        for row in &summary.rows {
            // q05 ≤ mean ≤ q95 per direction
            let v: Vec<f64> = row.values.iter().map(|v| v.unwrap()).collect();
            assert!(v[1] <= v[0] && v[0] <= v[2]);
            assert!(v[4] <= v[3] && v[3] <= v[5]);
        }
    }

    #[test]
    fn csv_output_is_self_describing() {
        let mut spec = ExperimentSpec::with_defaults(ExperimentId::Fig3Hist, 13);
        spec.reps = 3;
        spec.n = 60;
        let summary = run_experiment(&spec, 1).unwrap();
        let mut buf = Vec::new();
        summary.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("# experiment=fig3_hist\n"));
        assert!(text.contains("# seed=13\n"));
        assert!(text.contains("\nrep,gamma_xy,gamma_yx\n"));
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 3);
    }

    #[test]
    fn placeholder_rows_mark_external_methods() {
        let mut spec = ExperimentSpec::with_defaults(ExperimentId::Table2, 17);
        spec.reps = 2;
        spec.n = 500;
        let summary = run_experiment(&spec, 1).unwrap();
        // per model: gamma, granger, pcmci, lpcmci
        assert_eq!(summary.rows.len(), 8);
        let pcmci = &summary.rows[2];
        assert_eq!(pcmci.labels[2], "pcmci");
        assert_eq!(pcmci.values, vec![None, None]);
        assert_eq!(pcmci.note.as_deref(), Some(EXTERNAL_NOTE));
        let mut buf = Vec::new();
        summary.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("pcmci,,,external — not implemented\n"));
        for row in &summary.rows {
            for value in row.values.iter().flatten() {
                assert!((0.0..=100.0).contains(value));
            }
        }
    }
}
