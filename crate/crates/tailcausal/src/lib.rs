//! Causal direction detection for heavy-tailed time series.
//!
//! The central quantity is the causal tail coefficient: given two series, it
//! asks whether the largest values of one are echoed, within a short delay
//! window, by high ranks of the other. For series with heavy-tailed noise the
//! coefficient approaches 1 in the causal direction and stays strictly below 1
//! in the anticausal one, which turns the comparison of the two directed
//! estimates into a direction test that needs no model fit.
//!
//! The crate bundles the estimator ([`causal_tail_estimate`]), generative
//! models used to study it (linear VAR and nonlinear autoregressions with
//! Pareto, Student-t or Cauchy noise), diagnostic sweeps and delay search,
//! a Hill estimator for tail indices, a Granger-causality baseline, and the
//! batch experiment runner behind the `tailcausal` command line tool.
//!
//! ```
//! use tailcausal::{gamma_with_default_k, GammaVariant, Preset};
//!
//! // X drives Y through a square root at lag 5.
//! let channels = Preset::Motivating.simulate(5000, 7).unwrap();
//! let (x, y) = (&channels[0], &channels[1]);
//! let fwd = gamma_with_default_k(x, y, 5, GammaVariant::Standard).unwrap();
//! let rev = gamma_with_default_k(y, x, 5, GammaVariant::Standard).unwrap();
//! assert!(fwd.value > rev.value);
//! ```

pub mod analysis;
pub mod ecdf;
pub mod estimator;
pub mod experiments;
pub mod granger;
pub mod graph;
pub mod hill;
pub mod naar;
pub mod prep;
pub mod preset;
pub mod rng;
pub mod series;
pub mod var;

pub use analysis::{
    cross_extremogram, minimal_delay, sweep_k, sweep_p, AnalysisError, Extremogram,
    ExtremogramPoint, SweepAxis, SweepResult,
};
pub use ecdf::{empirical_cdf, kth_largest, EcdfView, OrderStatError};
pub use experiments::{
    example1_limit_check, run_experiment, tau_sensitivity, Example1Limit, ExperimentError,
    ExperimentId, ExperimentSpec, ExperimentSummary, LimitStat, Overrides, RawSeries, SummaryRow,
    TauCurvePoint, TauCurves, TauEstimatorConfig, TauGrid,
};
pub use granger::{f_cdf, granger_test, ols_fit, GrangerError, GrangerResult, OlsFit, RANK_TOL};
pub use graph::{
    build_graph, decide_pair, CausalGraph, GraphEdge, GraphError, PairDecision, Verdict,
    DEFAULT_TAU_HI, DEFAULT_TAU_LO,
};
pub use hill::{hill_estimate, normal_quantile, HillError, TailIndexEstimate};
pub use prep::{preprocess, PrepError, PrepStep};
pub use estimator::{
    causal_tail_estimate, default_k, gamma_with_default_k, DivisorMode, EstimatorError,
    GammaEstimate, GammaVariant,
};
pub use naar::{simulate_naar, ConfounderSpec, FunctionDescriptor, NaarError, NaarSpec};
pub use preset::{ModelError, ModelSpec, Preset};
pub use rng::{NoiseError, NoiseSpec, RngState};
pub use series::{Series, SeriesError};
pub use var::{
    causal_representation, check_extremal_causal_condition, check_stability, simulate_var,
    simulate_var_unchecked, ExtremalConditionReport, MaCoefficients, SimError, StabilityReport,
    VarSpec,
};
