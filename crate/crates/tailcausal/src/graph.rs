use crate::estimator::{causal_tail_estimate, DivisorMode, EstimatorError, GammaEstimate, GammaVariant};
use crate::series::Series;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

pub const DEFAULT_TAU_HI: f64 = 0.9;
pub const DEFAULT_TAU_LO: f64 = 0.8;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("thresholds must satisfy 0 < tau_lo <= tau_hi < 1, got lo={tau_lo} hi={tau_hi}")]
    BadThresholds { tau_hi: f64, tau_lo: f64 },
    #[error("estimates differ in {field}; both directions must share p, k and variant")]
    ConfigMismatch { field: &'static str },
    #[error("a graph needs at least two series, got {0}")]
    TooFewSeries(usize),
    #[error("series '{a}' has length {len_a} but '{b}' has {len_b}")]
    LengthMismatch { a: String, len_a: usize, b: String, len_b: usize },
    #[error("duplicate series name '{0}'")]
    DuplicateName(String),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    XtoY,
    YtoX,
    NoEdge,
    Ambiguous,
}

/// Directional verdict for one ordered pair. The rule needs the forward
/// estimate above tau_hi *and* the reverse below tau_lo; both above tau_hi
/// is Ambiguous (a feedback loop and a heavier-tailed confounder look the
/// same), anything else NoEdge.
#[derive(Debug, Clone, Serialize)]
pub struct PairDecision {
    pub gamma_xy: GammaEstimate,
    pub gamma_yx: GammaEstimate,
    pub verdict: Verdict,
    pub tau_hi: f64,
    pub tau_lo: f64,
}

pub fn decide_pair(
    gamma_xy: GammaEstimate,
    gamma_yx: GammaEstimate,
    tau_hi: f64,
    tau_lo: f64,
) -> Result<PairDecision, GraphError> {
    // tau_lo <= tau_hi keeps the arms mutually exclusive
    if !(0.0 < tau_lo && tau_lo <= tau_hi && tau_hi < 1.0) {
        return Err(GraphError::BadThresholds { tau_hi, tau_lo });
    }
    if gamma_xy.p != gamma_yx.p {
        return Err(GraphError::ConfigMismatch { field: "p" });
    }
    if gamma_xy.k != gamma_yx.k {
        return Err(GraphError::ConfigMismatch { field: "k" });
    }
    if gamma_xy.variant != gamma_yx.variant {
        return Err(GraphError::ConfigMismatch { field: "variant" });
    }
    if gamma_xy.divisor_mode != gamma_yx.divisor_mode {
        return Err(GraphError::ConfigMismatch { field: "divisor_mode" });
    }
    let fwd = gamma_xy.value;
    let rev = gamma_yx.value;
    let verdict = if fwd > tau_hi && rev > tau_hi {
        Verdict::Ambiguous
    } else if fwd > tau_hi && rev < tau_lo {
        Verdict::XtoY
    } else if rev > tau_hi && fwd < tau_lo {
        Verdict::YtoX
    } else {
        Verdict::NoEdge
    };
    Ok(PairDecision { gamma_xy, gamma_yx, verdict, tau_hi, tau_lo })
}

/// One directed edge; `decision` is expressed in edge orientation, so its
/// verdict is always XtoY and gamma_xy is the from→to estimate.
#[derive(Debug, Clone, Serialize)]
pub struct GraphEdge {
    pub from: String,
    pub to: String,
    pub decision: PairDecision,
}

#[derive(Debug, Clone, Serialize)]
pub struct CausalGraph {
    pub nodes: Vec<String>,
    pub edges: Vec<GraphEdge>,
    pub ambiguous: Vec<(String, String)>,
    pub tau_hi: f64,
    pub tau_lo: f64,
}

impl CausalGraph {
    /// Interchange shape: {nodes, edges: [{from, to, gamma_fwd, gamma_rev}],
    /// ambiguous: [[a, b], …]}.
    pub fn export_json(&self) -> serde_json::Value {
        json!({
            "nodes": self.nodes,
            "edges": self.edges.iter().map(|e| json!({
                "from": e.from,
                "to": e.to,
                "gamma_fwd": e.decision.gamma_xy.value,
                "gamma_rev": e.decision.gamma_yx.value,
            })).collect::<Vec<_>>(),
            "ambiguous": self.ambiguous,
        })
    }
}

/// Evaluate every pair of series and keep the directional verdicts as edges.
/// Nodes are sorted by name; pairs are scanned in that order, so output is
/// canonical regardless of input order. Ambiguous pairs are recorded but
/// never drawn as edges, and a 2-cycle cannot arise (the two orientations'
/// conditions are mutually exclusive).
pub fn build_graph(
    series: &[Series],
    p: usize,
    k: usize,
    tau_hi: f64,
    tau_lo: f64,
    variant: GammaVariant,
) -> Result<CausalGraph, GraphError> {
    if series.len() < 2 {
        return Err(GraphError::TooFewSeries(series.len()));
    }
    let mut order: Vec<&Series> = series.iter().collect();
    order.sort_by(|a, b| a.name().cmp(b.name()));
    for w in order.windows(2) {
        if w[0].name() == w[1].name() {
            return Err(GraphError::DuplicateName(w[0].name().to_string()));
        }
    }
    for s in &order[1..] {
        if s.len() != order[0].len() {
            return Err(GraphError::LengthMismatch {
                a: order[0].name().to_string(),
                len_a: order[0].len(),
                b: s.name().to_string(),
                len_b: s.len(),
            });
        }
    }
    let mut edges = Vec::new();
    let mut ambiguous = Vec::new();
    for (ai, a) in order.iter().enumerate() {
        for b in &order[ai + 1..] {
            let fwd = causal_tail_estimate(a, b, p, k, variant, DivisorMode::PaperK)?;
            let rev = causal_tail_estimate(b, a, p, k, variant, DivisorMode::PaperK)?;
            let decision = decide_pair(fwd, rev, tau_hi, tau_lo)?;
            match decision.verdict {
                Verdict::XtoY => edges.push(GraphEdge {
                    from: a.name().to_string(),
                    to: b.name().to_string(),
                    decision,
                }),
                Verdict::YtoX => {
                    let flipped = PairDecision {
                        gamma_xy: decision.gamma_yx,
                        gamma_yx: decision.gamma_xy,
                        verdict: Verdict::XtoY,
                        tau_hi: decision.tau_hi,
                        tau_lo: decision.tau_lo,
                    };
                    edges.push(GraphEdge {
                        from: b.name().to_string(),
                        to: a.name().to_string(),
                        decision: flipped,
                    });
                }
                Verdict::Ambiguous => {
                    ambiguous.push((a.name().to_string(), b.name().to_string()));
                }
                Verdict::NoEdge => {}
            }
        }
    }
    Ok(CausalGraph {
        nodes: order.iter().map(|s| s.name().to_string()).collect(),
        edges,
        ambiguous,
        tau_hi,
        tau_lo,
    })
}
