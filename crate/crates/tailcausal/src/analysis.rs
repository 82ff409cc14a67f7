use crate::ecdf::{kth_largest, OrderStatError};
use crate::estimator::{causal_tail_estimate, DivisorMode, EstimatorError, GammaEstimate, GammaVariant};
use crate::series::Series;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("grid is empty")]
    EmptyGrid,
    #[error("grid must be strictly increasing (violated at index {index})")]
    GridNotIncreasing { index: usize },
    #[error("lag {h} out of range for series of length {n}")]
    LagOutOfRange { h: usize, n: usize },
    #[error("tau must lie in (0,1), got {tau}")]
    TauOutOfRange { tau: f64 },
    #[error("series lengths differ: {x} vs {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    OrderStat(#[from] OrderStatError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    P,
    K,
}

impl SweepAxis {
    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::P => "p",
            SweepAxis::K => "k",
        }
    }
}

/// Both-direction estimates along a grid of one estimator parameter, the
/// other held fixed. `forward` is X→Y, `reverse` Y→X, index-aligned with
/// `grid`.
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub grid: Vec<usize>,
    pub forward: Vec<GammaEstimate>,
    pub reverse: Vec<GammaEstimate>,
}

fn check_grid(grid: &[usize]) -> Result<(), AnalysisError> {
    if grid.is_empty() {
        return Err(AnalysisError::EmptyGrid);
    }
    for (i, w) in grid.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(AnalysisError::GridNotIncreasing { index: i + 1 });
        }
    }
    Ok(())
}

/// Γ̂ in both directions for each delay in `p_grid`, at fixed k.
pub fn sweep_p(
    x: &Series,
    y: &Series,
    p_grid: &[usize],
    k: usize,
    variant: GammaVariant,
) -> Result<SweepResult, AnalysisError> {
    check_grid(p_grid)?;
    let mut forward = Vec::with_capacity(p_grid.len());
    let mut reverse = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        forward.push(causal_tail_estimate(x, y, p, k, variant, DivisorMode::PaperK)?);
        reverse.push(causal_tail_estimate(y, x, p, k, variant, DivisorMode::PaperK)?);
    }
    Ok(SweepResult { axis: SweepAxis::P, grid: p_grid.to_vec(), forward, reverse })
}

/// Γ̂ in both directions for each threshold count in `k_grid`, at fixed p.
pub fn sweep_k(
    x: &Series,
    y: &Series,
    p: usize,
    k_grid: &[usize],
    variant: GammaVariant,
) -> Result<SweepResult, AnalysisError> {
    check_grid(k_grid)?;
    let mut forward = Vec::with_capacity(k_grid.len());
    let mut reverse = Vec::with_capacity(k_grid.len());
    for &k in k_grid {
        forward.push(causal_tail_estimate(x, y, p, k, variant, DivisorMode::PaperK)?);
        reverse.push(causal_tail_estimate(y, x, p, k, variant, DivisorMode::PaperK)?);
    }
    Ok(SweepResult { axis: SweepAxis::K, grid: k_grid.to_vec(), forward, reverse })
}

/// Smallest delay s ≤ p_max with Γ̂(s) ≥ tau, scanning from 0 (or 1 under
/// `NoInstantaneous`). None if the coefficient never reaches tau.
pub fn minimal_delay(
    x: &Series,
    y: &Series,
    k: usize,
    tau: f64,
    p_max: usize,
    variant: GammaVariant,
) -> Result<Option<usize>, AnalysisError> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(AnalysisError::TauOutOfRange { tau });
    }
    let n = x.len();
    if p_max > n - 1 {
        return Err(EstimatorError::DelayTooLarge { p: p_max, max: n - 1 }.into());
    }
    let lo = if variant == GammaVariant::NoInstantaneous { 1 } else { 0 };
    for s in lo..=p_max {
        let est = causal_tail_estimate(x, y, s, k, variant, DivisorMode::PaperK)?;
        if est.value >= tau {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

/// Conditional exceedance frequency at one lag. `frequency` is None when no
/// index satisfied the conditioning event (possible for h close to n).
#[derive(Debug, Clone, Serialize)]
pub struct ExtremogramPoint {
    pub h: usize,
    pub conditioning_count: usize,
    pub frequency: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Extremogram {
    pub k: usize,
    pub points: Vec<ExtremogramPoint>,
}

/// For each lag h: among indices where x is extreme (≥ its k-th largest
/// value), the fraction whose y at lag h is extreme as well. Exceedance is
/// non-strict on both sides so an index counts as echoing itself.
pub fn cross_extremogram(
    x: &Series,
    y: &Series,
    h_grid: &[usize],
    k: usize,
) -> Result<Extremogram, AnalysisError> {
    let n = x.len();
    if y.len() != n {
        return Err(AnalysisError::LengthMismatch { x: n, y: y.len() });
    }
    check_grid(h_grid)?;
    if let Some(&h) = h_grid.last() {
        if h > n - 1 {
            return Err(AnalysisError::LagOutOfRange { h, n });
        }
    }
    let tau_x = kth_largest(x, k)?;
    let tau_y = kth_largest(y, k)?;
    let xv = x.values();
    let yv = y.values();
    let points = h_grid
        .iter()
        .map(|&h| {
            let mut conditioning_count = 0usize;
            let mut exceedances = 0usize;
            for i in 0..n - h {
                if xv[i] >= tau_x {
                    conditioning_count += 1;
                    if yv[i + h] >= tau_y {
                        exceedances += 1;
                    }
                }
            }
            let frequency = (conditioning_count > 0)
                .then(|| exceedances as f64 / conditioning_count as f64);
            ExtremogramPoint { h, conditioning_count, frequency }
        })
        .collect();
    Ok(Extremogram { k, points })
}
