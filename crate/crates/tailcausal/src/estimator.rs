use crate::ecdf::{ecdf_of_slice, EcdfView};
use crate::series::Series;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EstimatorError {
    #[error("series lengths differ: {x} vs {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("extremal delay p = {p} must be at most n-1 = {max}")]
    DelayTooLarge { p: usize, max: usize },
    #[error("k = {k} out of range for n = {n} (need 1 <= k <= n)")]
    KOutOfRange { k: usize, n: usize },
    #[error("NoInstantaneous requires p >= 1")]
    NoInstantaneousNeedsLag,
    #[error("no index is selectable (all top-k extremes sit within the last p observations); Renormalize has no divisor")]
    NoSelectedIndices,
}

/// Which window of future observations an extreme of the candidate cause
/// is matched against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaVariant {
    /// Window j = 0..p: instantaneous co-extremes count.
    Standard,
    /// Window j = 1..p: instantaneous co-extremes are excluded.
    NoInstantaneous,
    /// Apply |.| to both series first, then Standard.
    AbsoluteValue,
}

impl GammaVariant {
    pub fn label(self) -> &'static str {
        match self {
            GammaVariant::Standard => "standard",
            GammaVariant::NoInstantaneous => "no0",
            GammaVariant::AbsoluteValue => "abs",
        }
    }
}

/// What the window-maximum sum is divided by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivisorMode {
    /// Divide by k (the literal formula), even if fewer than k indices are
    /// selectable; an empty selection yields 0.
    PaperK,
    /// Divide by the number of indices actually selected; errors when that
    /// number is zero.
    Renormalize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaEstimate {
    pub value: f64,
    pub p: usize,
    pub k: usize,
    pub variant: GammaVariant,
    pub n: usize,
    /// |S|: the number of indices actually summed (<= k).
    pub selected_count: usize,
    pub divisor_mode: DivisorMode,
}

/// The causal tail coefficient estimate of x -> y with extremal delay p.
///
/// tau is the k-th largest value of x (|x| for AbsoluteValue). Candidate
/// indices are those i (0-based here; the window is "the observation at the
/// selected time plus the next p observations") with x_i >= tau, taken in
/// ascending order, truncated to the k earliest if ties push the count past
/// k, and restricted to i <= n-1-p so the window fits. Each selected index
/// contributes the maximum empirical-CDF rank of y over its window.
pub fn causal_tail_estimate(
    x: &Series,
    y: &Series,
    p: usize,
    k: usize,
    variant: GammaVariant,
    divisor_mode: DivisorMode,
) -> Result<GammaEstimate, EstimatorError> {
    if x.len() != y.len() {
        return Err(EstimatorError::LengthMismatch { x: x.len(), y: y.len() });
    }
    let n = x.len();
    if p >= n {
        return Err(EstimatorError::DelayTooLarge { p, max: n - 1 });
    }
    if k == 0 || k > n {
        return Err(EstimatorError::KOutOfRange { k, n });
    }
    let win_lo = match variant {
        GammaVariant::Standard | GammaVariant::AbsoluteValue => 0,
        GammaVariant::NoInstantaneous => {
            if p == 0 {
                return Err(EstimatorError::NoInstantaneousNeedsLag);
            }
            1
        }
    };

    let (xv, yv): (Vec<f64>, Vec<f64>) = if variant == GammaVariant::AbsoluteValue {
        (
            x.values().iter().map(|v| v.abs()).collect(),
            y.values().iter().map(|v| v.abs()).collect(),
        )
    } else {
        (x.values().to_vec(), y.values().to_vec())
    };

    let ecdf_y: EcdfView = ecdf_of_slice(&yv);
    let tau = {
        let mut sorted_x = xv.clone();
        sorted_x.sort_unstable_by(f64::total_cmp);
        sorted_x[n - k]
    };

    // Ascending scan = "k earliest indices, then drop those whose window
    // overruns"; any over-run index also ends every later one, so break.
    let last_start = n - 1 - p;
    let mut sum = 0.0;
    let mut selected = 0usize;
    let mut seen = 0usize;
    for (i, &xi) in xv.iter().enumerate() {
        if xi < tau {
            continue;
        }
        seen += 1;
        if seen > k || i > last_start {
            break;
        }
        let mut best = 0.0f64;
        for j in win_lo..=p {
            let r = ecdf_y.value(yv[i + j]);
            if r > best {
                best = r;
            }
        }
        sum += best;
        selected += 1;
    }

    let value = match divisor_mode {
        DivisorMode::PaperK => sum / k as f64,
        DivisorMode::Renormalize => {
            if selected == 0 {
                return Err(EstimatorError::NoSelectedIndices);
            }
            sum / selected as f64
        }
    };

    Ok(GammaEstimate { value, p, k, variant, n, selected_count: selected, divisor_mode })
}

/// k = floor(sqrt(n)).
pub fn default_k(n: usize) -> usize {
    (n as f64).sqrt().floor() as usize
}

pub fn gamma_with_default_k(
    x: &Series,
    y: &Series,
    p: usize,
    variant: GammaVariant,
) -> Result<GammaEstimate, EstimatorError> {
    causal_tail_estimate(x, y, p, default_k(x.len()), variant, DivisorMode::PaperK)
}
