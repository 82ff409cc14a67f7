//! Shared by the integration suites: a reference estimator written
//! independently of the library one, plus small-instance data generators.

use tailcausal::estimator::{DivisorMode, EstimatorError, GammaVariant};
use tailcausal::rng::RngState;

/// The estimator definition transcribed clause by clause with plain loops
/// and linear-scan counts, no code shared with the library: tau is the k-th
/// largest of x (of |x| under AbsoluteValue); candidate indices have
/// x_i >= tau, ascending, cut to the k earliest, then to those whose window
/// fits; each contributes the window maximum of the <=-count ECDF of y.
/// Returns (value, |S|).
///
/// The two cuts are applied in the opposite order from the library's single
/// scan, so agreement also exercises that the order cannot matter.
pub fn reference_gamma(
    x: &[f64],
    y: &[f64],
    p: usize,
    k: usize,
    variant: GammaVariant,
    divisor: DivisorMode,
) -> Result<(f64, usize), EstimatorError> {
    let n = x.len();
    if y.len() != n {
        return Err(EstimatorError::LengthMismatch { x: n, y: y.len() });
    }
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
    let map = |v: &[f64]| -> Vec<f64> {
        if variant == GammaVariant::AbsoluteValue {
            v.iter().map(|t| t.abs()).collect()
        } else {
            v.to_vec()
        }
    };
    let (xs, ys) = (map(x), map(y));

    let tau = {
        let mut desc = xs.clone();
        desc.sort_by(|a, b| b.partial_cmp(a).unwrap());
        desc[k - 1]
    };
    let mut selected: Vec<usize> = (0..n).filter(|&i| xs[i] >= tau).collect();
    selected.truncate(k);
    selected.retain(|&i| i + p < n);

    let ecdf = |t: f64| ys.iter().filter(|&&v| v <= t).count() as f64 / n as f64;
    let mut sum = 0.0;
    for &i in &selected {
        let mut best = 0.0f64;
        for j in win_lo..=p {
            best = best.max(ecdf(ys[i + j]));
        }
        sum += best;
    }
    match divisor {
        DivisorMode::PaperK => Ok((sum / k as f64, selected.len())),
        DivisorMode::Renormalize => {
            if selected.is_empty() {
                return Err(EstimatorError::NoSelectedIndices);
            }
            Ok((sum / selected.len() as f64, selected.len()))
        }
    }
}

/// Test data in three flavors: continuous mixed-sign, a four-letter integer
/// alphabet (dense ties around tau), constant (every index tied).
pub fn draw(rng: &mut RngState, n: usize, flavor: usize) -> Vec<f64> {
    match flavor {
        0 => (0..n).map(|_| (rng.uniform() - 0.5) * 20.0).collect(),
        1 => (0..n).map(|_| (rng.uniform() * 4.0).floor() - 1.0).collect(),
        _ => vec![2.0; n],
    }
}
