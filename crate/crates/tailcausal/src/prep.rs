use crate::series::{Series, SeriesError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PrepError {
    #[error("seasonal_anomaly needs period >= 2, got {period}")]
    PeriodTooSmall { period: usize },
    #[error("series too short for {step} (length {len})")]
    TooShort { step: &'static str, len: usize },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// One preprocessing step; a pipeline is a sequence of these, applied in
/// order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrepStep {
    /// Flip sign, turning a lower tail into an upper tail.
    Negate,
    /// Subtract the per-phase mean, phase = index mod period.
    SeasonalAnomaly { period: usize },
    /// First differences; shortens the series by one.
    Difference,
    /// Subtract the least-squares line over the index.
    LinearDetrend,
}

pub fn preprocess(series: &Series, steps: &[PrepStep]) -> Result<Series, PrepError> {
    let mut values = series.values().to_vec();
    for step in steps {
        values = match *step {
            PrepStep::Negate => values.iter().map(|v| -v).collect(),
            PrepStep::SeasonalAnomaly { period } => {
                if period < 2 {
                    return Err(PrepError::PeriodTooSmall { period });
                }
                seasonal_anomaly(&values, period)
            }
            PrepStep::Difference => {
                if values.len() < 3 {
                    return Err(PrepError::TooShort { step: "difference", len: values.len() });
                }
                values.windows(2).map(|w| w[1] - w[0]).collect()
            }
            PrepStep::LinearDetrend => linear_detrend(&values),
        };
    }
    Ok(Series::new(series.name(), values)?)
}

fn seasonal_anomaly(values: &[f64], period: usize) -> Vec<f64> {
    let mut sums = vec![0.0; period];
    let mut counts = vec![0usize; period];
    for (i, v) in values.iter().enumerate() {
        sums[i % period] += v;
        counts[i % period] += 1;
    }
    values
        .iter()
        .enumerate()
        .map(|(i, v)| v - sums[i % period] / counts[i % period] as f64)
        .collect()
}

fn linear_detrend(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    let t_mean = (n - 1.0) / 2.0;
    let v_mean = values.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (i, v) in values.iter().enumerate() {
        let dt = i as f64 - t_mean;
        cov += dt * (v - v_mean);
        var += dt * dt;
    }
    let slope = cov / var;
    values
        .iter()
        .enumerate()
        .map(|(i, v)| v - (v_mean + slope * (i as f64 - t_mean)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negate_is_an_involution() {
        let s = Series::new("x", vec![1.5, -2.0, 3.25, 0.5]).unwrap();
        let back = preprocess(&s, &[PrepStep::Negate, PrepStep::Negate]).unwrap();
        assert_eq!(back.values(), s.values());
        assert_eq!(back.name(), "x");
    }

    #[test]
    fn seasonal_anomaly_kills_exact_periodicity() {
        // dyadic pattern so the per-phase means are exact
        let pattern = [3.0, -1.5, 2.25, 0.5, -4.0, 1.0, 0.25, -2.5, 5.0, -0.75, 1.5, 2.0];
        let values: Vec<f64> = pattern.iter().cycle().take(36).copied().collect();
        let s = Series::new("x", values).unwrap();
        let out = preprocess(&s, &[PrepStep::SeasonalAnomaly { period: 12 }]).unwrap();
        assert!(out.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn difference_shortens_by_one() {
        let s = Series::new("x", vec![1.0, 4.0, 9.0, 16.0]).unwrap();
        let out = preprocess(&s, &[PrepStep::Difference]).unwrap();
        assert_eq!(out.values(), &[3.0, 5.0, 7.0]);
        let pair = Series::new("x", vec![1.0, 2.0]).unwrap();
        assert_eq!(
            preprocess(&pair, &[PrepStep::Difference]).unwrap_err(),
            PrepError::TooShort { step: "difference", len: 2 }
        );
    }

    #[test]
    fn linear_detrend_removes_an_exact_line() {
        let s = Series::new("x", vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let out = preprocess(&s, &[PrepStep::LinearDetrend]).unwrap();
        assert!(out.values().iter().all(|&v| v == 0.0), "{:?}", out.values());
    }

    #[test]
    fn steps_compose_in_order() {
        let s = Series::new("x", vec![1.0, 3.0, 6.0, 10.0]).unwrap();
        // difference then negate: -(x_{t+1} - x_t)
        let out = preprocess(&s, &[PrepStep::Difference, PrepStep::Negate]).unwrap();
        assert_eq!(out.values(), &[-2.0, -3.0, -4.0]);
    }

    #[test]
    fn period_validation() {
        let s = Series::new("x", vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(
            preprocess(&s, &[PrepStep::SeasonalAnomaly { period: 1 }]).unwrap_err(),
            PrepError::PeriodTooSmall { period: 1 }
        );
    }

    #[test]
    fn step_serde_round_trip() {
        let steps = vec![
            PrepStep::Negate,
            PrepStep::SeasonalAnomaly { period: 12 },
            PrepStep::Difference,
            PrepStep::LinearDetrend,
        ];
        let text = serde_json::to_string(&steps).unwrap();
        assert!(text.contains("seasonal_anomaly"));
        let back: Vec<PrepStep> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, steps);
    }
}
