use crate::series::Series;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum HillError {
    #[error("k must be at least 2, got {k}")]
    KTooSmall { k: usize },
    #[error("k = {k} needs at least k+1 observations, series has {n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("confidence must lie in (0,1), got {confidence}")]
    ConfidenceOutOfRange { confidence: f64 },
    #[error(
        "order statistic x_(n-k) = {value} is not positive; shift or filter the series to a positive tail first"
    )]
    NonPositiveThreshold { value: f64 },
}

/// Hill estimate of the extreme value index with an asymptotic-normal CI.
#[derive(Debug, Clone, Serialize)]
pub struct TailIndexEstimate {
    pub gamma_hat: f64,
    pub k_used: usize,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence_level: f64,
}

/// γ̂ = (1/k)·Σ_{i=1..k} log(x_(n−i+1) / x_(n−k)) over the k largest values,
/// relative to the (k+1)-th largest. The CI is γ̂·(1 ± z/√k) — the normal
/// approximation with asymptotic variance γ² — clamped below at 0. Upper
/// tails only; negate first to study a lower tail. Scale-invariant but not
/// shift-invariant.
pub fn hill_estimate(
    series: &Series,
    k: usize,
    confidence: f64,
) -> Result<TailIndexEstimate, HillError> {
    if k < 2 {
        return Err(HillError::KTooSmall { k });
    }
    let n = series.len();
    if k + 1 > n {
        return Err(HillError::KOutOfRange { k, n });
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(HillError::ConfidenceOutOfRange { confidence });
    }
    let mut sorted = series.values().to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let threshold = sorted[n - k - 1];
    if threshold <= 0.0 {
        return Err(HillError::NonPositiveThreshold { value: threshold });
    }
    let gamma_hat = sorted[n - k..].iter().map(|&v| (v / threshold).ln()).sum::<f64>() / k as f64;
    let z = normal_quantile((1.0 + confidence) / 2.0);
    let half = z / (k as f64).sqrt();
    Ok(TailIndexEstimate {
        gamma_hat,
        k_used: k,
        ci_low: (gamma_hat * (1.0 - half)).max(0.0),
        ci_high: gamma_hat * (1.0 + half),
        confidence_level: confidence,
    })
}

/// Inverse standard normal CDF (Wichura's AS 241, double precision).
/// Requires p in (0,1); accurate to roughly 1e-15.
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile needs p in (0,1), got {p}");
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = poly(
            &[
                3.387_132_872_796_366_608e0,
                1.331_416_678_917_843_774_5e2,
                1.971_590_950_306_551_442_7e3,
                1.373_169_376_550_946_112_5e4,
                4.592_195_393_154_987_145_7e4,
                6.726_577_092_700_870_085_3e4,
                3.343_057_558_358_812_810_5e4,
                2.509_080_928_730_122_672_7e3,
            ],
            r,
        );
        let den = poly(
            &[
                1.0,
                4.231_333_070_160_091_125_2e1,
                6.871_870_074_920_579_083e2,
                5.394_196_021_424_751_107_7e3,
                2.121_379_430_158_659_586_7e4,
                3.930_789_580_009_271_061e4,
                2.872_908_573_572_194_267_4e4,
                5.226_495_278_852_854_561e3,
            ],
            r,
        );
        return q * num / den;
    }
    let lower = q < 0.0;
    let tail = if lower { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let value = if r <= 5.0 {
        r -= 1.6;
        let num = poly(
            &[
                1.423_437_110_749_683_577_3e0,
                4.630_337_846_156_545_295_9e0,
                5.769_497_221_460_691_405_5e0,
                3.647_848_324_763_204_605e0,
                1.270_458_252_452_368_382_6e0,
                2.417_807_251_774_506_117_7e-1,
                2.272_384_498_926_918_458_3e-2,
                7.745_450_142_783_414_076_4e-4,
            ],
            r,
        );
        let den = poly(
            &[
                1.0,
                2.053_191_626_637_758_821_9e0,
                1.676_384_830_183_803_849_4e0,
                6.897_673_349_851_000_455e-1,
                1.481_039_764_274_800_745_9e-1,
                1.519_866_656_361_645_719_7e-2,
                5.475_938_084_995_344_946e-4,
                1.050_750_071_644_416_843_2e-9,
            ],
            r,
        );
        num / den
    } else {
        r -= 5.0;
        let num = poly(
            &[
                6.657_904_643_501_103_777_2e0,
                5.463_784_911_164_114_369_9e0,
                1.784_826_539_917_291_335_8e0,
                2.965_605_718_285_048_912_3e-1,
                2.653_218_952_657_612_309_3e-2,
                1.242_660_947_388_078_438_6e-3,
                2.711_555_568_743_487_578_2e-5,
                2.010_334_399_292_288_132_7e-7,
            ],
            r,
        );
        let den = poly(
            &[
                1.0,
                5.998_322_065_558_879_376_9e-1,
                1.369_298_809_227_358_053_1e-1,
                1.487_536_129_085_061_485_3e-2,
                7.868_691_311_456_132_591e-4,
                1.846_318_317_510_054_681_8e-6,
                1.421_511_758_316_445_888_7e-15,
            ],
            r,
        );
        num / den
    };
    if lower {
        -value
    } else {
        value
    }
}

fn poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

#[cfg(test)]
mod tests {
    use super::*;

    // mpmath, 20 significant digits: sqrt(2)*erfinv(2p-1)
    const QUANTILE_ORACLE: &[(f64, f64)] = &[
        (0.5, 0.0),
        (0.9, 1.281551565544600467),
        (0.95, 1.6448536269514727149),
        (0.975, 1.9599639845400542355),
        (0.995, 2.575829303548900761),
        (0.9995, 3.2905267314918947932),
        (0.025, -1.9599639845400542355),
        (0.1, -1.281551565544600467),
        (1e-10, -6.3613409024040562047),
        // quantile of the f64 nearest the decimal 0.999999999: this close to
        // 1, the representation error of p itself shifts z by ~5e-9
        (0.999999999, 5.9978070196016374264),
    ];

    #[test]
    fn normal_quantile_matches_oracle() {
        for &(p, z) in QUANTILE_ORACLE {
            assert!(
                (normal_quantile(p) - z).abs() < 1e-12,
                "p={p}: {} vs {z}",
                normal_quantile(p)
            );
        }
    }

    #[test]
    fn hill_on_exact_pareto_quantiles() {
        // x_(i) = (1 - i/(n+1))^(-1) are Pareto(1,1) population quantiles;
        // the estimate must land near the true index 1.
        let n = 2000;
        let values: Vec<f64> = (1..=n).map(|i| 1.0 / (1.0 - i as f64 / (n + 1) as f64)).collect();
        let s = Series::new("q", values).unwrap();
        let est = hill_estimate(&s, 100, 0.95).unwrap();
        assert!((est.gamma_hat - 1.0).abs() < 0.1, "{}", est.gamma_hat);
        assert!(est.ci_low <= est.gamma_hat && est.gamma_hat <= est.ci_high);
        assert!(est.ci_low < 1.0 && 1.0 < est.ci_high);
    }

    #[test]
    fn scale_invariance() {
        let values = vec![3.0, 1.5, 8.0, 2.0, 16.0, 5.0, 1.0, 12.0, 4.0, 6.5];
        let s = Series::new("x", values.clone()).unwrap();
        let base = hill_estimate(&s, 4, 0.9).unwrap();
        // dyadic scale: bit-identical
        let s4 = Series::new("x", values.iter().map(|v| v * 4.0).collect()).unwrap();
        assert_eq!(hill_estimate(&s4, 4, 0.9).unwrap().gamma_hat, base.gamma_hat);
        // arbitrary scale: equal up to rounding of the inputs
        let s3 = Series::new("x", values.iter().map(|v| v * 3.0).collect()).unwrap();
        assert!((hill_estimate(&s3, 4, 0.9).unwrap().gamma_hat - base.gamma_hat).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = Series::new("x", vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(hill_estimate(&s, 1, 0.9).unwrap_err(), HillError::KTooSmall { k: 1 });
        assert_eq!(hill_estimate(&s, 4, 0.9).unwrap_err(), HillError::KOutOfRange { k: 4, n: 4 });
        assert_eq!(
            hill_estimate(&s, 2, 1.0).unwrap_err(),
            HillError::ConfidenceOutOfRange { confidence: 1.0 }
        );
        let neg = Series::new("x", vec![-1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(
            hill_estimate(&neg, 3, 0.9).unwrap_err(),
            HillError::NonPositiveThreshold { value: -1.0 }
        );
    }

    #[test]
    fn wider_confidence_widens_interval() {
        let values: Vec<f64> = (1..=50).map(|i| 1.0 / (1.0 - i as f64 / 51.0)).collect();
        let s = Series::new("q", values).unwrap();
        let narrow = hill_estimate(&s, 10, 0.8).unwrap();
        let wide = hill_estimate(&s, 10, 0.99).unwrap();
        assert_eq!(narrow.gamma_hat, wide.gamma_hat);
        assert!(wide.ci_high > narrow.ci_high);
        assert!(wide.ci_low <= narrow.ci_low);
    }
}
