use crate::rng::{NoiseSpec, RngState};
use crate::series::Series;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NaarError {
    #[error("lag must be >= 1")]
    ZeroLag,
    #[error("linear slope must lie in [0,1), got {c}")]
    LinearSlope { c: f64 },
    #[error("power exponent must lie in (0,1), got {exponent}")]
    PowerExponent { exponent: f64 },
    #[error("power threshold must be >= 0, got {threshold}")]
    PowerThreshold { threshold: f64 },
    #[error("channel '{channel}' noise can take negative values; the nonlinear AR model needs non-negative noise")]
    NegativeNoiseSupport { channel: &'static str },
    #[error("need at least 2 observations, got n = {n}")]
    TooFewObservations { n: usize },
}

/// Link functions for the nonlinear AR model. All are sub-linear in the
/// tail (slope < 1), which keeps the recursion from amplifying extremes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionDescriptor {
    Zero,
    /// t -> c*t with c in [0,1).
    Linear { c: f64 },
    /// t -> sqrt(max(t, 0)).
    Sqrt,
    /// t -> t^exponent for t > threshold, else 0; exponent in (0,1),
    /// threshold >= 0.
    PowerThreshold { exponent: f64, threshold: f64 },
}

impl FunctionDescriptor {
    pub fn validate(&self) -> Result<(), NaarError> {
        match *self {
            FunctionDescriptor::Zero | FunctionDescriptor::Sqrt => Ok(()),
            FunctionDescriptor::Linear { c } => {
                if (0.0..1.0).contains(&c) {
                    Ok(())
                } else {
                    Err(NaarError::LinearSlope { c })
                }
            }
            FunctionDescriptor::PowerThreshold { exponent, threshold } => {
                if !(exponent > 0.0 && exponent < 1.0) {
                    Err(NaarError::PowerExponent { exponent })
                } else if !(threshold >= 0.0) {
                    Err(NaarError::PowerThreshold { threshold })
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn apply(&self, t: f64) -> f64 {
        match *self {
            FunctionDescriptor::Zero => 0.0,
            FunctionDescriptor::Linear { c } => c * t,
            FunctionDescriptor::Sqrt => t.max(0.0).sqrt(),
            FunctionDescriptor::PowerThreshold { exponent, threshold } => {
                if t > threshold {
                    t.powf(exponent)
                } else {
                    0.0
                }
            }
        }
    }
}

/// A latent common-cause channel: Z_t = self_fn(Z_{t-1}) + eps_t^Z, feeding
/// into X at lag `lag_x` and into Y at lag `lag_y`. Z itself is never
/// returned by the simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfounderSpec {
    pub self_fn: FunctionDescriptor,
    pub into_x: FunctionDescriptor,
    pub lag_x: usize,
    pub into_y: FunctionDescriptor,
    pub lag_y: usize,
    pub noise: NoiseSpec,
}

/// Bivariate nonlinear AR with a single cross lag:
///   X_t = f1(X_{t-1}) + f2(Y_{t-lag}) + eps_t^X
///   Y_t = g1(Y_{t-1}) + g2(X_{t-lag}) + eps_t^Y
/// plus an optional latent confounder channel added to both equations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaarSpec {
    pub f1: FunctionDescriptor,
    pub f2: FunctionDescriptor,
    pub g1: FunctionDescriptor,
    pub g2: FunctionDescriptor,
    pub lag: usize,
    pub noise_x: NoiseSpec,
    pub noise_y: NoiseSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confounder: Option<ConfounderSpec>,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
}

fn default_burn_in() -> usize {
    crate::var::DEFAULT_BURN_IN
}

impl NaarSpec {
    pub fn validate(&self) -> Result<(), NaarError> {
        if self.lag == 0 {
            return Err(NaarError::ZeroLag);
        }
        for f in [&self.f1, &self.f2, &self.g1, &self.g2] {
            f.validate()?;
        }
        if !self.noise_x.support_nonnegative() {
            return Err(NaarError::NegativeNoiseSupport { channel: "x" });
        }
        if !self.noise_y.support_nonnegative() {
            return Err(NaarError::NegativeNoiseSupport { channel: "y" });
        }
        if let Some(conf) = &self.confounder {
            if conf.lag_x == 0 || conf.lag_y == 0 {
                return Err(NaarError::ZeroLag);
            }
            for f in [&conf.self_fn, &conf.into_x, &conf.into_y] {
                f.validate()?;
            }
            if !conf.noise.support_nonnegative() {
                return Err(NaarError::NegativeNoiseSupport { channel: "z" });
            }
        }
        Ok(())
    }
}

/// Simulate the last n observations after burn-in from a zero initial
/// state. Deterministic in seed; noise draw order per step is X, Y, then Z
/// if a confounder is present. Returns (x, y).
pub fn simulate_naar(spec: &NaarSpec, n: usize, seed: u64) -> Result<(Series, Series), NaarError> {
    spec.validate()?;
    if n < 2 {
        return Err(NaarError::TooFewObservations { n });
    }
    let steps = spec.burn_in + n;
    let mut rng = RngState::substream(seed, 0);
    let mut x = Vec::with_capacity(steps);
    let mut y = Vec::with_capacity(steps);
    let mut z: Vec<f64> = Vec::with_capacity(steps);
    let at = |v: &Vec<f64>, t: usize, lag: usize| if t < lag { 0.0 } else { v[t - lag] };
    for t in 0..steps {
        let ex = spec.noise_x.sample(&mut rng);
        let ey = spec.noise_y.sample(&mut rng);
        let ez = spec.confounder.as_ref().map(|c| c.noise.sample(&mut rng));
        let mut xt = spec.f1.apply(at(&x, t, 1)) + spec.f2.apply(at(&y, t, spec.lag)) + ex;
        let mut yt = spec.g1.apply(at(&y, t, 1)) + spec.g2.apply(at(&x, t, spec.lag)) + ey;
        if let Some(conf) = &spec.confounder {
            let zt = conf.self_fn.apply(at(&z, t, 1)) + ez.unwrap();
            xt += conf.into_x.apply(at(&z, t, conf.lag_x));
            yt += conf.into_y.apply(at(&z, t, conf.lag_y));
            z.push(zt);
        }
        x.push(xt);
        y.push(yt);
    }
    let xs = Series::new("x1", x.split_off(spec.burn_in)).expect("finite recursion output");
    let ys = Series::new("x2", y.split_off(spec.burn_in)).expect("finite recursion output");
    Ok((xs, ys))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pareto11() -> NoiseSpec {
        NoiseSpec::pareto(1.0, 1.0).unwrap()
    }

    fn all_zero_spec() -> NaarSpec {
        NaarSpec {
            f1: FunctionDescriptor::Zero,
            f2: FunctionDescriptor::Zero,
            g1: FunctionDescriptor::Zero,
            g2: FunctionDescriptor::Zero,
            lag: 3,
            noise_x: pareto11(),
            noise_y: pareto11(),
            confounder: None,
            burn_in: 0,
        }
    }

    #[test]
    fn descriptor_validation() {
        assert!(FunctionDescriptor::Linear { c: 0.0 }.validate().is_ok());
        assert!(FunctionDescriptor::Linear { c: 0.99 }.validate().is_ok());
        assert_eq!(
            FunctionDescriptor::Linear { c: 1.0 }.validate(),
            Err(NaarError::LinearSlope { c: 1.0 })
        );
        assert!(FunctionDescriptor::Linear { c: -0.1 }.validate().is_err());
        assert!(FunctionDescriptor::PowerThreshold { exponent: 0.75, threshold: 50.0 }
            .validate()
            .is_ok());
        assert!(FunctionDescriptor::PowerThreshold { exponent: 1.0, threshold: 0.0 }
            .validate()
            .is_err());
        assert!(FunctionDescriptor::PowerThreshold { exponent: 0.5, threshold: -1.0 }
            .validate()
            .is_err());
    }

    #[test]
    fn descriptor_application() {
        assert_eq!(FunctionDescriptor::Zero.apply(7.0), 0.0);
        assert_eq!(FunctionDescriptor::Linear { c: 0.5 }.apply(8.0), 4.0);
        assert_eq!(FunctionDescriptor::Sqrt.apply(9.0), 3.0);
        assert_eq!(FunctionDescriptor::Sqrt.apply(-4.0), 0.0);
        let f = FunctionDescriptor::PowerThreshold { exponent: 0.75, threshold: 50.0 };
        assert_eq!(f.apply(50.0), 0.0); // strict threshold
        assert_eq!(f.apply(16.0), 0.0);
        assert!((f.apply(81.0) - 81.0f64.powf(0.75)).abs() < 1e-12);
    }

    #[test]
    fn all_zero_links_reproduce_noise() {
        let spec = all_zero_spec();
        let (x, y) = simulate_naar(&spec, 10, 77).unwrap();
        let mut rng = RngState::substream(77, 0);
        for t in 0..10 {
            let ex = spec.noise_x.sample(&mut rng);
            let ey = spec.noise_y.sample(&mut rng);
            assert_eq!(x.values()[t], ex);
            assert_eq!(y.values()[t], ey);
        }
    }

    #[test]
    fn negative_noise_rejected() {
        let mut spec = all_zero_spec();
        spec.noise_x = NoiseSpec::standard_gaussian();
        assert_eq!(spec.validate(), Err(NaarError::NegativeNoiseSupport { channel: "x" }));
        let mut spec = all_zero_spec();
        spec.noise_y = NoiseSpec::cauchy();
        assert_eq!(spec.validate(), Err(NaarError::NegativeNoiseSupport { channel: "y" }));
    }

    #[test]
    fn lag_validation() {
        let mut spec = all_zero_spec();
        spec.lag = 0;
        assert_eq!(spec.validate(), Err(NaarError::ZeroLag));
        assert!(matches!(
            simulate_naar(&all_zero_spec(), 1, 1),
            Err(NaarError::TooFewObservations { n: 1 })
        ));
    }

    #[test]
    fn confounded_simulation_deterministic() {
        let spec = NaarSpec {
            f1: FunctionDescriptor::Linear { c: 0.5 },
            f2: FunctionDescriptor::Zero,
            g1: FunctionDescriptor::Linear { c: 0.5 },
            g2: FunctionDescriptor::PowerThreshold { exponent: 0.75, threshold: 50.0 },
            lag: 3,
            noise_x: pareto11(),
            noise_y: pareto11(),
            confounder: Some(ConfounderSpec {
                self_fn: FunctionDescriptor::Linear { c: 0.5 },
                into_x: FunctionDescriptor::Linear { c: 0.5 },
                lag_x: 2,
                into_y: FunctionDescriptor::Linear { c: 0.5 },
                lag_y: 1,
                noise: pareto11().scaled(0.5).unwrap(),
            }),
            burn_in: 100,
        };
        let (x1, y1) = simulate_naar(&spec, 200, 5).unwrap();
        let (x2, y2) = simulate_naar(&spec, 200, 5).unwrap();
        assert_eq!(x1.values(), x2.values());
        assert_eq!(y1.values(), y2.values());
        let (x3, _) = simulate_naar(&spec, 200, 6).unwrap();
        assert_ne!(x1.values(), x3.values());
        // json round trip
        let json = serde_json::to_string(&spec).unwrap();
        let back: NaarSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
    }
}
