use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NoiseError {
    #[error("Pareto parameters must be positive (scale = {scale}, shape = {shape})")]
    ParetoParams { scale: f64, shape: f64 },
    #[error("Student-t degrees of freedom must be a positive integer")]
    StudentTDegrees,
    #[error("Gaussian sd must be positive (sd = {sd})")]
    GaussianSd { sd: f64 },
    #[error("scale multiplier must be positive (got {0})")]
    ScaleMultiplier(f64),
}

/// Deterministic uniform source with reproducible sub-streams.
///
/// ChaCha12 keyed by the 64-bit master seed; the stream id selects a
/// disjoint keystream, so (seed, repetition index) pairs give independent
/// draws regardless of thread scheduling. Identical seed and stream give an
/// identical sequence on every platform.
#[derive(Debug, Clone)]
pub struct RngState {
    rng: ChaCha12Rng,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self::substream(seed, 0)
    }

    pub fn substream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngState { rng }
    }

    /// Uniform on [0,1) with 53-bit resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Pareto(a,b) quantile a·(1−u)^{−1/b}; F(x) = 1 − (a/x)^b for x ≥ a.
pub fn pareto_quantile(a: f64, b: f64, u: f64) -> f64 {
    a * (1.0 - u).powf(-1.0 / b)
}

/// Standard Cauchy quantile tan(π(u − ½)).
pub fn cauchy_quantile(u: f64) -> f64 {
    (std::f64::consts::PI * (u - 0.5)).tan()
}

pub fn sample_pareto(a: f64, b: f64, rng: &mut RngState) -> Result<f64, NoiseError> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(NoiseError::ParetoParams { scale: a, shape: b });
    }
    Ok(pareto_quantile(a, b, rng.uniform()))
}

pub fn sample_cauchy(rng: &mut RngState) -> f64 {
    cauchy_quantile(rng.uniform())
}

/// Standard normal by the Box–Muller transform:
/// z = sqrt(−2 ln(1−u₁))·cos(2π u₂).
fn standard_normal(rng: &mut RngState) -> f64 {
    let u1 = rng.uniform();
    let u2 = rng.uniform();
    (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn sample_gaussian(mean: f64, sd: f64, rng: &mut RngState) -> Result<f64, NoiseError> {
    if !(sd > 0.0) {
        return Err(NoiseError::GaussianSd { sd });
    }
    Ok(mean + sd * standard_normal(rng))
}

/// Student-t with ν degrees: Z/√(V/ν), V a sum of ν squared standard
/// normals.
pub fn sample_student_t(nu: u32, rng: &mut RngState) -> Result<f64, NoiseError> {
    if nu < 1 {
        return Err(NoiseError::StudentTDegrees);
    }
    let z = standard_normal(rng);
    let mut v = 0.0;
    for _ in 0..nu {
        let w = standard_normal(rng);
        v += w * w;
    }
    Ok(z / (v / nu as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum NoiseDist {
    Pareto { scale: f64, shape: f64 },
    Cauchy,
    StudentT { nu: u32 },
    Gaussian { mean: f64, sd: f64 },
}

/// One noise channel: a distribution plus a positive scale multiplier
/// (e.g. a channel whose doubled value is standard Pareto uses 0.5).
///
/// Parameters are validated at construction and on deserialization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNoiseSpec", into = "RawNoiseSpec")]
pub struct NoiseSpec {
    dist: NoiseDist,
    scale_multiplier: f64,
}

#[derive(Serialize, Deserialize)]
struct RawNoiseSpec {
    dist: NoiseDist,
    #[serde(default = "default_scale")]
    scale_multiplier: f64,
}

fn default_scale() -> f64 {
    1.0
}

impl TryFrom<RawNoiseSpec> for NoiseSpec {
    type Error = NoiseError;
    fn try_from(raw: RawNoiseSpec) -> Result<Self, NoiseError> {
        NoiseSpec::checked(raw.dist, raw.scale_multiplier)
    }
}

impl From<NoiseSpec> for RawNoiseSpec {
    fn from(spec: NoiseSpec) -> RawNoiseSpec {
        RawNoiseSpec { dist: spec.dist, scale_multiplier: spec.scale_multiplier }
    }
}

impl NoiseSpec {
    fn checked(dist: NoiseDist, scale_multiplier: f64) -> Result<Self, NoiseError> {
        match dist {
            NoiseDist::Pareto { scale, shape } if !(scale > 0.0) || !(shape > 0.0) => {
                return Err(NoiseError::ParetoParams { scale, shape })
            }
            NoiseDist::StudentT { nu: 0 } => return Err(NoiseError::StudentTDegrees),
            NoiseDist::Gaussian { sd, .. } if !(sd > 0.0) => {
                return Err(NoiseError::GaussianSd { sd })
            }
            _ => {}
        }
        if !(scale_multiplier > 0.0) || !scale_multiplier.is_finite() {
            return Err(NoiseError::ScaleMultiplier(scale_multiplier));
        }
        Ok(NoiseSpec { dist, scale_multiplier })
    }

    pub fn pareto(scale: f64, shape: f64) -> Result<Self, NoiseError> {
        Self::checked(NoiseDist::Pareto { scale, shape }, 1.0)
    }

    pub fn cauchy() -> Self {
        NoiseSpec { dist: NoiseDist::Cauchy, scale_multiplier: 1.0 }
    }

    pub fn student_t(nu: u32) -> Result<Self, NoiseError> {
        Self::checked(NoiseDist::StudentT { nu }, 1.0)
    }

    pub fn gaussian(mean: f64, sd: f64) -> Result<Self, NoiseError> {
        Self::checked(NoiseDist::Gaussian { mean, sd }, 1.0)
    }

    pub fn standard_gaussian() -> Self {
        NoiseSpec { dist: NoiseDist::Gaussian { mean: 0.0, sd: 1.0 }, scale_multiplier: 1.0 }
    }

    pub fn scaled(self, multiplier: f64) -> Result<Self, NoiseError> {
        Self::checked(self.dist, multiplier)
    }

    pub fn scale_multiplier(&self) -> f64 {
        self.scale_multiplier
    }

    /// Whether every draw is >= 0 (the multiplier is positive, so only the
    /// distribution matters).
    pub fn support_nonnegative(&self) -> bool {
        matches!(self.dist, NoiseDist::Pareto { .. })
    }

    pub fn sample(&self, rng: &mut RngState) -> f64 {
        // parameters validated at construction
        let raw = match self.dist {
            NoiseDist::Pareto { scale, shape } => pareto_quantile(scale, shape, rng.uniform()),
            NoiseDist::Cauchy => sample_cauchy(rng),
            NoiseDist::StudentT { nu } => sample_student_t(nu, rng).expect("validated"),
            NoiseDist::Gaussian { mean, sd } => mean + sd * standard_normal(rng),
        };
        self.scale_multiplier * raw
    }

    pub fn label(&self) -> String {
        let base = match self.dist {
            NoiseDist::Pareto { scale, shape } => format!("pareto({scale},{shape})"),
            NoiseDist::Cauchy => "cauchy".to_string(),
            NoiseDist::StudentT { nu } => format!("t({nu})"),
            NoiseDist::Gaussian { mean, sd } => format!("gaussian({mean},{sd})"),
        };
        if self.scale_multiplier != 1.0 {
            format!("{}*{}", self.scale_multiplier, base)
        } else {
            base
        }
    }
}
