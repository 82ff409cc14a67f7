use crate::naar::{ConfounderSpec, FunctionDescriptor, NaarError, NaarSpec, simulate_naar};
use crate::rng::{NoiseError, NoiseSpec};
use crate::series::Series;
use crate::var::{simulate_var, simulate_var_unchecked, SimError, VarSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Var(#[from] SimError),
    #[error(transparent)]
    Naar(#[from] NaarError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
}

/// Either family of generative model, ready to simulate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSpec {
    Var(VarSpec),
    Naar(NaarSpec),
}

impl ModelSpec {
    pub fn simulate(&self, n: usize, seed: u64) -> Result<Vec<Series>, ModelError> {
        match self {
            ModelSpec::Var(spec) => Ok(simulate_var(spec, n, seed)?),
            ModelSpec::Naar(spec) => {
                let (x, y) = simulate_naar(spec, n, seed)?;
                Ok(vec![x, y])
            }
        }
    }

    /// As `simulate`, but lets unit-root VAR parameterizations through
    /// (see `simulate_var_unchecked`). NAAR models are unaffected.
    pub fn simulate_unchecked(&self, n: usize, seed: u64) -> Result<Vec<Series>, ModelError> {
        match self {
            ModelSpec::Var(spec) => Ok(simulate_var_unchecked(spec, n, seed)?),
            ModelSpec::Naar(spec) => {
                let (x, y) = simulate_naar(spec, n, seed)?;
                Ok(vec![x, y])
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::Var(spec) => spec.dim,
            ModelSpec::Naar(_) => 2,
        }
    }
}

/// The named generative models, with the parameters left free where the
/// original experiments vary them.
#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    /// X feeds Y through a square root at lag 5; the introductory example.
    Motivating,
    /// Bivariate VAR(1) with a lag-1 cross link.
    Example1,
    /// Y is a moving average of X only; the extremal link dies after lag 1.
    Example2,
    /// Three observed channels, Z driving both X and Y, plus X driving Y.
    Example3,
    /// Bivariate VAR(2) with cross link delta at lag 2 and free noise.
    Model1 { delta: f64, noise_x: NoiseSpec, noise_y: NoiseSpec },
    /// VAR(6) with Cauchy noise; the only cross link sits at lag 6.
    Model2,
    /// Three-channel VAR(3) with a latent-style common cause Z and
    /// Student-t noise of per-channel degrees.
    Model3 { delta_x: f64, delta_y: f64, theta_x: u32, theta_y: u32, theta_z: u32 },
    /// Nonlinear model with hidden confounder; the X->Y link exists only
    /// above the threshold 50.
    Model4,
}

fn pareto11() -> NoiseSpec {
    NoiseSpec::pareto(1.0, 1.0).expect("static parameters")
}

impl Preset {
    pub fn model1_pareto(delta: f64) -> Preset {
        Preset::Model1 { delta, noise_x: pareto11(), noise_y: pareto11() }
    }

    pub fn model1_gaussian(delta: f64) -> Preset {
        Preset::Model1 {
            delta,
            noise_x: NoiseSpec::standard_gaussian(),
            noise_y: NoiseSpec::standard_gaussian(),
        }
    }

    /// Channel names in simulation order.
    pub fn channel_names(&self) -> &'static [&'static str] {
        match self {
            Preset::Example3 | Preset::Model3 { .. } => &["X", "Y", "Z"],
            _ => &["X", "Y"],
        }
    }

    pub fn spec(&self) -> Result<ModelSpec, ModelError> {
        let linear_half = FunctionDescriptor::Linear { c: 0.5 };
        let spec = match self {
            Preset::Motivating => ModelSpec::Naar(NaarSpec {
                f1: linear_half,
                f2: FunctionDescriptor::Zero,
                g1: linear_half,
                g2: FunctionDescriptor::Sqrt,
                lag: 5,
                noise_x: pareto11(),
                noise_y: pareto11(),
                confounder: None,
                burn_in: 1000,
            }),
            Preset::Example1 => ModelSpec::Var(VarSpec {
                dim: 2,
                order: 1,
                coeffs: vec![vec![vec![0.5, 0.0], vec![0.5, 0.5]]],
                noise: vec![pareto11(), pareto11()],
                burn_in: 1000,
            }),
            Preset::Example2 => ModelSpec::Var(VarSpec {
                dim: 2,
                order: 2,
                coeffs: vec![
                    vec![vec![0.5, 0.0], vec![1.0, 0.0]],
                    vec![vec![0.0, 0.0], vec![-0.5, 0.0]],
                ],
                noise: vec![pareto11(), pareto11()],
                burn_in: 1000,
            }),
            Preset::Example3 => ModelSpec::Var(VarSpec {
                dim: 3,
                order: 1,
                // channels (X, Y, Z); Z drives both, X drives Y
                coeffs: vec![vec![
                    vec![0.5, 0.0, 0.5],
                    vec![0.5, 0.5, 0.5],
                    vec![0.0, 0.0, 0.5],
                ]],
                noise: vec![
                    NoiseSpec::pareto(2.0, 2.0)?,
                    NoiseSpec::pareto(2.0, 2.0)?,
                    pareto11(),
                ],
                burn_in: 1000,
            }),
            Preset::Model1 { delta, noise_x, noise_y } => ModelSpec::Var(VarSpec {
                dim: 2,
                order: 2,
                coeffs: vec![
                    vec![vec![0.5, 0.0], vec![0.0, 0.5]],
                    vec![vec![0.0, 0.0], vec![*delta, 0.0]],
                ],
                noise: vec![*noise_x, *noise_y],
                burn_in: 1000,
            }),
            Preset::Model2 => {
                let zero = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
                let mut coeffs = vec![zero; 6];
                coeffs[0] = vec![vec![0.5, 0.0], vec![0.0, 0.5]];
                coeffs[5] = vec![vec![0.0, 0.0], vec![0.5, 0.0]];
                ModelSpec::Var(VarSpec {
                    dim: 2,
                    order: 6,
                    coeffs,
                    noise: vec![NoiseSpec::cauchy(), NoiseSpec::cauchy()],
                    burn_in: 1000,
                })
            }
            Preset::Model3 { delta_x, delta_y, theta_x, theta_y, theta_z } => {
                // channels (X, Y, Z)
                let zero3 = || vec![0.0; 3];
                let mut a1 = vec![zero3(), zero3(), zero3()];
                a1[0][0] = 0.5;
                a1[1][1] = 0.5;
                a1[1][2] = 0.5;
                a1[2][2] = 0.5;
                let mut a2 = vec![zero3(), zero3(), zero3()];
                a2[0][2] = 0.5;
                let mut a3 = vec![zero3(), zero3(), zero3()];
                a3[0][1] = *delta_y;
                a3[1][0] = *delta_x;
                ModelSpec::Var(VarSpec {
                    dim: 3,
                    order: 3,
                    coeffs: vec![a1, a2, a3],
                    noise: vec![
                        NoiseSpec::student_t(*theta_x)?,
                        NoiseSpec::student_t(*theta_y)?,
                        NoiseSpec::student_t(*theta_z)?,
                    ],
                    burn_in: 1000,
                })
            }
            Preset::Model4 => ModelSpec::Naar(NaarSpec {
                f1: linear_half,
                f2: FunctionDescriptor::Zero,
                g1: linear_half,
                g2: FunctionDescriptor::PowerThreshold { exponent: 0.75, threshold: 50.0 },
                lag: 3,
                noise_x: pareto11(),
                noise_y: pareto11(),
                confounder: Some(ConfounderSpec {
                    self_fn: linear_half,
                    into_x: linear_half,
                    lag_x: 2,
                    into_y: linear_half,
                    lag_y: 1,
                    // the doubled draw is standard Pareto
                    noise: pareto11().scaled(0.5)?,
                }),
                burn_in: 1000,
            }),
        };
        Ok(spec)
    }

    /// Simulate with the preset's own channel names (X, Y[, Z]).
    pub fn simulate(&self, n: usize, seed: u64) -> Result<Vec<Series>, ModelError> {
        let channels = self.spec()?.simulate(n, seed)?;
        Ok(channels
            .into_iter()
            .zip(self.channel_names())
            .map(|(s, name)| s.renamed(*name))
            .collect())
    }
}
