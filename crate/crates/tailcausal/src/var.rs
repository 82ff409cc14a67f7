use crate::rng::{NoiseError, NoiseSpec, RngState};
use crate::series::Series;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_BURN_IN: usize = 1000;
/// Coefficients with absolute value at or below this are treated as exact
/// zeros by the extremal-causal-condition scan.
pub const DEFAULT_ZERO_TOL: f64 = 1e-12;

/// Comparisons against the unit circle are only trusted to this resolution;
/// a spectral radius inside the band counts as unstable.
const STABILITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("dimension must be >= 1")]
    ZeroDim,
    #[error("order must be >= 1")]
    ZeroOrder,
    #[error("expected {expected} coefficient matrices, got {got}")]
    WrongLagCount { expected: usize, got: usize },
    #[error("coefficient matrix for lag {lag} is not {d}x{d}")]
    BadMatrixShape { lag: usize, d: usize },
    #[error("coefficient matrix for lag {lag} has a non-finite entry")]
    NonFiniteCoeff { lag: usize },
    #[error("expected {expected} noise channels, got {got}")]
    WrongNoiseCount { expected: usize, got: usize },
    #[error("refusing to simulate an unstable VAR (spectral radius {radius})")]
    Unstable { radius: f64 },
    #[error("operation requires a bivariate spec, got dimension {dim}")]
    NotBivariate { dim: usize },
    #[error("horizon {horizon} is too short (need at least {min})")]
    HorizonTooShort { horizon: usize, min: usize },
    #[error("need at least 2 observations, got n = {n}")]
    TooFewObservations { n: usize },
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

/// A d-dimensional VAR(q): X_t = A_1 X_{t-1} + ... + A_q X_{t-q} + eps_t.
///
/// `coeffs[l]` is the row-major matrix A_{l+1}; `noise[c]` drives channel c.
/// Serializes to plain JSON with matrices as nested row-major arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarSpec {
    pub dim: usize,
    pub order: usize,
    pub coeffs: Vec<Vec<Vec<f64>>>,
    pub noise: Vec<NoiseSpec>,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
}

fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}

impl VarSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.dim == 0 {
            return Err(SimError::ZeroDim);
        }
        if self.order == 0 {
            return Err(SimError::ZeroOrder);
        }
        if self.coeffs.len() != self.order {
            return Err(SimError::WrongLagCount { expected: self.order, got: self.coeffs.len() });
        }
        for (l, mat) in self.coeffs.iter().enumerate() {
            let lag = l + 1;
            if mat.len() != self.dim || mat.iter().any(|row| row.len() != self.dim) {
                return Err(SimError::BadMatrixShape { lag, d: self.dim });
            }
            if mat.iter().flatten().any(|v| !v.is_finite()) {
                return Err(SimError::NonFiniteCoeff { lag });
            }
        }
        if self.noise.len() != self.dim {
            return Err(SimError::WrongNoiseCount { expected: self.dim, got: self.noise.len() });
        }
        Ok(())
    }

    /// Row-major dq x dq companion matrix: coefficient blocks on top,
    /// identity blocks on the subdiagonal.
    fn companion(&self) -> (Vec<f64>, usize) {
        let d = self.dim;
        let q = self.order;
        let m = d * q;
        let mut c = vec![0.0; m * m];
        for (l, mat) in self.coeffs.iter().enumerate() {
            for r in 0..d {
                for s in 0..d {
                    c[r * m + l * d + s] = mat[r][s];
                }
            }
        }
        for i in d..m {
            c[i * m + (i - d)] = 1.0;
        }
        (c, m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub stable: bool,
    pub spectral_radius: f64,
}

fn frobenius(m: &[f64]) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn matmul(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for l in 0..d {
            let ail = a[i * d + l];
            if ail == 0.0 {
                continue;
            }
            for j in 0..d {
                out[i * d + j] += ail * b[l * d + j];
            }
        }
    }
    out
}

/// Spectral radius by the Gelfand limit rho = lim ||A^m||^{1/m} evaluated
/// with renormalized repeated squaring: with s_j the Frobenius norm of the
/// j-th squared-and-normalized iterate, log rho = sum_j 2^{-j} log s_j.
/// The truncation error after 64 squarings (m = 2^64) is far below f64
/// resolution, including defective and complex-pair dominant eigenvalues.
fn spectral_radius(mat: &[f64], d: usize) -> f64 {
    let mut m = mat.to_vec();
    let mut log_rho = 0.0;
    for j in 0..64 {
        let s = frobenius(&m);
        if s == 0.0 {
            return 0.0; // some power vanished: all eigenvalues are 0
        }
        log_rho += s.ln() * 0.5f64.powi(j);
        let inv = 1.0 / s;
        for v in m.iter_mut() {
            *v *= inv;
        }
        m = matmul(&m, &m, d);
    }
    log_rho.exp()
}

pub fn check_stability(spec: &VarSpec) -> Result<StabilityReport, SimError> {
    spec.validate()?;
    let (c, m) = spec.companion();
    let radius = spectral_radius(&c, m);
    Ok(StabilityReport { stable: radius < 1.0 - STABILITY_TOL, spectral_radius: radius })
}

/// Recursion with explicit noise; eps[t][c] drives channel c at step t.
/// Zero initial state. Returns the full (burn-in included) paths, one inner
/// vector per channel.
fn run_var_recursion(spec: &VarSpec, eps: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = spec.dim;
    let steps = eps.len();
    let mut hist: Vec<Vec<f64>> = vec![Vec::with_capacity(steps); d];
    for t in 0..steps {
        for c in 0..d {
            let mut v = eps[t][c];
            for (l, mat) in spec.coeffs.iter().enumerate() {
                let lag = l + 1;
                if lag > t {
                    break;
                }
                let row = &mat[c];
                for (s, coef) in row.iter().enumerate() {
                    if *coef != 0.0 {
                        v += coef * hist[s][t - lag];
                    }
                }
            }
            hist[c].push(v);
        }
    }
    hist
}

fn draw_noise(spec: &[NoiseSpec], steps: usize, rng: &mut RngState) -> Vec<Vec<f64>> {
    // draw order: one step at a time, channels in order
    (0..steps).map(|_| spec.iter().map(|ns| ns.sample(rng)).collect()).collect()
}

/// Simulate the last n observations of a stable VAR after `burn_in` steps
/// from a zero initial state. Deterministic in `seed`; channels are named
/// x1..xd.
pub fn simulate_var(spec: &VarSpec, n: usize, seed: u64) -> Result<Vec<Series>, SimError> {
    let report = check_stability(spec)?;
    if !report.stable {
        return Err(SimError::Unstable { radius: report.spectral_radius });
    }
    simulate_without_stability_gate(spec, n, seed)
}

/// `simulate_var` minus the stability refusal, for parameterizations that
/// sit exactly on the unit circle (e.g. a symmetric feedback loop whose
/// companion matrix has eigenvalue 1). The recursion still starts from
/// zero; paths may be nonstationary.
pub fn simulate_var_unchecked(spec: &VarSpec, n: usize, seed: u64) -> Result<Vec<Series>, SimError> {
    spec.validate()?;
    simulate_without_stability_gate(spec, n, seed)
}

fn simulate_without_stability_gate(
    spec: &VarSpec,
    n: usize,
    seed: u64,
) -> Result<Vec<Series>, SimError> {
    if n < 2 {
        return Err(SimError::TooFewObservations { n });
    }
    let steps = spec.burn_in + n;
    let mut rng = RngState::substream(seed, 0);
    let eps = draw_noise(&spec.noise, steps, &mut rng);
    let hist = run_var_recursion(spec, &eps);
    Ok(hist
        .into_iter()
        .enumerate()
        .map(|(c, mut path)| {
            let tail = path.split_off(spec.burn_in);
            Series::new(format!("x{}", c + 1), tail).expect("finite recursion output")
        })
        .collect())
}

/// Moving-average coefficients of the causal representation of a bivariate
/// VAR: X_t = sum_i (a_i eps^X_{t-i} + c_i eps^Y_{t-i}),
/// Y_t = sum_i (d_i eps^X_{t-i} + b_i eps^Y_{t-i}).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaCoefficients {
    pub horizon: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
}

/// Psi_0 = I, Psi_j = sum_{i=1..min(j,q)} A_i Psi_{j-i}; entry map
/// (a_j, c_j; d_j, b_j).
pub fn causal_representation(spec: &VarSpec, horizon: usize) -> Result<MaCoefficients, SimError> {
    let report = check_stability(spec)?;
    if spec.dim != 2 {
        return Err(SimError::NotBivariate { dim: spec.dim });
    }
    if !report.stable {
        return Err(SimError::Unstable { radius: report.spectral_radius });
    }
    let mut psi: Vec<[f64; 4]> = Vec::with_capacity(horizon + 1);
    psi.push([1.0, 0.0, 0.0, 1.0]);
    for j in 1..=horizon {
        let mut m = [0.0f64; 4];
        for i in 1..=j.min(spec.order) {
            let a = &spec.coeffs[i - 1];
            let p = &psi[j - i];
            m[0] += a[0][0] * p[0] + a[0][1] * p[2];
            m[1] += a[0][0] * p[1] + a[0][1] * p[3];
            m[2] += a[1][0] * p[0] + a[1][1] * p[2];
            m[3] += a[1][0] * p[1] + a[1][1] * p[3];
        }
        psi.push(m);
    }
    Ok(MaCoefficients {
        horizon,
        a: psi.iter().map(|m| m[0]).collect(),
        c: psi.iter().map(|m| m[1]).collect(),
        d: psi.iter().map(|m| m[2]).collect(),
        b: psi.iter().map(|m| m[3]).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremalConditionReport {
    pub satisfied: bool,
    /// Smallest delay r for which every non-zero a_i has a non-zero d_{i+r}.
    pub witness_r: Option<usize>,
}

/// Does every extreme of the X-driving noise reach Y after some fixed delay
/// r <= q? Scans r = 0..q over the representation coefficients, treating
/// magnitudes at or below zero_tol as zeros.
pub fn check_extremal_causal_condition(
    ma: &MaCoefficients,
    q: usize,
    zero_tol: f64,
) -> Result<ExtremalConditionReport, SimError> {
    if ma.horizon < 2 * q {
        return Err(SimError::HorizonTooShort { horizon: ma.horizon, min: 2 * q });
    }
    for r in 0..=q {
        let ok = (0..=ma.horizon - r)
            .all(|i| !(ma.a[i].abs() > zero_tol) || ma.d[i + r].abs() > zero_tol);
        if ok {
            return Ok(ExtremalConditionReport { satisfied: true, witness_r: Some(r) });
        }
    }
    Ok(ExtremalConditionReport { satisfied: false, witness_r: None })
}
