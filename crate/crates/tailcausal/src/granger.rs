use crate::series::Series;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GrangerError {
    #[error("design has {rows} rows but {cols} columns; need rows >= columns >= 1")]
    BadShape { rows: usize, cols: usize },
    #[error("design row {row} has {got} entries, expected {expected}")]
    RaggedRow { row: usize, expected: usize, got: usize },
    #[error("{targets} targets for {rows} design rows")]
    TargetLength { rows: usize, targets: usize },
    #[error("design column {column} is numerically rank deficient (pivot below tolerance {tolerance:e})")]
    RankDeficient { column: usize, tolerance: f64 },
    #[error("F arguments need x >= 0 and dof >= 1, got x={x}, d1={d1}, d2={d2}")]
    BadFArguments { x: f64, d1: f64, d2: f64 },
    #[error("order must be at least 1")]
    OrderZero,
    #[error("series lengths differ: {x} vs {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("n = {n} too short for order {q}; the F test needs n >= {min}")]
    SampleTooShort { n: usize, q: usize, min: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub rss: f64,
}

/// Relative pivot tolerance for declaring a design rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// Least squares via Householder QR. Rank is tolerance-checked: a pivot
/// below RANK_TOL times the largest original column norm fails loudly
/// rather than returning an unstable solve.
pub fn ols_fit(rows: &[Vec<f64>], targets: &[f64]) -> Result<OlsFit, GrangerError> {
    let m = rows.len();
    let p = if m == 0 { 0 } else { rows[0].len() };
    if m < p || p == 0 {
        return Err(GrangerError::BadShape { rows: m, cols: p });
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != p {
            return Err(GrangerError::RaggedRow { row: i, expected: p, got: row.len() });
        }
    }
    if targets.len() != m {
        return Err(GrangerError::TargetLength { rows: m, targets: targets.len() });
    }

    // column-major working copy
    let mut a = vec![0.0f64; m * p];
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            a[j * m + i] = v;
        }
    }
    let mut b = targets.to_vec();

    let max_col_norm = (0..p)
        .map(|j| a[j * m..(j + 1) * m].iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0f64, f64::max);
    let tol = RANK_TOL * max_col_norm;

    let mut v = vec![0.0f64; m];
    for j in 0..p {
        let norm = (j..m).map(|i| a[j * m + i] * a[j * m + i]).sum::<f64>().sqrt();
        if norm <= tol {
            return Err(GrangerError::RankDeficient { column: j, tolerance: tol });
        }
        let pivot = a[j * m + j];
        let alpha = if pivot >= 0.0 { -norm } else { norm };
        v[j] = pivot - alpha;
        for i in j + 1..m {
            v[i] = a[j * m + i];
        }
        let vtv = (j..m).map(|i| v[i] * v[i]).sum::<f64>();
        a[j * m + j] = alpha;
        for i in j + 1..m {
            a[j * m + i] = 0.0;
        }
        if vtv == 0.0 {
            continue;
        }
        for col in j + 1..p {
            let dot = (j..m).map(|i| v[i] * a[col * m + i]).sum::<f64>();
            let scale = 2.0 * dot / vtv;
            for i in j..m {
                a[col * m + i] -= scale * v[i];
            }
        }
        let dot = (j..m).map(|i| v[i] * b[i]).sum::<f64>();
        let scale = 2.0 * dot / vtv;
        for i in j..m {
            b[i] -= scale * v[i];
        }
    }

    let mut coefficients = vec![0.0f64; p];
    for i in (0..p).rev() {
        let mut acc = b[i];
        for j in i + 1..p {
            acc -= a[j * m + i] * coefficients[j];
        }
        coefficients[i] = acc / a[i * m + i];
    }
    let rss = b[p..].iter().map(|v| v * v).sum::<f64>();
    Ok(OlsFit { coefficients, rss })
}

/// CDF of the F distribution: I_{d1·x/(d1·x+d2)}(d1/2, d2/2), evaluated by
/// continued fraction to absolute error well under 1e-10.
pub fn f_cdf(x: f64, d1: f64, d2: f64) -> Result<f64, GrangerError> {
    if !(x >= 0.0) || !(d1 >= 1.0) || !(d2 >= 1.0) {
        return Err(GrangerError::BadFArguments { x, d1, d2 });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let t = d1 * x / (d1 * x + d2);
    Ok(reg_inc_beta(d1 / 2.0, d2 / 2.0, t))
}

/// Regularized incomplete beta I_t(a,b) for a, b >= 0.5, t in [0,1].
fn reg_inc_beta(a: f64, b: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    // the continued fraction converges fast below this pivot; reflect above
    let front =
        (a * t.ln() + b * (1.0 - t).ln() + ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)).exp();
    if t < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, t) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - t) / b
    }
}

// modified Lentz evaluation of the standard incomplete-beta continued fraction
fn beta_cf(a: f64, b: f64, t: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let mut c = 1.0f64;
    let mut d = 1.0 - (a + b) * t / (a + 1.0);
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=300 {
        let mf = m as f64;
        let num = mf * (b - mf) * t / ((a + 2.0 * mf - 1.0) * (a + 2.0 * mf));
        d = 1.0 + num * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + num / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let num = -(a + mf) * (a + b + mf) * t / ((a + 2.0 * mf) * (a + 2.0 * mf + 1.0));
        d = 1.0 + num * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + num / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

// Lanczos (g = 7, 9 terms); callers guarantee z >= 0.5
fn ln_gamma(z: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    let z = z - 1.0;
    let mut acc = 0.99999999999980993;
    for (i, &c) in COEFFS.iter().enumerate() {
        acc += c / (z + i as f64 + 1.0);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// F test of H₀ "x does not Granger-cause y": does adding x's lags to an
/// autoregression of y reduce the residual sum of squares more than chance?
#[derive(Debug, Clone, Serialize)]
pub struct GrangerResult {
    pub f_statistic: f64,
    pub p_value: f64,
    pub order: usize,
    pub dof: (usize, usize),
    pub reject_at: Vec<(f64, bool)>,
}

/// Restricted model: y_t on an intercept and y_{t−1..t−q}. Unrestricted adds
/// x_{t−1..t−q}. The first q rows are dropped (n_eff = n − q), and
/// F = ((RSS_r − RSS_u)/q) / (RSS_u/(n_eff − 2q − 1)).
pub fn granger_test(
    x: &Series,
    y: &Series,
    q: usize,
    levels: &[f64],
) -> Result<GrangerResult, GrangerError> {
    if q == 0 {
        return Err(GrangerError::OrderZero);
    }
    let n = x.len();
    if y.len() != n {
        return Err(GrangerError::LengthMismatch { x: n, y: y.len() });
    }
    // positive denominator dof, not just enough rows
    let min = 3 * q + 2;
    if n < min {
        return Err(GrangerError::SampleTooShort { n, q, min });
    }
    let xv = x.values();
    let yv = y.values();
    let n_eff = n - q;
    let mut restricted = Vec::with_capacity(n_eff);
    let mut unrestricted = Vec::with_capacity(n_eff);
    let mut targets = Vec::with_capacity(n_eff);
    for t in q..n {
        let mut row = Vec::with_capacity(2 * q + 1);
        row.push(1.0);
        for lag in 1..=q {
            row.push(yv[t - lag]);
        }
        restricted.push(row.clone());
        for lag in 1..=q {
            row.push(xv[t - lag]);
        }
        unrestricted.push(row);
        targets.push(yv[t]);
    }
    let rss_r = ols_fit(&restricted, &targets)?.rss;
    let rss_u = ols_fit(&unrestricted, &targets)?.rss;

    let dof_den = n_eff - 2 * q - 1;
    // nested models: the true difference is >= 0, clamp float noise
    let num = (rss_r - rss_u).max(0.0) / q as f64;
    let den = rss_u / dof_den as f64;
    let (f_statistic, p_value) = if den == 0.0 {
        if num == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY, 0.0)
        }
    } else {
        let f = num / den;
        (f, 1.0 - f_cdf(f, q as f64, dof_den as f64)?)
    };
    let reject_at = levels.iter().map(|&a| (a, p_value < a)).collect();
    Ok(GrangerResult { f_statistic, p_value, order: q, dof: (q, dof_den), reject_at })
}
