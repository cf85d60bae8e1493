//! Posterior summaries, Bayesian influence functions, Gaussian KL between
//! draw clouds, and chain autocorrelation.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{dimension, domain, Error, Result};
use crate::math::{quantile_sorted, LN_2PI};
use crate::model::{Draws, RegressionParams};

/// Interval and point summary of one parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub name: String,
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Posterior medians and equal-tailed intervals for `alpha`, each `beta_k`
/// and `sigma2`. The metrics cover the `beta` coefficients and are present
/// only when the truth is supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub level: f64,
    pub rows: Vec<SummaryRow>,
    pub mse: Option<f64>,
    pub al: Option<f64>,
    pub cp: Option<f64>,
}

impl SummaryTable {
    /// Rows of the `beta` coefficients.
    pub fn beta_rows(&self) -> &[SummaryRow] {
        &self.rows[1..self.rows.len() - 1]
    }
}

/// Names used for the parameter rows, in `Draws::series` order.
pub fn parameter_names(p: usize) -> Vec<String> {
    let mut names = vec![String::from("alpha")];
    names.extend((1..=p).map(|k| format!("beta_{k}")));
    names.push(String::from("sigma2"));
    names
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

pub fn posterior_summary(draws: &Draws, level: f64, truth: Option<&RegressionParams>) -> Result<SummaryTable> {
    if draws.len() < 2 {
        return Err(domain!("posterior summaries need at least 2 draws"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(domain!("credible level must lie in (0, 1), got {level}"));
    }
    let p = draws.p();
    if let Some(t) = truth {
        if t.p() != p {
            return Err(dimension!("truth has {} coefficients, draws have {p}", t.p()));
        }
    }
    let tail = 0.5 * (1.0 - level);
    let rows: Vec<SummaryRow> = parameter_names(p)
        .into_iter()
        .enumerate()
        .map(|(j, name)| {
            let s = sorted(draws.series(j));
            SummaryRow {
                name,
                median: quantile_sorted(&s, 0.5),
                lower: quantile_sorted(&s, tail),
                upper: quantile_sorted(&s, 1.0 - tail),
            }
        })
        .collect();
    let (mut mse, mut al, mut cp) = (None, None, None);
    if let Some(t) = truth {
        let betas = &rows[1..=p];
        let pf = p as f64;
        mse = Some(betas.iter().zip(t.beta()).map(|(r, b)| (r.median - b) * (r.median - b)).sum::<f64>() / pf);
        al = Some(betas.iter().map(|r| r.upper - r.lower).sum::<f64>() / pf);
        cp = Some(betas.iter().zip(t.beta()).filter(|(r, &b)| r.lower <= b && b <= r.upper).count() as f64 / pf);
    }
    Ok(SummaryTable { level, rows, mse, al, cp })
}

/// Which parameters enter a moment-matched comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamSubset {
    /// `(alpha, beta)`.
    Coefficients,
    /// `(alpha, beta, sigma2)`.
    All,
}

/// Mean and covariance of the selected parameters over the draws.
pub fn moment_match(draws: &Draws, which: ParamSubset) -> (DVector<f64>, DMatrix<f64>) {
    let d = match which {
        ParamSubset::Coefficients => draws.p() + 1,
        ParamSubset::All => draws.p() + 2,
    };
    let rows: Vec<Vec<f64>> = draws.samples().iter().map(|s| s.params().to_vec()[..d].to_vec()).collect();
    crate::math::mean_and_covariance(&rows)
}

/// Closed-form `KL(N(m_p, S_p) || N(m_q, S_q))`.
pub fn gaussian_kl(mean_p: &DVector<f64>, cov_p: &DMatrix<f64>, mean_q: &DVector<f64>, cov_q: &DMatrix<f64>) -> Result<f64> {
    let d = mean_p.len();
    let chol_p = cov_p.clone().cholesky().ok_or_else(|| Error::Numerical("covariance of p is singular".into()))?;
    let chol_q = cov_q.clone().cholesky().ok_or_else(|| Error::Numerical("covariance of q is singular".into()))?;
    let logdet = |c: &nalgebra::Cholesky<f64, nalgebra::Dyn>| 2.0 * c.l().diagonal().iter().map(|v| libm::log(*v)).sum::<f64>();
    let trace = chol_q.solve(cov_p).trace();
    let diff = mean_q - mean_p;
    let maha = diff.dot(&chol_q.solve(&diff));
    let kl = 0.5 * (trace + maha - d as f64 + logdet(&chol_q) - logdet(&chol_p));
    Ok(kl.max(0.0))
}

/// Result of [`estimate_kl_gaussian`]; `regularized` records that a
/// singular sample covariance received the `1e-8` ridge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlEstimate {
    pub value: f64,
    pub regularized: bool,
}

pub const KL_RIDGE: f64 = 1e-8;

/// `KL(p || q)` between Gaussians moment-matched to two draw clouds.
pub fn estimate_kl_gaussian(draws_p: &Draws, draws_q: &Draws, which: ParamSubset) -> Result<KlEstimate> {
    if draws_p.p() != draws_q.p() {
        return Err(dimension!("draw sets have {} and {} coefficients", draws_p.p(), draws_q.p()));
    }
    let (mp, mut sp) = moment_match(draws_p, which);
    let (mq, mut sq) = moment_match(draws_q, which);
    let mut regularized = false;
    for s in [&mut sp, &mut sq] {
        if s.clone().cholesky().is_none() {
            for k in 0..s.nrows() {
                s[(k, k)] += KL_RIDGE;
            }
            regularized = true;
        }
    }
    Ok(KlEstimate { value: gaussian_kl(&mp, &sp, &mq, &sq)?, regularized })
}

/// Error density assumed when forming `H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorDensity {
    Normal,
    /// Location-scale Student-t with scale `sqrt(sigma2)`.
    StudentT(f64),
}

impl ErrorDensity {
    pub fn log_density(self, y: f64, mean: f64, sigma2: f64) -> f64 {
        let r = y - mean;
        match self {
            ErrorDensity::Normal => -0.5 * (LN_2PI + libm::log(sigma2)) - r * r / (2.0 * sigma2),
            ErrorDensity::StudentT(df) => {
                libm::lgamma(0.5 * (df + 1.0))
                    - libm::lgamma(0.5 * df)
                    - 0.5 * libm::log(df * core::f64::consts::PI * sigma2)
                    - 0.5 * (df + 1.0) * libm::log1p(r * r / (df * sigma2))
            }
        }
    }
}

/// `H(theta, y | x)` for an observation at `(x, y)` under a single-covariate
/// model. With `gamma = 0`: `log f(y|x) - mean_t log f(t|x)`; with
/// `gamma > 0`: `(1/gamma){f(y|x)^gamma / mean_t f(t|x)^gamma - 1}`, where
/// `t` runs over `g_samples` drawn from the true `g(.|x)`.
pub fn h_function_at(
    theta: &RegressionParams,
    y: f64,
    x: f64,
    gamma: f64,
    density: ErrorDensity,
    g_samples: &[f64],
) -> Result<f64> {
    let denom = h_denominator(theta, x, gamma, density, g_samples)?;
    Ok(h_from_denominator(theta, y, x, gamma, density, denom))
}

/// `H` at the point `y = x + z`, i.e. residual `z` from the regression line
/// `y = x` of the simple model.
pub fn h_function(theta: &RegressionParams, z: f64, x: f64, gamma: f64, g_samples: &[f64]) -> Result<f64> {
    h_function_at(theta, x + z, x, gamma, ErrorDensity::Normal, g_samples)
}

fn check_theta(theta: &RegressionParams) -> Result<()> {
    if theta.p() != 1 {
        return Err(dimension!("H is defined for one covariate, got {}", theta.p()));
    }
    Ok(())
}

/// The `theta`-dependent but `z`-free part of `H`: the Monte Carlo mean of
/// `log f(t|x)` (`gamma = 0`) or of `f(t|x)^gamma`.
fn h_denominator(theta: &RegressionParams, x: f64, gamma: f64, density: ErrorDensity, g: &[f64]) -> Result<f64> {
    check_theta(theta)?;
    if g.is_empty() {
        return Err(domain!("H needs at least one sample from g"));
    }
    if !(gamma >= 0.0) {
        return Err(domain!("gamma must be nonnegative, got {gamma}"));
    }
    let mean = theta.alpha() + theta.beta()[0] * x;
    let m = g.len() as f64;
    Ok(if gamma == 0.0 {
        g.iter().map(|&t| density.log_density(t, mean, theta.sigma2())).sum::<f64>() / m
    } else {
        g.iter().map(|&t| libm::exp(gamma * density.log_density(t, mean, theta.sigma2()))).sum::<f64>() / m
    })
}

fn h_from_denominator(theta: &RegressionParams, y: f64, x: f64, gamma: f64, density: ErrorDensity, denom: f64) -> f64 {
    let lf = density.log_density(y, theta.alpha() + theta.beta()[0] * x, theta.sigma2());
    if gamma == 0.0 {
        lf - denom
    } else {
        (libm::exp(gamma * lf) / denom - 1.0) / gamma
    }
}

/// `n Cov(theta_k, H)` across draws, for every parameter `k`.
pub fn influence_from_h(thetas: &[Vec<f64>], h: &[f64], n: usize) -> Result<Vec<f64>> {
    if thetas.len() != h.len() || thetas.len() < 2 {
        return Err(dimension!("need matching draws and H values, at least 2"));
    }
    let m = h.len() as f64;
    let d = thetas[0].len();
    let h_mean = h.iter().sum::<f64>() / m;
    let mut out = vec![0.0; d];
    for k in 0..d {
        let t_mean = thetas.iter().map(|t| t[k]).sum::<f64>() / m;
        let cov = thetas.iter().zip(h).map(|(t, hv)| (t[k] - t_mean) * (hv - h_mean)).sum::<f64>() / (m - 1.0);
        out[k] = n as f64 * cov;
    }
    Ok(out)
}

/// Influence curve over a grid of residuals at covariate value `x_eval`.
/// `if_values[j]` holds `(IF_alpha, IF_beta, IF_sigma2)` at `z_grid[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceCurve {
    pub z_grid: Vec<f64>,
    pub if_values: Vec<Vec<f64>>,
    pub x_eval: f64,
}

/// `IF_k(z|x) = n Cov(theta_k, H(theta, z|x))` over the posterior draws of
/// the single-covariate model, with the outlying point at `y = centre + z`.
#[allow(clippy::too_many_arguments)]
pub fn influence_curve(
    draws: &Draws,
    z_grid: &[f64],
    x: f64,
    centre: f64,
    gamma: f64,
    density: ErrorDensity,
    g_samples: &[f64],
    n: usize,
) -> Result<InfluenceCurve> {
    if z_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(domain!("z grid must be strictly increasing"));
    }
    let thetas: Vec<Vec<f64>> = draws.samples().iter().map(|s| s.params().to_vec()).collect();
    let denoms: Vec<f64> =
        draws.samples().iter().map(|s| h_denominator(s.params(), x, gamma, density, g_samples)).collect::<Result<_>>()?;
    let mut if_values = Vec::with_capacity(z_grid.len());
    let mut h = vec![0.0; thetas.len()];
    for &z in z_grid {
        for ((hv, s), &den) in h.iter_mut().zip(draws.samples()).zip(&denoms) {
            *hv = h_from_denominator(s.params(), centre + z, x, gamma, density, den);
        }
        if_values.push(influence_from_h(&thetas, &h, n)?);
    }
    Ok(InfluenceCurve { z_grid: z_grid.to_vec(), if_values, x_eval: x })
}

/// Influence curve of the simple model `y = x + e` (outlier at `y = x + z`)
/// under the normal error density.
pub fn influence_function(
    draws: &Draws,
    z_grid: &[f64],
    x: f64,
    gamma: f64,
    g_samples: &[f64],
    n: usize,
) -> Result<InfluenceCurve> {
    influence_curve(draws, z_grid, x, x, gamma, ErrorDensity::Normal, g_samples, n)
}

/// `count` equispaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
    }
}

/// Sample autocorrelation of a series at lags `0..=max_lag`.
pub fn acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if series.len() < max_lag + 2 {
        return Err(domain!("need at least {} values for lag {max_lag}", max_lag + 2));
    }
    let m = series.len();
    let mean = series.iter().sum::<f64>() / m as f64;
    let c0: f64 = series.iter().map(|v| (v - mean) * (v - mean)).sum();
    if !(c0 > 0.0) {
        return Err(domain!("series has zero variance"));
    }
    Ok((0..=max_lag)
        .map(|lag| {
            let c: f64 = (0..m - lag).map(|t| (series[t] - mean) * (series[t + lag] - mean)).sum();
            c / c0
        })
        .collect())
}

/// ACF of `beta_k` (1-based) across the draws.
pub fn autocorrelation(draws: &Draws, k: usize, max_lag: usize) -> Result<Vec<f64>> {
    if k == 0 || k > draws.p() {
        return Err(dimension!("coefficient index {k} outside 1..={}", draws.p()));
    }
    acf(&draws.beta_series(k), max_lag)
}
