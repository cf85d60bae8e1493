//! The gamma-divergence loss, the synthetic log-posterior and the
//! bootstrap-weighted objective minimized by the MM solver.
//!
//! Density powers `f^gamma` underflow for large residuals, which is exactly
//! the regime of interest, so every sum over observations is evaluated in
//! log space.

use alloc::vec::Vec;

use crate::error::{dimension, domain, Result};
use crate::math::{log_sum_exp, LN_2PI};
use crate::model::{ChainState, Dataset, PriorKind, PriorSpec, RegressionParams};

/// Bootstrap observation weights; nonnegative and summing to `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(domain!("weight vector must be nonempty"));
        }
        if w.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(domain!("weights must be finite and nonnegative"));
        }
        let n = w.len() as f64;
        let sum: f64 = w.iter().sum();
        if (sum - n).abs() > 1e-9 * n {
            return Err(domain!("weights sum to {sum}, expected {n}"));
        }
        Ok(WeightVector(w))
    }

    pub fn uniform(n: usize) -> Self {
        WeightVector(alloc::vec![1.0; n])
    }

    pub(crate) fn from_raw(w: Vec<f64>) -> Self {
        WeightVector(w)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `log ||f||_{gamma+1}` for a normal density with variance `sigma2`.
pub fn log_gamma_power_norm(sigma2: f64, gamma: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(domain!("sigma2 must be positive, got {sigma2}"));
    }
    if !(gamma >= 0.0) {
        return Err(domain!("gamma must be nonnegative, got {gamma}"));
    }
    Ok((-0.5 * gamma * (LN_2PI + libm::log(sigma2)) - 0.5 * libm::log1p(gamma)) / (1.0 + gamma))
}

/// The `L_{gamma+1}` norm of a normal density,
/// `[(2 pi sigma2)^(-gamma/2) (1+gamma)^(-1/2)]^(1/(1+gamma))`; it does not
/// depend on the mean.
pub fn gamma_power_norm(sigma2: f64, gamma: f64) -> Result<f64> {
    log_gamma_power_norm(sigma2, gamma).map(libm::exp)
}

fn check_dims(params: &RegressionParams, data: &Dataset) -> Result<()> {
    if params.p() != data.p() {
        return Err(dimension!("params have {} coefficients, data has {} covariates", params.p(), data.p()));
    }
    Ok(())
}

/// Intercept used by the model: zero unless the dataset models one.
#[inline]
pub(crate) fn effective_alpha(params: &RegressionParams, data: &Dataset) -> f64 {
    if data.has_intercept() {
        params.alpha()
    } else {
        0.0
    }
}

/// `log f(y_i; alpha + x_i' beta, sigma2)` for every observation.
pub fn log_densities(params: &RegressionParams, data: &Dataset) -> Vec<f64> {
    let alpha = effective_alpha(params, data);
    let beta = params.beta();
    let s2 = params.sigma2();
    let c = -0.5 * (LN_2PI + libm::log(s2));
    data.rows()
        .zip(data.y())
        .map(|(x, &y)| {
            let r = y - alpha - crate::math::dot(x, beta);
            c - r * r / (2.0 * s2)
        })
        .collect()
}

pub fn log_likelihood(params: &RegressionParams, data: &Dataset) -> Result<f64> {
    check_dims(params, data)?;
    Ok(log_densities(params, data).iter().sum())
}

/// `(n/gamma) log{(1/n) sum_i (f_i / ||f||_{gamma+1})^gamma}`; at `gamma = 0`
/// the exact log-likelihood.
pub fn gamma_loss(params: &RegressionParams, data: &Dataset, gamma: f64) -> Result<f64> {
    check_dims(params, data)?;
    if !(gamma >= 0.0) {
        return Err(domain!("gamma must be nonnegative, got {gamma}"));
    }
    let logf = log_densities(params, data);
    if gamma == 0.0 {
        return Ok(logf.iter().sum());
    }
    let n = data.n() as f64;
    let scaled: Vec<f64> = logf.iter().map(|l| gamma * l).collect();
    let log_norm = log_gamma_power_norm(params.sigma2(), gamma)?;
    Ok(n / gamma * (log_sum_exp(&scaled) - libm::log(n)) - n * log_norm)
}

/// Quadratic prior penalty on `(alpha, beta)`: `beta' P beta / 2 + alpha^2 / (2 S_alpha)`
/// with `P = S_beta^{-1}` or `U^{-1}`.
pub(crate) fn coefficient_penalty(params: &RegressionParams, state: &ChainState, prior: &PriorSpec, has_intercept: bool) -> f64 {
    let beta = params.beta();
    let quad = match prior.beta_precision() {
        Some(prec) => {
            let mut q = 0.0;
            for i in 0..beta.len() {
                for j in 0..beta.len() {
                    q += beta[i] * prec[(i, j)] * beta[j];
                }
            }
            q
        }
        None => beta.iter().zip(state.u()).map(|(b, u)| b * b / u).sum(),
    };
    let alpha_term = if has_intercept { params.alpha() * params.alpha() / prior.s_alpha() } else { 0.0 };
    0.5 * (quad + alpha_term)
}

fn check_state(state: &ChainState, prior: &PriorSpec, p: usize) -> Result<()> {
    if prior.kind() != PriorKind::NormalIG && state.u().len() != p {
        return Err(dimension!("latent scales have length {}, expected {p}", state.u().len()));
    }
    if let Some(prec) = prior.beta_precision() {
        if prec.nrows() != p {
            return Err(dimension!("S_beta is {}x{}, expected {p}x{p}", prec.nrows(), prec.ncols()));
        }
    }
    Ok(())
}

/// Log prior density of `(alpha, beta, sigma2)` given the latent scales,
/// up to an additive constant.
pub fn log_prior(params: &RegressionParams, state: &ChainState, prior: &PriorSpec, has_intercept: bool) -> Result<f64> {
    check_state(state, prior, params.p())?;
    let s2 = params.sigma2();
    let a = prior.a();
    Ok(-coefficient_penalty(params, state, prior, has_intercept) - (0.5 * a + 1.0) * libm::log(s2) - a / (2.0 * s2))
}

/// Unnormalized log synthetic posterior `log pi(theta) + R_gamma(theta)`,
/// conditional on the latent scales in `state` for shrinkage priors.
pub fn log_synthetic_posterior(
    params: &RegressionParams,
    state: &ChainState,
    data: &Dataset,
    prior: &PriorSpec,
    gamma: f64,
) -> Result<f64> {
    Ok(log_prior(params, state, prior, data.has_intercept())? + gamma_loss(params, data, gamma)?)
}

/// The bootstrap-weighted objective
/// `-(n/gamma) log{(1/n) sum w_i f_i^gamma} + penalty
///  + (1 + a/2 - n gamma / (2(1+gamma))) log sigma2 + a / sigma2`.
/// At `gamma = 0` the first term becomes `-sum w_i log f_i`.
pub fn weighted_objective(
    params: &RegressionParams,
    state: &ChainState,
    w: &WeightVector,
    data: &Dataset,
    prior: &PriorSpec,
    gamma: f64,
) -> Result<f64> {
    check_dims(params, data)?;
    check_state(state, prior, params.p())?;
    if w.len() != data.n() {
        return Err(dimension!("{} weights for {} observations", w.len(), data.n()));
    }
    if !(gamma >= 0.0) {
        return Err(domain!("gamma must be nonnegative, got {gamma}"));
    }
    let logf = log_densities(params, data);
    Ok(objective_from_log_densities(&logf, params, state, w.as_slice(), prior, gamma, data.has_intercept()))
}

pub(crate) fn objective_from_log_densities(
    logf: &[f64],
    params: &RegressionParams,
    state: &ChainState,
    w: &[f64],
    prior: &PriorSpec,
    gamma: f64,
    has_intercept: bool,
) -> f64 {
    let n = logf.len() as f64;
    let fit = if gamma == 0.0 {
        -logf.iter().zip(w).filter(|(_, &wi)| wi > 0.0).map(|(l, wi)| wi * l).sum::<f64>()
    } else {
        let terms: Vec<f64> =
            logf.iter().zip(w).map(|(l, &wi)| if wi > 0.0 { libm::log(wi) + gamma * l } else { f64::NEG_INFINITY }).collect();
        fit_from_log_sum_exp(log_sum_exp(&terms), n, gamma)
    };
    fit + objective_remainder(params, state, prior, gamma, n, has_intercept)
}

/// `-(n/gamma)(lse - log n)`, the data term of the weighted objective.
pub(crate) fn fit_from_log_sum_exp(lse: f64, n: f64, gamma: f64) -> f64 {
    -n / gamma * (lse - libm::log(n))
}

/// Penalty and `sigma2` terms of the weighted objective.
pub(crate) fn objective_remainder(
    params: &RegressionParams,
    state: &ChainState,
    prior: &PriorSpec,
    gamma: f64,
    n: f64,
    has_intercept: bool,
) -> f64 {
    let a = prior.a();
    let s2 = params.sigma2();
    coefficient_penalty(params, state, prior, has_intercept)
        + (1.0 + 0.5 * a - n * gamma / (2.0 * (1.0 + gamma))) * libm::log(s2)
        + a / s2
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn toy() -> (Dataset, RegressionParams) {
        let d = Dataset::new(vec![0.3, -1.2, 2.5], vec![1.0, 0.5, -0.7, 1.5, 0.2, -0.3], 2, true).unwrap();
        let p = RegressionParams::new(0.1, vec![0.8, -0.4], 1.3).unwrap();
        (d, p)
    }

    #[test]
    fn norm_at_gamma_zero_is_one() {
        assert_eq!(gamma_power_norm(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(gamma_power_norm(7.3, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn norm_rejects_bad_domain() {
        assert!(gamma_power_norm(0.0, 0.2).is_err());
        assert!(gamma_power_norm(-1.0, 0.2).is_err());
        assert!(gamma_power_norm(1.0, -0.2).is_err());
    }

    #[test]
    fn single_observation_at_the_mean() {
        // n = 1, y = mu, sigma2 = 1: (1/0.2) log{(2 pi)^-0.1 / ||f||^0.2}
        let d = Dataset::new(vec![0.5], vec![1.0], 1, true).unwrap();
        let p = RegressionParams::new(0.25, vec![0.25], 1.0).unwrap();
        let norm = gamma_power_norm(1.0, 0.2).unwrap();
        let expected = (1.0 / 0.2) * libm::log(libm::pow(2.0 * core::f64::consts::PI, -0.1) / libm::pow(norm, 0.2));
        assert!((gamma_loss(&p, &d, 0.2).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn gamma_zero_loss_is_log_likelihood() {
        let (d, p) = toy();
        assert_eq!(gamma_loss(&p, &d, 0.0).unwrap(), log_likelihood(&p, &d).unwrap());
    }

    #[test]
    fn intercept_ignored_without_intercept_flag() {
        let d = Dataset::new(vec![1.0, 2.0], vec![1.0, 2.0], 1, false).unwrap();
        let a = RegressionParams::new(5.0, vec![1.0], 1.0).unwrap();
        let b = RegressionParams::new(0.0, vec![1.0], 1.0).unwrap();
        assert_eq!(gamma_loss(&a, &d, 0.3).unwrap(), gamma_loss(&b, &d, 0.3).unwrap());
    }

    #[test]
    fn uniform_weights_reduce_to_negative_loss_plus_prior() {
        // With w = 1 the weighted objective equals -R_gamma plus the printed
        // prior terms, up to the constant n log ||f|| parts free of theta.
        let (d, p) = toy();
        let prior = PriorSpec::default_normal_ig(2);
        let st = ChainState::initial(p.clone());
        let g = 0.3;
        let n = d.n() as f64;
        let w = WeightVector::uniform(d.n());
        let lw = weighted_objective(&p, &st, &w, &d, &prior, g).unwrap();
        let r = gamma_loss(&p, &d, g).unwrap();
        let s2 = p.sigma2();
        let a = prior.a();
        let const_part = n * (-0.5 * g * LN_2PI - 0.5 * libm::log1p(g)) / (1.0 + g);
        let expected = -r - const_part + coefficient_penalty(&p, &st, &prior, true) + (1.0 + a / 2.0) * libm::log(s2) + a / s2;
        assert!((lw - expected).abs() < 1e-10, "{lw} vs {expected}");
    }

    #[test]
    fn weights_must_sum_to_n() {
        assert!(WeightVector::new(vec![1.0, 1.0]).is_ok());
        assert!(WeightVector::new(vec![1.5, 1.0]).is_err());
        assert!(WeightVector::new(vec![-1.0, 3.0]).is_err());
        assert!(WeightVector::new(vec![]).is_err());
    }

    #[test]
    fn objective_checks_dimensions() {
        let (d, p) = toy();
        let prior = PriorSpec::default_laplace();
        let st = ChainState::initial(p.clone());
        assert!(weighted_objective(&p, &st, &WeightVector::uniform(2), &d, &prior, 0.2).is_err());
        let bad = RegressionParams::new(0.0, vec![1.0], 1.0).unwrap();
        assert!(gamma_loss(&bad, &d, 0.2).is_err());
    }
}
