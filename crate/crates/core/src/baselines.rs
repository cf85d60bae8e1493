//! Comparator samplers: conjugate Gibbs for the normal and scale-mixture
//! (Student-t, Cauchy) error models, and an unadjusted Langevin update for
//! the synthetic `beta` conditional.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::distributions::{sample_dirichlet_weights, sample_gamma, sample_inverse_gamma};
use crate::error::{domain, Error, Result};
use crate::mm::{least_squares_start, minimize_with_fixed_beta, weights_from_log_densities};
use crate::model::{ChainState, Dataset, Draws, GammaConfig, PriorKind, PriorSpec, RegressionParams};
use crate::objective::{effective_alpha, log_densities};
use crate::rng::RngStream;
use crate::sampler::{horseshoe_lambda_floor, initial_state, update_latent_scales};

/// Error distribution of a conjugate baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorModel {
    Normal,
    /// Student-t with `df` degrees of freedom as a normal scale mixture.
    StudentT(f64),
}

impl ErrorModel {
    fn check(self) -> Result<()> {
        match self {
            ErrorModel::StudentT(df) if !(df > 0.0 && df.is_finite()) => {
                Err(domain!("degrees of freedom must be positive, got {df}"))
            }
            _ => Ok(()),
        }
    }
}

/// Result of a conjugate chain: the draws plus the posterior mean of each
/// observation's precision multiplier `v_i` (all ones for normal errors).
#[derive(Debug, Clone)]
pub struct ConjugateOutput {
    pub draws: Draws,
    pub mean_precision_scales: Vec<f64>,
}

fn design_column(data: &Dataset, i: usize) -> impl Iterator<Item = f64> + '_ {
    let lead = if data.has_intercept() { Some(1.0) } else { None };
    lead.into_iter().chain(data.row(i).iter().copied())
}

/// `(alpha, beta) | sigma2, v, scales` for `y_i = alpha + x_i' beta + e_i`,
/// `e_i ~ N(0, sigma2 / v_i)`: normal with precision `X'VX / sigma2 + P`.
pub fn draw_coefficients<R: Rng + ?Sized>(
    data: &Dataset,
    sigma2: f64,
    v: &[f64],
    state: &ChainState,
    prior: &PriorSpec,
    rng: &mut R,
) -> Result<(f64, Vec<f64>)> {
    let (q, b) = coefficient_precision(data, sigma2, v, state, prior);
    let chol = q.cholesky().ok_or_else(|| Error::Numerical("coefficient precision is not positive definite".into()))?;
    let mean = chol.solve(&b);
    let z = DVector::from_fn(mean.len(), |_, _| StandardNormal.sample(rng));
    let lt = chol.l().transpose();
    let noise = lt.solve_upper_triangular(&z).ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    let theta = mean + noise;
    Ok(split_theta(data, theta.as_slice()))
}

fn split_theta(data: &Dataset, theta: &[f64]) -> (f64, Vec<f64>) {
    if data.has_intercept() {
        (theta[0], theta[1..].to_vec())
    } else {
        (0.0, theta.to_vec())
    }
}

/// Precision matrix and linear term of the Gaussian `(alpha, beta)`
/// conditional.
pub fn coefficient_precision(
    data: &Dataset,
    sigma2: f64,
    v: &[f64],
    state: &ChainState,
    prior: &PriorSpec,
) -> (DMatrix<f64>, DVector<f64>) {
    let off = usize::from(data.has_intercept());
    let d = data.p() + off;
    let mut q = DMatrix::zeros(d, d);
    let mut b = DVector::zeros(d);
    let mut col = vec![0.0; d];
    for (i, &vi) in v.iter().enumerate().take(data.n()) {
        for (c, x) in col.iter_mut().zip(design_column(data, i)) {
            *c = x;
        }
        let wi = vi / sigma2;
        for j in 0..d {
            let cj = wi * col[j];
            b[j] += cj * data.y()[i];
            for k in 0..=j {
                q[(j, k)] += cj * col[k];
            }
        }
    }
    for j in 0..d {
        for k in 0..j {
            q[(k, j)] = q[(j, k)];
        }
    }
    if off == 1 {
        q[(0, 0)] += 1.0 / prior.s_alpha();
    }
    match prior.beta_precision() {
        Some(prec) => {
            for j in 0..data.p() {
                for k in 0..data.p() {
                    q[(j + off, k + off)] += prec[(j, k)];
                }
            }
        }
        None => {
            for (k, u) in state.u().iter().enumerate() {
                q[(k + off, k + off)] += 1.0 / u;
            }
        }
    }
    (q, b)
}

fn residuals(params: &RegressionParams, data: &Dataset) -> Vec<f64> {
    let alpha = effective_alpha(params, data);
    data.rows().zip(data.y()).map(|(x, &y)| y - alpha - crate::math::dot(x, params.beta())).collect()
}

/// Exact Gibbs sampler for the normal or scale-mixture error model. Blocks:
/// `(alpha, beta)`, `sigma2 ~ IG(a/2 + n/2, a/2 + sum v_i r_i^2 / 2)`,
/// `v_i ~ Ga((df + 1)/2, (df + r_i^2 / sigma2)/2)`, then the latent scales of
/// a shrinkage prior.
pub fn conjugate_chain(
    data: &Dataset,
    errors: ErrorModel,
    prior: &PriorSpec,
    n_burn: usize,
    n_keep: usize,
    rng: &mut RngStream,
) -> Result<ConjugateOutput> {
    errors.check()?;
    if n_keep == 0 {
        return Err(domain!("n_keep must be at least 1"));
    }
    let n = data.n();
    let mut state = ChainState::initial(least_squares_start(data)?);
    let mut v = vec![1.0; n];
    let mut v_sum = vec![0.0; n];
    let mut samples = Vec::with_capacity(n_keep);
    let floor = horseshoe_lambda_floor(n);
    for it in 0..n_burn + n_keep {
        let sigma2 = state.params().sigma2();
        let (alpha, beta) = draw_coefficients(data, sigma2, &v, &state, prior, rng)?;
        let params = RegressionParams::from_parts(alpha, beta, sigma2);
        let r = residuals(&params, data);
        let ss: f64 = r.iter().zip(&v).map(|(ri, vi)| vi * ri * ri).sum();
        let sigma2 = sample_inverse_gamma(0.5 * (prior.a() + n as f64), 0.5 * (prior.a() + ss), rng)?;
        if let ErrorModel::StudentT(df) = errors {
            for (vi, ri) in v.iter_mut().zip(&r) {
                *vi = sample_gamma(0.5 * (df + 1.0), 0.5 * (df + ri * ri / sigma2), rng)?;
            }
        }
        let params = RegressionParams::from_parts(params.alpha(), params.beta().to_vec(), sigma2);
        state = update_latent_scales(&state.with_params(params), prior, floor, rng)?;
        if it >= n_burn {
            for (s, vi) in v_sum.iter_mut().zip(&v) {
                *s += vi;
            }
            samples.push(state.clone());
        }
    }
    let mean_precision_scales = v_sum.into_iter().map(|s| s / n_keep as f64).collect();
    let draws = Draws::new(samples, n_burn, rng.seed(), GammaConfig::with_gamma(0.0)?, prior.clone())?;
    Ok(ConjugateOutput { draws, mean_precision_scales })
}

/// Standard Bayesian lasso (normal errors).
pub fn bayesian_lasso_chain(
    data: &Dataset,
    prior: &PriorSpec,
    n_burn: usize,
    n_keep: usize,
    rng: &mut RngStream,
) -> Result<Draws> {
    Ok(conjugate_chain(data, ErrorModel::Normal, prior, n_burn, n_keep, rng)?.draws)
}

/// Bayesian lasso with Student-t errors (`df = 3`: t-BL, `df = 1`: c-BL).
pub fn heavy_tail_chain(
    data: &Dataset,
    df: f64,
    prior: &PriorSpec,
    n_burn: usize,
    n_keep: usize,
    rng: &mut RngStream,
) -> Result<Draws> {
    Ok(conjugate_chain(data, ErrorModel::StudentT(df), prior, n_burn, n_keep, rng)?.draws)
}

fn check_step(step: f64) -> Result<()> {
    if step > 0.0 && step.is_finite() {
        Ok(())
    } else {
        Err(domain!("step must be positive, got {step}"))
    }
}

fn penalty_gradient(beta: &[f64], state: &ChainState, prior: &PriorSpec) -> Vec<f64> {
    match prior.beta_precision() {
        Some(prec) => (0..beta.len()).map(|j| (0..beta.len()).map(|k| prec[(j, k)] * beta[k]).sum()).collect(),
        None => beta.iter().zip(state.u()).map(|(b, u)| b / u).collect(),
    }
}

/// Log of the synthetic `beta` conditional up to a constant:
/// `(n/gamma) log{(1/n) sum_i f_i^gamma} - beta' P beta / 2` with
/// `(alpha, sigma2)` from `state`; the log-likelihood at `gamma = 0`.
pub fn synthetic_beta_log_conditional(
    beta: &[f64],
    state: &ChainState,
    data: &Dataset,
    prior: &PriorSpec,
    gamma: f64,
) -> Result<f64> {
    let p = state.params();
    let params = RegressionParams::from_parts(p.alpha(), beta.to_vec(), p.sigma2());
    let logf = log_densities(&params, data);
    let n = data.n() as f64;
    let fit = if gamma == 0.0 {
        logf.iter().sum()
    } else {
        let scaled: Vec<f64> = logf.iter().map(|l| gamma * l).collect();
        n / gamma * (crate::math::log_sum_exp(&scaled) - libm::log(n))
    };
    let pen: f64 = beta.iter().zip(penalty_gradient(beta, state, prior)).map(|(b, g)| b * g).sum();
    Ok(fit - 0.5 * pen)
}

/// Analytic gradient of [`synthetic_beta_log_conditional`]:
/// `sum_i s_i r_i x_i / sigma2 - P beta` with `s = n softmax(gamma log f)`.
pub fn synthetic_beta_gradient(
    beta: &[f64],
    state: &ChainState,
    data: &Dataset,
    prior: &PriorSpec,
    gamma: f64,
) -> Result<Vec<f64>> {
    let p = state.params();
    let params = RegressionParams::from_parts(p.alpha(), beta.to_vec(), p.sigma2());
    let logf = log_densities(&params, data);
    let s = weights_from_log_densities(&logf, &vec![1.0; data.n()], gamma)?;
    let r = residuals(&params, data);
    let mut g: Vec<f64> = penalty_gradient(beta, state, prior).into_iter().map(|v| -v).collect();
    for (i, x) in data.rows().enumerate() {
        let c = s[i] * r[i] / p.sigma2();
        for (gk, xk) in g.iter_mut().zip(x) {
            *gk += c * xk;
        }
    }
    Ok(g)
}

/// `beta' = beta + (step^2/2) grad + step z`, unadjusted.
pub fn langevin_beta_step<R: Rng + ?Sized>(
    beta: &[f64],
    state: &ChainState,
    data: &Dataset,
    prior: &PriorSpec,
    cfg: &GammaConfig,
    step: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_step(step)?;
    let g = synthetic_beta_gradient(beta, state, data, prior, cfg.gamma())?;
    let h = 0.5 * step * step;
    Ok(beta
        .iter()
        .zip(g)
        .map(|(b, gk)| {
            let z: f64 = StandardNormal.sample(rng);
            b + h * gk + step * z
        })
        .collect())
}

/// Synthetic-posterior chain whose `beta` block is one Langevin step. Each
/// sweep: Langevin on `beta`, a bootstrap MM draw of `(alpha, sigma2)` with
/// `beta` fixed, then the latent scales.
pub fn langevin_chain(
    data: &Dataset,
    prior: &PriorSpec,
    cfg: &GammaConfig,
    step: f64,
    n_burn: usize,
    n_keep: usize,
    rng: &mut RngStream,
) -> Result<Draws> {
    check_step(step)?;
    if n_keep == 0 {
        return Err(domain!("n_keep must be at least 1"));
    }
    if prior.kind() == PriorKind::NormalIG {
        return Err(domain!("the Langevin comparator needs a shrinkage prior"));
    }
    let floor = horseshoe_lambda_floor(data.n());
    let mut state = initial_state(data, prior, cfg)?;
    let mut samples = Vec::with_capacity(n_keep);
    let mut failures = 0;
    for it in 0..n_burn + n_keep {
        let beta = langevin_beta_step(state.params().beta(), &state, data, prior, cfg, step, rng)?;
        let p = state.params();
        let moved = RegressionParams::from_parts(p.alpha(), beta, p.sigma2());
        let w = sample_dirichlet_weights(data.n(), rng)?;
        let (params, report) = minimize_with_fixed_beta(&moved, &w, data, &state, prior, cfg)?;
        state = update_latent_scales(&state.with_params(params), prior, floor, rng)?;
        if it >= n_burn {
            failures += usize::from(!report.converged);
            samples.push(state.clone());
        }
    }
    let mut draws = Draws::new(samples, n_burn, rng.seed(), *cfg, prior.clone())?;
    draws.mm_nonconverged = failures;
    Ok(draws)
}
