//! Synthetic-posterior samplers.
//!
//! Under the normal–inverse-gamma prior draws are independent weighted
//! bootstrap minimizers. Under shrinkage priors each Gibbs sweep draws
//! `(alpha, beta, sigma2)` by a bootstrap minimization conditional on the
//! latent scales, then refreshes the scales from their full conditionals.

use alloc::vec::Vec;
use rand::Rng;

use crate::distributions::{
    sample_dirichlet_weights, sample_gamma, sample_gamma_truncated_below, sample_inverse_gamma, sample_inverse_gaussian,
};
use crate::error::{domain, Result};
use crate::mm::{least_squares_start, minimize_weighted_objective, robust_start, MMReport};
use crate::model::{
    ChainState, Dataset, Draws, GammaConfig, HorseshoeLambdaShape, LaplaceIgForm, PriorKind, PriorSpec, RegressionParams,
};
use crate::objective::WeightVector;
use crate::rng::RngStream;

/// Coefficients closer to zero than this are clamped before forming the
/// inverse-Gaussian mean, which diverges at `beta_k = 0`.
pub const BETA_CLAMP: f64 = 1e-12;

/// Floor for sampled latent scales, so that `1 / (u_k xi_k)` stays finite.
pub const SCALE_FLOOR: f64 = 1e-150;

/// One weighted-bootstrap draw: fresh Dirichlet weights, then the MM
/// minimizer started from `state.params()`.
pub fn draw_bootstrap_sample<R: Rng + ?Sized>(
    data: &Dataset,
    state: &ChainState,
    prior: &PriorSpec,
    cfg: &GammaConfig,
    rng: &mut R,
) -> Result<(RegressionParams, MMReport)> {
    let w = sample_dirichlet_weights(data.n(), rng)?;
    minimize_weighted_objective(state.params(), &w, data, state, prior, cfg)
}

/// Minimizer of the unweighted objective from [`robust_start`].
pub fn unweighted_fit(
    data: &Dataset,
    state: &ChainState,
    prior: &PriorSpec,
    cfg: &GammaConfig,
) -> Result<(RegressionParams, MMReport)> {
    let init = robust_start(data, state, prior, cfg)?;
    minimize_weighted_objective(&init, &WeightVector::uniform(data.n()), data, state, prior, cfg)
}

/// `b` independent bootstrap draws under the normal–inverse-gamma prior.
/// Every minimization starts from the unweighted minimizer.
pub fn run_synthetic_sampler(
    data: &Dataset,
    prior: &PriorSpec,
    cfg: &GammaConfig,
    b: usize,
    rng: &mut RngStream,
) -> Result<Draws> {
    if prior.kind() != PriorKind::NormalIG {
        return Err(domain!("the plain bootstrap sampler needs the normal-inverse-gamma prior"));
    }
    if b == 0 {
        return Err(domain!("need at least one draw"));
    }
    let start = ChainState::initial(least_squares_start(data)?);
    let (centre, _) = unweighted_fit(data, &start, prior, cfg)?;
    let state = ChainState::initial(centre);
    let mut samples = Vec::with_capacity(b);
    let mut failures = 0;
    for _ in 0..b {
        let (params, report) = draw_bootstrap_sample(data, &state, prior, cfg, rng)?;
        failures += usize::from(!report.converged);
        samples.push(state.with_params(params));
    }
    let mut draws = Draws::new(samples, 0, rng.seed(), *cfg, prior.clone())?;
    draws.mm_nonconverged = failures;
    Ok(draws)
}

/// Laplace-prior local scales: `1/u_k ~ InverseGaussian(mu, shape)` with
/// `mu = sqrt(lambda2) / |beta_k|`, `shape = lambda2` (derived form).
pub fn sample_laplace_scales<R: Rng + ?Sized>(beta: &[f64], lambda2: f64, prior: &PriorSpec, rng: &mut R) -> Result<Vec<f64>> {
    if !(lambda2 > 0.0) {
        return Err(domain!("lambda2 must be positive, got {lambda2}"));
    }
    let (scale, shape) = match prior.laplace_form() {
        LaplaceIgForm::Derived => (lambda2, lambda2),
        LaplaceIgForm::Printed => {
            let l = libm::sqrt(lambda2);
            (l, l)
        }
    };
    beta.iter()
        .map(|&b| {
            let mu = libm::sqrt(scale) / b.abs().max(BETA_CLAMP);
            let inv_u = sample_inverse_gaussian(mu, shape, rng)?;
            Ok((1.0 / inv_u).clamp(SCALE_FLOOR, f64::MAX))
        })
        .collect()
}

/// `lambda2 ~ Ga(c1 + p, c2 + sum u_k / 2)`.
pub fn sample_laplace_lambda2<R: Rng + ?Sized>(u: &[f64], prior: &PriorSpec, rng: &mut R) -> Result<f64> {
    sample_gamma(prior.c1() + u.len() as f64, prior.c2() + 0.5 * u.iter().sum::<f64>(), rng)
}

/// Laplace-prior scales: the local scales given the current `lambda2`, then
/// `lambda2` given the new local scales.
pub fn update_laplace_hyperparams<R: Rng + ?Sized>(
    beta: &[f64],
    lambda2: f64,
    prior: &PriorSpec,
    rng: &mut R,
) -> Result<(Vec<f64>, f64)> {
    let u = sample_laplace_scales(beta, lambda2, prior, rng)?;
    let lambda2 = sample_laplace_lambda2(&u, prior, rng)?;
    Ok((u, lambda2))
}

/// Horseshoe scales, in order: `u_k ~ IG(1, lambda/xi_k + beta_k^2/2)`,
/// `xi_k ~ IG(1, 1 + lambda/u_k)`, `lambda ~ Ga(c1 + p/2, c2 + sum 1/(u_k xi_k))`.
pub fn update_horseshoe_hyperparams<R: Rng + ?Sized>(
    beta: &[f64],
    u: &[f64],
    xi: &[f64],
    lambda: f64,
    prior: &PriorSpec,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    update_horseshoe_hyperparams_bounded(beta, u, xi, lambda, prior, 0.0, rng)
}

/// Smallest global scale used inside Gibbs sweeps: `lambda >= 1/n^2`, i.e.
/// the half-Cauchy scale `sqrt(lambda)` is at least `1/n`.
///
/// The coefficient draws are bootstrap minimizers rather than conditional
/// draws, so null coefficients sit at (numerically) zero. Given exact zeros
/// the `lambda` conditional shrinks geometrically with no positive fixed
/// point, after which any coefficient that dips towards zero is absorbed.
pub fn horseshoe_lambda_floor(n: usize) -> f64 {
    1.0 / (n as f64 * n as f64)
}

/// As [`update_horseshoe_hyperparams`], with the `lambda` conditional
/// truncated to `[lambda_min, inf)`.
#[allow(clippy::too_many_arguments)]
pub fn update_horseshoe_hyperparams_bounded<R: Rng + ?Sized>(
    beta: &[f64],
    u: &[f64],
    xi: &[f64],
    lambda: f64,
    prior: &PriorSpec,
    lambda_min: f64,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    if !(lambda > 0.0) {
        return Err(domain!("lambda must be positive, got {lambda}"));
    }
    if u.len() != beta.len() || xi.len() != beta.len() {
        return Err(crate::error::dimension!("latent scales must match the coefficients"));
    }
    let mut new_u = Vec::with_capacity(beta.len());
    for (b, x) in beta.iter().zip(xi) {
        let v = sample_inverse_gamma(1.0, lambda / x + 0.5 * b * b, rng)?;
        new_u.push(v.clamp(SCALE_FLOOR, f64::MAX));
    }
    let mut new_xi = Vec::with_capacity(beta.len());
    for uk in &new_u {
        let v = sample_inverse_gamma(1.0, 1.0 + lambda / uk, rng)?;
        new_xi.push(v.clamp(SCALE_FLOOR, f64::MAX));
    }
    let rate: f64 = new_u.iter().zip(&new_xi).map(|(a, b)| 1.0 / (a * b)).sum();
    let shape = horseshoe_lambda_shape(prior.c1(), beta.len(), prior.horseshoe_shape());
    let lambda = if lambda_min > 0.0 {
        sample_gamma_truncated_below(shape, prior.c2() + rate, lambda_min, rng)?
    } else {
        sample_gamma(shape, prior.c2() + rate, rng)?
    };
    Ok((new_u, new_xi, lambda))
}

/// Shape of the gamma full conditional of the horseshoe global scale.
pub fn horseshoe_lambda_shape(c1: f64, p: usize, form: HorseshoeLambdaShape) -> f64 {
    match form {
        HorseshoeLambdaShape::HalfP => c1 + 0.5 * p as f64,
        HorseshoeLambdaShape::FullP => c1 + p as f64,
    }
}

/// Refreshes the latent scales of a shrinkage prior given `state.params()`.
/// `lambda_min` bounds the horseshoe global scale and is ignored otherwise.
pub fn update_latent_scales<R: Rng + ?Sized>(
    state: &ChainState,
    prior: &PriorSpec,
    lambda_min: f64,
    rng: &mut R,
) -> Result<ChainState> {
    let beta = state.params().beta();
    match prior.kind() {
        PriorKind::Laplace => {
            let (u, lambda2) = update_laplace_hyperparams(beta, state.lambda(), prior, rng)?;
            Ok(ChainState::from_parts(state.params().clone(), u, state.xi().to_vec(), lambda2))
        }
        PriorKind::Horseshoe => {
            let (u, xi, lambda) =
                update_horseshoe_hyperparams_bounded(beta, state.u(), state.xi(), state.lambda(), prior, lambda_min, rng)?;
            Ok(ChainState::from_parts(state.params().clone(), u, xi, lambda))
        }
        PriorKind::NormalIG => Ok(state.clone()),
    }
}

/// One sweep: bootstrap-MM draw of `(alpha, beta, sigma2)` given the scales,
/// then the scale updates.
pub fn gibbs_shrinkage_step<R: Rng + ?Sized>(
    state: &ChainState,
    data: &Dataset,
    prior: &PriorSpec,
    cfg: &GammaConfig,
    rng: &mut R,
) -> Result<(ChainState, MMReport)> {
    if !prior.is_shrinkage() {
        return Err(domain!("Gibbs sweeps need a Laplace or horseshoe prior"));
    }
    let (params, report) = draw_bootstrap_sample(data, state, prior, cfg, rng)?;
    let next = update_latent_scales(&state.with_params(params), prior, horseshoe_lambda_floor(data.n()), rng)?;
    Ok((next, report))
}

/// Chain start: the unweighted minimizer under unit latent scales.
pub fn initial_state(data: &Dataset, prior: &PriorSpec, cfg: &GammaConfig) -> Result<ChainState> {
    let unit = ChainState::initial(least_squares_start(data)?);
    Ok(ChainState::initial(unweighted_fit(data, &unit, prior, cfg)?.0))
}

/// Runs `n_burn + n_keep` Gibbs sweeps and keeps the last `n_keep`. Under
/// the normal–inverse-gamma prior draws are independent and `n_burn` is
/// only recorded.
pub fn run_chain(
    data: &Dataset,
    prior: &PriorSpec,
    cfg: &GammaConfig,
    n_burn: usize,
    n_keep: usize,
    rng: &mut RngStream,
) -> Result<Draws> {
    if n_keep == 0 {
        return Err(domain!("n_keep must be at least 1"));
    }
    if !prior.is_shrinkage() {
        let draws = run_synthetic_sampler(data, prior, cfg, n_keep, rng)?;
        let failures = draws.mm_nonconverged;
        let mut out = Draws::new(draws.samples().to_vec(), n_burn, rng.seed(), *cfg, prior.clone())?;
        out.mm_nonconverged = failures;
        return Ok(out);
    }
    let mut state = initial_state(data, prior, cfg)?;
    let mut samples = Vec::with_capacity(n_keep);
    let mut failures = 0;
    for it in 0..n_burn + n_keep {
        let (next, report) = gibbs_shrinkage_step(&state, data, prior, cfg, rng)?;
        state = next;
        if it >= n_burn {
            failures += usize::from(!report.converged);
            samples.push(state.clone());
        }
    }
    let mut draws = Draws::new(samples, n_burn, rng.seed(), *cfg, prior.clone())?;
    draws.mm_nonconverged = failures;
    Ok(draws)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec;

    #[test]
    fn laplace_lambda_conditional_is_gamma_3_2() {
        // p = 2, u = (1, 1), c1 = c2 = 1 -> Ga(3, 2): mean 1.5, variance 0.75.
        let prior = PriorSpec::default_laplace();
        let mut rng = RngStream::new(11);
        let m = 50_000;
        let xs: Vec<f64> = (0..m).map(|_| sample_laplace_lambda2(&[1.0, 1.0], &prior, &mut rng).unwrap()).collect();
        let mean = xs.iter().sum::<f64>() / m as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1) as f64;
        assert!((mean - 1.5).abs() < 4.0 * libm::sqrt(0.75 / m as f64), "{mean}");
        assert!((var - 0.75).abs() < 0.03, "{var}");
    }

    #[test]
    fn laplace_inverse_scale_mean() {
        // E[1/u_k] = sqrt(lambda2) / |beta_k| under the derived form.
        let prior = PriorSpec::default_laplace();
        let mut rng = RngStream::new(12);
        let beta = [0.5, 3.0];
        let lambda2 = 2.0;
        let m = 10_000;
        let mut sums = [0.0; 2];
        let mut sq = [0.0; 2];
        for _ in 0..m {
            let (u, _) = update_laplace_hyperparams(&beta, lambda2, &prior, &mut rng).unwrap();
            for k in 0..2 {
                sums[k] += 1.0 / u[k];
                sq[k] += 1.0 / (u[k] * u[k]);
            }
        }
        for k in 0..2 {
            let mu = libm::sqrt(lambda2) / beta[k];
            let var = mu * mu * mu / lambda2;
            let mean = sums[k] / m as f64;
            assert!((mean - mu).abs() < 4.0 * libm::sqrt(var / m as f64), "k={k} mean={mean} mu={mu}");
        }
        // larger |beta| means larger u (weaker shrinkage)
        assert!(sums[1] < sums[0]);
    }

    #[test]
    fn laplace_zero_beta_is_clamped() {
        let prior = PriorSpec::default_laplace();
        let mut rng = RngStream::new(13);
        for _ in 0..1000 {
            let (u, l) = update_laplace_hyperparams(&[0.0, -0.0], 1.0, &prior, &mut rng).unwrap();
            assert!(u.iter().all(|&v| v > 0.0 && v.is_finite()));
            assert!(l > 0.0 && l.is_finite());
        }
    }

    #[test]
    fn printed_laplace_form_differs() {
        let derived = PriorSpec::default_laplace();
        let printed = derived.clone().with_laplace_form(LaplaceIgForm::Printed);
        let mut a = RngStream::new(14);
        let mut b = RngStream::new(14);
        let (ud, _) = update_laplace_hyperparams(&[1.0], 4.0, &derived, &mut a).unwrap();
        let (up, _) = update_laplace_hyperparams(&[1.0], 4.0, &printed, &mut b).unwrap();
        assert_ne!(ud, up);
    }

    #[test]
    fn horseshoe_lambda_shape_for_p4() {
        assert_eq!(horseshoe_lambda_shape(1.0, 4, HorseshoeLambdaShape::HalfP), 3.0);
        assert_eq!(horseshoe_lambda_shape(1.0, 4, HorseshoeLambdaShape::FullP), 5.0);
    }

    #[test]
    fn horseshoe_scales_stay_positive() {
        let prior = PriorSpec::default_horseshoe();
        let mut rng = RngStream::new(15);
        let (mut u, mut xi, mut l) = (vec![1.0; 3], vec![1.0; 3], 1.0);
        for _ in 0..2000 {
            let out = update_horseshoe_hyperparams(&[0.0, 1e-8, 5.0], &u, &xi, l, &prior, &mut rng).unwrap();
            u = out.0;
            xi = out.1;
            l = out.2;
            assert!(u.iter().chain(&xi).all(|&v| v > 0.0 && v.is_finite()) && l > 0.0);
        }
    }

    #[test]
    fn bounded_horseshoe_lambda_respects_floor() {
        // All-zero coefficients make the untruncated lambda shrink geometrically.
        let prior = PriorSpec::default_horseshoe();
        let mut rng = RngStream::new(16);
        let beta = vec![0.0; 15];
        let (mut u, mut xi, mut l) = (vec![1.0; 15], vec![1.0; 15], 1.0);
        let floor = horseshoe_lambda_floor(100);
        for _ in 0..500 {
            (u, xi, l) = update_horseshoe_hyperparams_bounded(&beta, &u, &xi, l, &prior, floor, &mut rng).unwrap();
            assert!(l >= floor && l.is_finite());
        }
        assert!(l < 10.0 * floor, "{l}");
    }

    #[test]
    fn chain_rejects_zero_keep() {
        let d = Dataset::new(vec![1.0, 2.0, 3.0], vec![0.1, 0.5, 0.9], 1, true).unwrap();
        let mut rng = RngStream::new(1);
        assert!(run_chain(&d, &PriorSpec::default_laplace(), &GammaConfig::default(), 0, 0, &mut rng).is_err());
        assert!(run_synthetic_sampler(&d, &PriorSpec::default_laplace(), &GammaConfig::default(), 3, &mut rng).is_err());
    }
}
