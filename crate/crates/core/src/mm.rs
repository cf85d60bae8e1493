//! MM minimization of the bootstrap-weighted objective.
//!
//! Jensen's inequality bounds the log-sum term by a weighted least-squares
//! criterion with weights `s_i ∝ w_i f_i^gamma`. Each iteration recomputes
//! the weights and minimizes the bound blockwise: `(alpha, beta)` jointly
//! under the normal–inverse-gamma prior, or `alpha`, `beta`, `sigma2` in turn
//! under a shrinkage prior.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{dimension, domain, Error, Result};
use crate::math::{dot_wide, spd_solve};
use crate::model::{ChainState, Dataset, GammaConfig, PriorSpec, RegressionParams, SigmaUpdate};
use crate::objective::{effective_alpha, fit_from_log_sum_exp, log_densities, objective_remainder, WeightVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MMReport {
    pub iterations: usize,
    pub final_objective: f64,
    pub converged: bool,
}

/// Offset added to `|theta|` in the relative-change convergence test.
const REL_CHANGE_FLOOR: f64 = 1e-8;
/// Ridge added to the least-squares cold start.
pub const COLD_START_RIDGE: f64 = 1e-6;

pub(crate) fn weights_from_log_densities(logf: &[f64], w: &[f64], gamma: f64) -> Result<Vec<f64>> {
    if gamma == 0.0 {
        return Ok(w.to_vec());
    }
    weights_and_log_sum_exp(logf, &log_weights(w), gamma).map(|(s, _)| s)
}

fn log_weights(w: &[f64]) -> Vec<f64> {
    w.iter().map(|&wi| if wi > 0.0 { libm::log(wi) } else { f64::NEG_INFINITY }).collect()
}

/// Softmax weights scaled to sum to `n`, plus `log sum_i w_i f_i^gamma`, for `gamma > 0`.
fn weights_and_log_sum_exp(logf: &[f64], log_w: &[f64], gamma: f64) -> Result<(Vec<f64>, f64)> {
    let n = logf.len() as f64;
    let mut s: Vec<f64> = logf.iter().zip(log_w).map(|(l, lw)| lw + gamma * l).collect();
    let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::Degenerate("every observation has zero weighted density".into()));
    }
    let mut total = 0.0;
    for v in s.iter_mut() {
        *v = libm::exp(*v - max);
        total += *v;
    }
    let scale = n / total;
    s.iter_mut().for_each(|v| *v *= scale);
    Ok((s, max + libm::log(total)))
}

/// MM weights `s_i = w_i f_i^gamma / ((1/n) sum_j w_j f_j^gamma)`, summing to `n`.
pub fn compute_mm_weights(params: &RegressionParams, w: &WeightVector, data: &Dataset, gamma: f64) -> Result<Vec<f64>> {
    if !(gamma >= 0.0) {
        return Err(domain!("gamma must be nonnegative, got {gamma}"));
    }
    if w.len() != data.n() || params.p() != data.p() {
        return Err(dimension!("weights, params and data disagree in size"));
    }
    weights_from_log_densities(&log_densities(params, data), w.as_slice(), gamma)
}

/// Weighted Gram matrix `sum_i s_i z_i z_i'` with `z_i = (1, x_i)` when
/// `intercept` is set, else `z_i = x_i`; also returns `sum_i s_i z_i t_i`.
fn weighted_normal_equations(data: &Dataset, s: &[f64], target: &[f64], intercept: bool) -> (Vec<f64>, Vec<f64>) {
    let (n, p) = (data.n(), data.p());
    let off = usize::from(intercept);
    let d = p + off;
    let mut gram = vec![0.0; d * d];
    let mut rhs = vec![0.0; d];
    let mut sz = vec![0.0; n];
    for a in 0..d {
        if intercept && a == 0 {
            sz.copy_from_slice(s);
        } else {
            for ((w, si), xa) in sz.iter_mut().zip(s).zip(data.column(a - off)) {
                *w = si * xa;
            }
        }
        rhs[a] = dot_wide(&sz, target);
        for b in a..d {
            let g = if intercept && b == 0 { sz.iter().sum() } else { dot_wide(&sz, data.column(b - off)) };
            gram[a * d + b] = g;
            gram[b * d + a] = g;
        }
    }
    (gram, rhs)
}

/// Minimizes `sum s_i (t_i - z_i' theta)^2 / (2 sigma2) + theta' P theta / 2`.
/// `precision` maps the flat `d x d` system to the prior precision added on
/// its diagonal (or full block).
fn solve_penalized(
    data: &Dataset,
    s: &[f64],
    target: &[f64],
    sigma2: f64,
    intercept: bool,
    add_precision: impl Fn(&mut DMatrix<f64>),
) -> Result<Vec<f64>> {
    let (gram, rhs) = weighted_normal_equations(data, s, target, intercept);
    let d = rhs.len();
    let mut a = DMatrix::from_row_slice(d, d, &gram) / sigma2;
    add_precision(&mut a);
    let b = DVector::from_vec(rhs) / sigma2;
    spd_solve(a, b).map(|v| v.as_slice().to_vec()).map_err(|_| {
        Error::Numerical(alloc::format!(
            "weighted normal equations are singular (n = {}, p = {}, effective weight = {:.3e})",
            data.n(),
            data.p(),
            s.iter().sum::<f64>()
        ))
    })
}

/// `(n / sigma2 + 1 / S_alpha)^{-1} (1/sigma2) sum s_i (y_i - x_i' beta)`.
pub(crate) fn update_alpha(beta: &[f64], s: &[f64], data: &Dataset, sigma2: f64, s_alpha: f64) -> f64 {
    let n = data.n() as f64;
    let resid: f64 = data.rows().zip(data.y()).zip(s).map(|((x, &y), &si)| si * (y - crate::math::dot(x, beta))).sum();
    (resid / sigma2) / (n / sigma2 + 1.0 / s_alpha)
}

pub(crate) fn update_sigma2(alpha: f64, beta: &[f64], s: &[f64], data: &Dataset, a: f64, gamma: f64, mode: SigmaUpdate) -> f64 {
    let n = data.n() as f64;
    let rss: f64 = data
        .rows()
        .zip(data.y())
        .zip(s)
        .map(|((x, &y), &si)| {
            let r = y - alpha - crate::math::dot(x, beta);
            si * r * r
        })
        .sum();
    let prior_term = match mode {
        SigmaUpdate::Printed => a,
        SigmaUpdate::StrictMajorizer => 2.0 * a,
    };
    let v = (prior_term + rss) / (2.0 + a + n / (1.0 + gamma));
    v.max(f64::MIN_POSITIVE)
}

/// One MM update of `(alpha, beta, sigma2)` given weights `s`.
pub fn mm_update(
    params: &RegressionParams,
    s: &[f64],
    data: &Dataset,
    state: &ChainState,
    prior: &PriorSpec,
    cfg: &GammaConfig,
) -> Result<RegressionParams> {
    let n = data.n() as f64;
    if s.len() != data.n() || params.p() != data.p() {
        return Err(dimension!("weights, params and data disagree in size"));
    }
    let total: f64 = s.iter().sum();
    if (total - n).abs() > 1e-6 * n {
        return Err(domain!("MM weights sum to {total}, expected {n}"));
    }
    let sigma2 = params.sigma2();
    let intercept = data.has_intercept();
    let (alpha, beta) = match prior.beta_precision() {
        Some(prec) => {
            let s_alpha = prior.s_alpha();
            let theta = solve_penalized(data, s, data.y(), sigma2, intercept, |m| {
                let off = usize::from(intercept);
                if intercept {
                    m[(0, 0)] += 1.0 / s_alpha;
                }
                let mut block = m.view_mut((off, off), (prec.nrows(), prec.ncols()));
                block += prec;
            })?;
            if intercept {
                (theta[0], theta[1..].to_vec())
            } else {
                (0.0, theta)
            }
        }
        None => {
            let u = state.u();
            if u.len() != data.p() {
                return Err(dimension!("latent scales have length {}, expected {}", u.len(), data.p()));
            }
            let alpha = if intercept { update_alpha(params.beta(), s, data, sigma2, prior.s_alpha()) } else { 0.0 };
            let target: Vec<f64> = data.y().iter().map(|y| y - alpha).collect();
            let beta = solve_penalized(data, s, &target, sigma2, false, |m| {
                for (k, uk) in u.iter().enumerate() {
                    m[(k, k)] += 1.0 / uk;
                }
            })?;
            (alpha, beta)
        }
    };
    let sigma2 = update_sigma2(alpha, &beta, s, data, prior.a(), cfg.gamma(), cfg.sigma_update());
    Ok(RegressionParams::from_parts(alpha, beta, sigma2))
}

fn relative_change(old: &RegressionParams, new: &RegressionParams, intercept: bool) -> f64 {
    let rel = |a: f64, b: f64| (b - a).abs() / (a.abs() + REL_CHANGE_FLOOR);
    let mut m = rel(old.sigma2(), new.sigma2());
    if intercept {
        m = m.max(rel(old.alpha(), new.alpha()));
    }
    for (a, b) in old.beta().iter().zip(new.beta()) {
        m = m.max(rel(*a, *b));
    }
    m
}

fn check_inputs(init: &RegressionParams, w: &WeightVector, data: &Dataset) -> Result<()> {
    if init.p() != data.p() {
        return Err(dimension!("init has {} coefficients, data has {} covariates", init.p(), data.p()));
    }
    if w.len() != data.n() {
        return Err(dimension!("{} weights for {} observations", w.len(), data.n()));
    }
    Ok(())
}

/// Runs the MM iteration from `init` until the largest relative parameter
/// change drops below `cfg.mm_tol()` or `cfg.mm_max_iter()` is reached. On
/// non-convergence the iterate with the smallest objective is returned.
pub fn minimize_weighted_objective(
    init: &RegressionParams,
    w: &WeightVector,
    data: &Dataset,
    state: &ChainState,
    prior: &PriorSpec,
    cfg: &GammaConfig,
) -> Result<(RegressionParams, MMReport)> {
    run_mm(init, w, data, state, prior, cfg, false, None)
}

/// As [`minimize_weighted_objective`], also recording the objective at the
/// starting point and after every iteration.
pub fn minimize_weighted_objective_traced(
    init: &RegressionParams,
    w: &WeightVector,
    data: &Dataset,
    state: &ChainState,
    prior: &PriorSpec,
    cfg: &GammaConfig,
    trace: &mut Vec<f64>,
) -> Result<(RegressionParams, MMReport)> {
    run_mm(init, w, data, state, prior, cfg, false, Some(trace))
}

/// MM over `(alpha, sigma2)` with `beta` held at its initial value.
pub fn minimize_with_fixed_beta(
    init: &RegressionParams,
    w: &WeightVector,
    data: &Dataset,
    state: &ChainState,
    prior: &PriorSpec,
    cfg: &GammaConfig,
) -> Result<(RegressionParams, MMReport)> {
    run_mm(init, w, data, state, prior, cfg, true, None)
}

#[allow(clippy::too_many_arguments)]
fn run_mm(
    init: &RegressionParams,
    w: &WeightVector,
    data: &Dataset,
    state: &ChainState,
    prior: &PriorSpec,
    cfg: &GammaConfig,
    fix_beta: bool,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<(RegressionParams, MMReport)> {
    check_inputs(init, w, data)?;
    let intercept = data.has_intercept();
    let gamma = cfg.gamma();
    let wv = w.as_slice();
    let n = data.n() as f64;
    let log_w = log_weights(wv);
    // Weights for the next update and the objective at the current point
    // share one log-sum-exp.
    let evaluate = |params: &RegressionParams| -> Result<(Vec<f64>, f64)> {
        let logf = log_densities(params, data);
        let remainder = objective_remainder(params, state, prior, gamma, n, intercept);
        if gamma == 0.0 {
            let fit = -logf.iter().zip(wv).filter(|(_, &wi)| wi > 0.0).map(|(l, wi)| wi * l).sum::<f64>();
            return Ok((wv.to_vec(), fit + remainder));
        }
        let (s, lse) = weights_and_log_sum_exp(&logf, &log_w, gamma)?;
        Ok((s, fit_from_log_sum_exp(lse, n, gamma) + remainder))
    };

    let mut current =
        if intercept { init.clone() } else { RegressionParams::from_parts(0.0, init.beta().to_vec(), init.sigma2()) };
    let (mut s, mut obj) = evaluate(&current)?;
    if let Some(t) = trace.as_deref_mut() {
        t.push(obj);
    }
    let mut best = (current.clone(), obj);

    for iter in 1..=cfg.mm_max_iter() {
        let next = if fix_beta {
            let beta = current.beta();
            let alpha = if intercept { update_alpha(beta, &s, data, current.sigma2(), prior.s_alpha()) } else { 0.0 };
            let sigma2 = update_sigma2(alpha, beta, &s, data, prior.a(), gamma, cfg.sigma_update());
            RegressionParams::from_parts(alpha, beta.to_vec(), sigma2)
        } else {
            mm_update(&current, &s, data, state, prior, cfg)?
        };
        let change = relative_change(&current, &next, intercept);
        current = next;
        (s, obj) = evaluate(&current)?;
        if let Some(t) = trace.as_deref_mut() {
            t.push(obj);
        }
        if obj <= best.1 {
            best = (current.clone(), obj);
        }
        if change < cfg.mm_tol() {
            let report = MMReport { iterations: iter, final_objective: obj, converged: true };
            return Ok((current, report));
        }
    }
    let report = MMReport { iterations: cfg.mm_max_iter(), final_objective: best.1, converged: false };
    Ok((best.0, report))
}

/// Ridge-stabilized least squares with `sigma2 = RSS / n`.
pub fn least_squares_start(data: &Dataset) -> Result<RegressionParams> {
    let n = data.n();
    let intercept = data.has_intercept();
    let ones = vec![1.0; n];
    let theta = solve_penalized(data, &ones, data.y(), 1.0, intercept, |m| {
        for k in 0..m.nrows() {
            m[(k, k)] += COLD_START_RIDGE;
        }
    })?;
    let (alpha, beta) = if intercept { (theta[0], theta[1..].to_vec()) } else { (0.0, theta) };
    let fitted = RegressionParams::from_parts(alpha, beta, 1.0);
    let rss: f64 = data
        .rows()
        .zip(data.y())
        .map(|(x, &y)| {
            let r = y - effective_alpha(&fitted, data) - crate::math::dot(x, fitted.beta());
            r * r
        })
        .sum();
    let sigma2 = (rss / n as f64).max(1e-8);
    Ok(RegressionParams::from_parts(fitted.alpha(), fitted.beta().to_vec(), sigma2))
}

/// Larger `gamma` values visited before the target in [`robust_start`].
pub const CONTINUATION_GAMMAS: [f64; 2] = [1.0, 0.5];

/// Cold start for the unweighted objective: the least-squares fit, then MM
/// at each of [`CONTINUATION_GAMMAS`] above `cfg.gamma()`, each run started
/// at the previous solution. Under heavy contamination the least-squares
/// point lies in the basin of a non-robust stationary point, which a large
/// `gamma` escapes.
pub fn robust_start(data: &Dataset, state: &ChainState, prior: &PriorSpec, cfg: &GammaConfig) -> Result<RegressionParams> {
    let mut current = least_squares_start(data)?;
    let w = WeightVector::uniform(data.n());
    for &g in CONTINUATION_GAMMAS.iter().filter(|&&g| g > cfg.gamma()) {
        let stage = GammaConfig::new(g, cfg.mm_tol(), cfg.mm_max_iter())?.with_sigma_update(cfg.sigma_update());
        current = minimize_weighted_objective(&current, &w, data, state, prior, &stage)?.0;
    }
    Ok(current)
}
