//! Random MM problems shared by the property tests and the acceptance run.
#![allow(dead_code)]

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use robreg_core::distributions::sample_dirichlet_weights;
use robreg_core::mm::least_squares_start;
use robreg_core::objective::weighted_objective;
use robreg_core::sampler::{update_horseshoe_hyperparams, update_laplace_hyperparams};
use robreg_core::scenario::generate_scenario;
use robreg_core::{
    ChainState, Contamination, Dataset, GammaConfig, LaplaceIgForm, PriorSpec, RegressionParams, RngStream, ScenarioSpec,
    SigmaUpdate, WeightVector,
};

pub struct Problem {
    pub data: Dataset,
    pub prior: PriorSpec,
    pub state: ChainState,
    pub w: WeightVector,
    pub cfg: GammaConfig,
    pub init: RegressionParams,
}

/// A contaminated regression with random truth, random Dirichlet weights and
/// one of the three priors (chosen by `seed % 3`) with random latent scales.
pub fn random_problem(seed: u64, n: usize, p: usize, gamma: f64) -> Problem {
    let mut rng = RngStream::new(seed);
    let beta: Vec<f64> = (0..p).map(|_| 2.0 * Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect();
    let alpha: f64 = StandardNormal.sample(&mut rng);
    let omega = 0.2 * rng.random::<f64>();
    let spec = ScenarioSpec::new(n, alpha, beta, 0.2, Contamination::HomoII { omega }, 10).unwrap();
    let data = generate_scenario(&spec, &mut rng).unwrap();
    let w = sample_dirichlet_weights(n, &mut rng).unwrap();
    let init = least_squares_start(&data).unwrap();
    let scales = |rng: &mut RngStream| -> Vec<f64> { (0..p).map(|_| 0.1 + 10.0 * rng.random::<f64>()).collect() };
    let (prior, state) = match seed % 3 {
        0 => (PriorSpec::default_normal_ig(p), ChainState::initial(init.clone())),
        1 => {
            let u = scales(&mut rng);
            (PriorSpec::default_laplace(), ChainState::new(init.clone(), u, vec![1.0; p], 1.5).unwrap())
        }
        _ => {
            let u = scales(&mut rng);
            let xi = scales(&mut rng);
            (PriorSpec::default_horseshoe(), ChainState::new(init.clone(), u, xi, 0.7).unwrap())
        }
    };
    let cfg = GammaConfig::with_gamma(gamma).unwrap().with_sigma_update(SigmaUpdate::StrictMajorizer);
    Problem { data, prior, state, w, cfg, init }
}

impl Problem {
    pub fn objective(&self, params: &RegressionParams) -> f64 {
        weighted_objective(params, &self.state, &self.w, &self.data, &self.prior, self.cfg.gamma()).unwrap()
    }

    /// Central differences of the objective in `(alpha, beta, log sigma2)`.
    pub fn fd_gradient(&self, at: &RegressionParams) -> Vec<f64> {
        let p = at.p();
        let h = 1e-6;
        let eval = |k: usize, step: f64| {
            let mut alpha = at.alpha();
            let mut beta = at.beta().to_vec();
            let mut sigma2 = at.sigma2();
            if k == 0 {
                alpha += step;
            } else if k <= p {
                beta[k - 1] += step;
            } else {
                sigma2 *= step.exp();
            }
            self.objective(&RegressionParams::new(alpha, beta, sigma2).unwrap())
        };
        (0..p + 2).map(|k| (eval(k, h) - eval(k, -h)) / (2.0 * h)).collect()
    }
}

/// Grid of the descent and stationarity problems: `(seed, n, p, gamma)`.
pub fn problem_grid(count: usize, offset: u64) -> Vec<(u64, usize, usize, f64)> {
    let mut out = Vec::with_capacity(count);
    let mut i = 0u64;
    while out.len() < count {
        let n = [30, 100][(i % 2) as usize];
        let p = [2, 20][((i / 2) % 2) as usize];
        let gamma = [0.1, 0.2, 0.5][((i / 4) % 3) as usize];
        out.push((offset + i, n, p, gamma));
        i += 1;
    }
    out
}

/// Chi-square goodness of fit of samples (in log coordinates) against an
/// unnormalized log density on the same coordinates.
///
/// The box `bounds` is cut into `fine` midpoint cells per axis for the
/// integration and grouped into `coarse` bins per axis. Bins expecting fewer
/// than 5 samples, and samples outside the box, are pooled into one bin. The
/// box must hold essentially all of the mass: at most 5 samples may fall
/// outside it. Returns `(statistic, degrees of freedom, p-value)`.
pub fn grid_chi_square(
    log_density: impl Fn(&[f64]) -> f64,
    bounds: &[(f64, f64)],
    fine: usize,
    coarse: usize,
    samples: &[Vec<f64>],
) -> (f64, usize, f64) {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    assert_eq!(fine % coarse, 0);
    let d = bounds.len();
    let group = fine / coarse;
    let n_coarse = coarse.pow(d as u32);
    let mut mass = vec![0.0; n_coarse];
    let mut logs = Vec::with_capacity(fine.pow(d as u32));
    let mut idx = vec![0usize; d];
    let mut point = vec![0.0; d];
    loop {
        for k in 0..d {
            let (lo, hi) = bounds[k];
            point[k] = lo + (hi - lo) * (idx[k] as f64 + 0.5) / fine as f64;
        }
        let cell = idx.iter().fold(0, |acc, &i| acc * coarse + i / group);
        logs.push((cell, log_density(&point)));
        let mut k = d;
        loop {
            if k == 0 {
                break;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < fine {
                break;
            }
            idx[k] = 0;
        }
        if idx.iter().all(|&i| i == 0) {
            break;
        }
    }
    let top = logs.iter().map(|(_, l)| *l).fold(f64::NEG_INFINITY, f64::max);
    for (cell, l) in &logs {
        mass[*cell] += (l - top).exp();
    }
    let total: f64 = mass.iter().sum();
    let m = samples.len() as f64;
    let mut observed = vec![0.0; n_coarse];
    let mut outside = 0.0;
    for s in samples {
        let mut cell = 0;
        let mut inside = true;
        for k in 0..d {
            let (lo, hi) = bounds[k];
            let t = (s[k] - lo) / (hi - lo);
            if !(0.0..1.0).contains(&t) {
                inside = false;
                break;
            }
            cell = cell * coarse + ((t * coarse as f64) as usize).min(coarse - 1);
        }
        if inside {
            observed[cell] += 1.0;
        } else {
            outside += 1.0;
        }
    }
    assert!(outside <= 5.0, "{outside} samples outside the integration box");
    let (mut stat, mut bins) = (0.0, 0usize);
    let (mut pool_obs, mut pool_exp) = (outside, 0.0);
    for (o, w) in observed.iter().zip(&mass) {
        let e = m * w / total;
        if e < 5.0 {
            pool_obs += o;
            pool_exp += e;
        } else {
            stat += (o - e) * (o - e) / e;
            bins += 1;
        }
    }
    if pool_exp >= 5.0 {
        stat += (pool_obs - pool_exp) * (pool_obs - pool_exp) / pool_exp;
        bins += 1;
    } else {
        // Too little pooled mass for the approximation; any sizeable count
        // there is still a failure.
        assert!(pool_obs <= 10.0, "{pool_obs} samples where {pool_exp} expected");
    }
    let df = bins - 1;
    let pvalue = ChiSquared::new(df as f64).unwrap().sf(stat);
    (stat, df, pvalue)
}

// Latent-scale blocks at p = 1, iterated with `beta` fixed.

pub const GOF_DRAWS: usize = 100_000;
const GOF_THIN: usize = 10;
pub const GOF_BETA: f64 = 0.7;
/// Wide enough that the density mass outside is negligible at 10^5 draws.
pub const LAPLACE_BOX: [(f64, f64); 2] = [(-12.0, 14.0), (-16.0, 6.0)];

/// `log pi(u, lambda2 | beta)` in `(ln u, ln lambda2)`, Jacobian included:
/// `N(beta; 0, u) Exp(u; lambda2/2) Ga(lambda2; c1, c2)`.
pub fn laplace_log_density(p: &[f64], c1: f64, c2: f64) -> f64 {
    let (u, l2) = (p[0].exp(), p[1].exp());
    -0.5 * p[0] - GOF_BETA * GOF_BETA / (2.0 * u) + p[1] - 0.5 * l2 * u + (c1 - 1.0) * p[1] - c2 * l2 + p[0] + p[1]
}

/// `log pi(u, xi, lambda | beta)` in log coordinates, Jacobian included:
/// `N(beta; 0, u) IG(u; 1/2, lambda/xi) IG(xi; 1/2, 1) Ga(lambda; c1, c2)`.
pub fn horseshoe_log_density(p: &[f64], c1: f64, c2: f64) -> f64 {
    let (u, xi, lam) = (p[0].exp(), p[1].exp(), p[2].exp());
    -0.5 * p[0] - GOF_BETA * GOF_BETA / (2.0 * u) + 0.5 * (p[2] - p[1]) - 1.5 * p[0] - lam / (xi * u) - 1.5 * p[1] - 1.0 / xi
        + (c1 - 1.0) * p[2]
        - c2 * lam
        + p[0]
        + p[1]
        + p[2]
}

pub fn laplace_samples(prior: &PriorSpec, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = RngStream::new(seed);
    let mut lambda2 = 1.0;
    let mut out = Vec::with_capacity(GOF_DRAWS);
    for it in 0..(GOF_DRAWS + 100) * GOF_THIN {
        let (u, l2) = update_laplace_hyperparams(&[GOF_BETA], lambda2, prior, &mut rng).unwrap();
        lambda2 = l2;
        if it >= 100 * GOF_THIN && it % GOF_THIN == 0 {
            out.push(vec![u[0].ln(), l2.ln()]);
        }
    }
    out
}

/// Chi-square test of the Laplace `(u, lambda2)` block: `(stat, df, p)`.
pub fn laplace_gof(form: LaplaceIgForm, seed: u64) -> (f64, usize, f64) {
    let prior = PriorSpec::default_laplace().with_laplace_form(form);
    let samples = laplace_samples(&prior, seed);
    grid_chi_square(|p| laplace_log_density(p, 1.0, 1.0), &LAPLACE_BOX, 520, 26, &samples)
}

/// Chi-square test of the horseshoe `(u, xi, lambda)` block: `(stat, df, p)`.
pub fn horseshoe_gof(seed: u64) -> (f64, usize, f64) {
    let prior = PriorSpec::default_horseshoe();
    let mut rng = RngStream::new(seed);
    let (mut u, mut xi, mut lam) = (vec![1.0], vec![1.0], 1.0);
    let mut samples = Vec::with_capacity(GOF_DRAWS);
    for it in 0..(GOF_DRAWS + 100) * GOF_THIN {
        let next = update_horseshoe_hyperparams(&[GOF_BETA], &u, &xi, lam, &prior, &mut rng).unwrap();
        (u, xi, lam) = next;
        if it >= 100 * GOF_THIN && it % GOF_THIN == 0 {
            samples.push(vec![u[0].ln(), xi[0].ln(), lam.ln()]);
        }
    }
    // `ln xi` and `ln u` have exponential right tails, hence the long upper reach.
    let bounds = [(-6.0, 16.0), (-4.0, 18.0), (-12.0, 4.0)];
    grid_chi_square(|p| horseshoe_log_density(p, 1.0, 1.0), &bounds, 198, 9, &samples)
}
