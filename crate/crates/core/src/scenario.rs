//! Synthetic datasets for the simulation and robustness experiments.

use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, Result};
use crate::model::{Contamination, Dataset, ScenarioSpec};

fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-t))
}

/// Offset inside the logistic link of heterogeneous contamination.
pub const HETERO_OFFSET: f64 = -3.3;
/// Mean of the shifted contamination distribution `N(10, 1)`.
pub const SHIFT_MEAN: f64 = 10.0;
/// Standard deviation of the wide contamination distribution `N(0, 10^2)`.
pub const WIDE_SD: f64 = 10.0;

/// Draws covariates from `N_p(0, Sigma)`, `Sigma_ij = rho^|i-j|`, and errors
/// from the mixture `(1 - omega_i) N(0, 1) + omega_i f_c`. Outlier flags
/// record which errors came from `f_c`.
pub fn generate_scenario<R: Rng + ?Sized>(spec: &ScenarioSpec, rng: &mut R) -> Result<Dataset> {
    let (n, p) = (spec.n(), spec.p());
    let hetero = matches!(spec.contamination(), Contamination::HeteroI { .. } | Contamination::HeteroII { .. });
    if hetero && p < spec.hetero_index() {
        return Err(domain!("heterogeneous contamination needs covariate {} but p = {p}", spec.hetero_index()));
    }
    let rho = spec.rho();
    let innov = libm::sqrt(1.0 - rho * rho);
    let mut x = Vec::with_capacity(n * p);
    for _ in 0..n {
        // AR(1) recursion reproduces the rho^|i-j| correlation exactly.
        let mut prev: f64 = StandardNormal.sample(rng);
        x.push(prev);
        for _ in 1..p {
            let z: f64 = StandardNormal.sample(rng);
            prev = rho * prev + innov * z;
            x.push(prev);
        }
    }
    let n_lead = match spec.contamination() {
        Contamination::LeadingBlock { omega, .. } => libm::round(n as f64 * omega) as usize,
        _ => 0,
    };
    let mut y = Vec::with_capacity(n);
    let mut flags = Vec::with_capacity(n);
    for i in 0..n {
        let row = &x[i * p..(i + 1) * p];
        let z: f64 = StandardNormal.sample(rng);
        let (eps, outlier) = match spec.contamination() {
            Contamination::None => (z, false),
            Contamination::LeadingBlock { scale, .. } => {
                if i < n_lead {
                    (scale * z, true)
                } else {
                    (z, false)
                }
            }
            c => {
                let (omega, shifted) = match c {
                    Contamination::HomoI { omega, .. } => (omega, false),
                    Contamination::HomoII { omega } => (omega, true),
                    Contamination::HeteroI { delta } => (delta * logistic(HETERO_OFFSET + row[spec.hetero_index() - 1]), false),
                    Contamination::HeteroII { delta } => (delta * logistic(HETERO_OFFSET + row[spec.hetero_index() - 1]), true),
                    _ => unreachable!(),
                };
                let u: f64 = rng.random();
                if u < omega.min(1.0) {
                    let e = match c {
                        Contamination::HomoI { scale, .. } => scale * z,
                        _ if shifted => SHIFT_MEAN + z,
                        _ => WIDE_SD * z,
                    };
                    (e, true)
                } else {
                    (z, false)
                }
            }
        };
        y.push(spec.alpha_true() + crate::math::dot(row, spec.beta_true()) + eps);
        flags.push(outlier);
    }
    Dataset::new(y, x, p, true)?.with_outlier_flags(flags)
}

/// The simple regression `y = x + eps` (`alpha = 0`, `beta = 1`,
/// `sigma2 = 1`, `x ~ N(0, 1)`) whose first `round(n * omega)` errors are
/// `N(0, scale^2)`.
pub fn generate_simple_regression<R: Rng + ?Sized>(n: usize, omega: f64, scale: f64, rng: &mut R) -> Result<Dataset> {
    let spec = ScenarioSpec::new(n, 0.0, alloc::vec![1.0], 0.0, Contamination::LeadingBlock { omega, scale }, 1)?;
    generate_scenario(&spec, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn clean_scenario_has_no_flags_and_unit_errors() {
        let spec = ScenarioSpec::benchmark(20, Contamination::None).unwrap().with_n(20_000).unwrap();
        let d = generate_scenario(&spec, &mut RngStream::new(1)).unwrap();
        assert!(d.outlier_flags().unwrap().iter().all(|f| !f));
        let resid: std::vec::Vec<f64> =
            d.rows().zip(d.y()).map(|(x, y)| y - 0.5 - crate::math::dot(x, spec.beta_true())).collect();
        let m = resid.iter().sum::<f64>() / resid.len() as f64;
        let v = resid.iter().map(|r| (r - m) * (r - m)).sum::<f64>() / resid.len() as f64;
        assert!(m.abs() < 0.03 && (v - 1.0).abs() < 0.04, "{m} {v}");
    }

    #[test]
    fn covariate_correlation_is_ar1() {
        let spec = ScenarioSpec::benchmark(5, Contamination::None).unwrap().with_n(50_000).unwrap();
        let d = generate_scenario(&spec, &mut RngStream::new(2)).unwrap();
        let corr = |a: usize, b: usize| d.rows().map(|r| r[a] * r[b]).sum::<f64>() / d.n() as f64;
        assert!((corr(0, 0) - 1.0).abs() < 0.03);
        assert!((corr(0, 1) - 0.2).abs() < 0.02);
        assert!((corr(1, 3) - 0.04).abs() < 0.02);
    }

    #[test]
    fn homogeneous_contamination_fraction() {
        let spec = ScenarioSpec::benchmark(20, Contamination::HomoII { omega: 0.2 }).unwrap().with_n(100_000).unwrap();
        let d = generate_scenario(&spec, &mut RngStream::new(3)).unwrap();
        let frac = d.outlier_flags().unwrap().iter().filter(|&&f| f).count() as f64 / 1e5;
        let se = libm::sqrt(0.2 * 0.8 / 1e5);
        assert!((frac - 0.2).abs() < 3.0 * se, "{frac}");
    }

    #[test]
    fn heterogeneous_flags_increase_with_x10() {
        let spec = ScenarioSpec::benchmark(20, Contamination::HeteroII { delta: 4.0 }).unwrap().with_n(100_000).unwrap();
        let d = generate_scenario(&spec, &mut RngStream::new(4)).unwrap();
        let flags = d.outlier_flags().unwrap();
        // Flag rate in increasing bins of x_10.
        let edges = [-1e9, -1.0, 0.0, 1.0, 2.0, 1e9];
        let mut rates = std::vec::Vec::new();
        for w in edges.windows(2) {
            let (mut k, mut c) = (0usize, 0usize);
            for (i, r) in d.rows().enumerate() {
                if r[9] >= w[0] && r[9] < w[1] {
                    c += 1;
                    k += usize::from(flags[i]);
                }
            }
            rates.push(k as f64 / c as f64);
        }
        assert!(rates.windows(2).all(|r| r[0] < r[1]), "{rates:?}");
    }

    #[test]
    fn hetero_needs_tenth_covariate() {
        let spec = ScenarioSpec::benchmark(5, Contamination::HeteroI { delta: 1.0 }).unwrap();
        assert!(generate_scenario(&spec, &mut RngStream::new(5)).is_err());
    }

    #[test]
    fn leading_block_marks_first_observations() {
        let d = generate_simple_regression(300, 0.05, 10.0, &mut RngStream::new(6)).unwrap();
        let f = d.outlier_flags().unwrap();
        assert!(f[..15].iter().all(|&v| v) && f[15..].iter().all(|&v| !v));
        assert_eq!(d.p(), 1);
    }

    #[test]
    fn scenario_is_seed_deterministic() {
        let spec = ScenarioSpec::benchmark(20, Contamination::HeteroI { delta: 2.0 }).unwrap();
        let a = generate_scenario(&spec, &mut RngStream::substream(9, &[1, 2])).unwrap();
        let b = generate_scenario(&spec, &mut RngStream::substream(9, &[1, 2])).unwrap();
        assert_eq!(a, b);
    }
}
