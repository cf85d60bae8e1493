//! Random variates with the parameterizations used by the samplers.
//!
//! Gamma draws use shape/rate; inverse-gamma draws `IG(shape, scale)` are the
//! reciprocal of `Ga(shape, scale)` draws.

use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};

use crate::error::{domain, Result};
use crate::objective::WeightVector;

/// `n * Dirichlet(1, ..., 1)` through normalized standard exponentials.
pub fn sample_dirichlet_weights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<WeightVector> {
    if n == 0 {
        return Err(domain!("dirichlet weights need n >= 1"));
    }
    let g: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = g.iter().sum();
    let scale = n as f64 / total;
    Ok(WeightVector::from_raw(g.into_iter().map(|v| v * scale).collect()))
}

pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> Result<f64> {
    if !(shape > 0.0 && shape.is_finite()) || !(rate > 0.0 && rate.is_finite()) {
        return Err(domain!("gamma parameters must be positive, got shape={shape} rate={rate}"));
    }
    let g = Gamma::new(shape, 1.0 / rate).map_err(|e| domain!("{e}"))?;
    // Tiny shapes can underflow to zero; keep draws strictly positive.
    Ok(g.sample(rng).max(f64::MIN_POSITIVE))
}

/// `Ga(shape, rate)` conditioned on `x >= lower`, `shape >= 1`. When the mode
/// lies below `lower` the draw uses a shifted-exponential proposal with rate
/// `rate - (shape - 1) / lower`, whose acceptance ratio
/// `(x / lower)^(shape - 1) exp(-(shape - 1)(x / lower - 1))` is at most one.
pub fn sample_gamma_truncated_below<R: Rng + ?Sized>(shape: f64, rate: f64, lower: f64, rng: &mut R) -> Result<f64> {
    if !(shape >= 1.0 && shape.is_finite()) || !(rate > 0.0 && rate.is_finite()) || !(lower >= 0.0 && lower.is_finite()) {
        return Err(domain!("truncated gamma needs shape >= 1, rate > 0, lower >= 0; got {shape}, {rate}, {lower}"));
    }
    if lower == 0.0 {
        return sample_gamma(shape, rate, rng);
    }
    let k1 = shape - 1.0;
    if k1 >= rate * lower {
        // At least half of the mass lies above the mode, hence above `lower`.
        loop {
            let x = sample_gamma(shape, rate, rng)?;
            if x >= lower {
                return Ok(x);
            }
        }
    }
    let prop_rate = rate - k1 / lower;
    loop {
        let e: f64 = Exp1.sample(rng);
        let x = lower + e / prop_rate;
        let t = x / lower;
        let log_acc = k1 * (libm::log(t) - (t - 1.0));
        let v: f64 = rng.random();
        if libm::log(v) <= log_acc {
            return Ok(x);
        }
    }
}

/// Inverse-gamma with shape `shape` and scale `scale`.
pub fn sample_inverse_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> Result<f64> {
    sample_gamma(shape, scale, rng).map(|g| 1.0 / g)
}

/// Inverse-Gaussian with density
/// `sqrt(delta / (2 pi)) x^{-3/2} exp{-delta (x - mu)^2 / (2 mu^2 x)}`,
/// by the Michael–Schucany–Haas transformation.
pub fn sample_inverse_gaussian<R: Rng + ?Sized>(mu: f64, delta: f64, rng: &mut R) -> Result<f64> {
    if !(mu > 0.0 && mu.is_finite()) || !(delta > 0.0 && delta.is_finite()) {
        return Err(domain!("inverse-Gaussian parameters must be positive, got mu={mu} delta={delta}"));
    }
    let nu: f64 = StandardNormal.sample(rng);
    let y = nu * nu;
    let c = mu / (2.0 * delta);
    // The two roots multiply to mu^2; take the smaller as mu^2 / larger to
    // avoid cancellation when mu * y >> delta.
    let larger = mu + c * (mu * y + libm::sqrt(4.0 * mu * delta * y + mu * mu * y * y));
    let smaller = mu * (mu / larger);
    let u: f64 = rng.random();
    let x = if u * (mu + smaller) <= mu { smaller } else { larger };
    Ok(x.max(f64::MIN_POSITIVE))
}
