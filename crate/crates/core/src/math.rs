//! Scalar and small dense linear-algebra helpers shared by the solvers.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub(crate) const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[inline]
pub fn log_normal_density(y: f64, mean: f64, sigma2: f64) -> f64 {
    let r = y - mean;
    -0.5 * (LN_2PI + libm::log(sigma2)) - r * r / (2.0 * sigma2)
}

/// `log(sum(exp(v)))`, ignoring `-inf` entries. Returns `-inf` for an
/// empty or all `-inf` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.iter().map(|v| libm::exp(v - max)).sum();
    max + libm::log(sum)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dot product with four independent accumulators, which lets the compiler
/// vectorize. Differs from [`dot`] only in rounding.
pub(crate) fn dot_wide(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for j in 0..4 {
            acc[j] += x[j] * y[j];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Solves `a x = b` for symmetric positive-definite `a`.
pub(crate) fn spd_solve(a: DMatrix<f64>, b: DVector<f64>) -> Result<DVector<f64>> {
    let chol = a.cholesky().ok_or_else(|| Error::Numerical("system matrix is not positive definite".into()))?;
    Ok(chol.solve(&b))
}

/// Sample mean and covariance (denominator `m - 1`) of row vectors.
pub(crate) fn mean_and_covariance(rows: &[Vec<f64>]) -> (DVector<f64>, DMatrix<f64>) {
    let m = rows.len();
    let d = rows[0].len();
    let mut mean = DVector::zeros(d);
    for r in rows {
        for (k, v) in r.iter().enumerate() {
            mean[k] += v;
        }
    }
    mean /= m as f64;
    let mut cov = DMatrix::zeros(d, d);
    for r in rows {
        for a in 0..d {
            let da = r[a] - mean[a];
            for b in a..d {
                cov[(a, b)] += da * (r[b] - mean[b]);
            }
        }
    }
    let denom = if m > 1 { (m - 1) as f64 } else { 1.0 };
    for a in 0..d {
        for b in a..d {
            let v = cov[(a, b)] / denom;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    (mean, cov)
}

/// Linear-interpolation quantile of sorted data (Hyndman–Fan type 7).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_handles_neg_infinity() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
        let v = log_sum_exp(&[0.0, f64::NEG_INFINITY, 0.0]);
        assert!((v - libm::log(2.0)).abs() < 1e-15);
        // no overflow for large arguments
        let v = log_sum_exp(&[1000.0, 1000.0]);
        assert!((v - 1000.0 - libm::log(2.0)).abs() < 1e-12);
    }

    #[test]
    fn quantile_matches_type7() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&s, 0.0), 1.0);
        assert_eq!(quantile_sorted(&s, 1.0), 4.0);
        assert!((quantile_sorted(&s, 0.5) - 2.5).abs() < 1e-15);
        assert!((quantile_sorted(&s, 0.25) - 1.75).abs() < 1e-15);
    }
}
