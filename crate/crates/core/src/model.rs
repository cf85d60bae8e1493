//! Domain types shared by every module. Constructors validate invariants;
//! once built, values are immutable.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::error::{dimension, domain, Result};

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Response vector and covariate matrix (row-major) of a regression problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: Vec<f64>,
    x: Vec<f64>,
    // Column-major copy of `x`, for the weighted Gram products.
    x_cols: Vec<f64>,
    p: usize,
    has_intercept: bool,
    outlier_flags: Option<Vec<bool>>,
}

impl Dataset {
    /// `x` holds `y.len()` rows of `p` covariates each, row-major.
    pub fn new(y: Vec<f64>, x: Vec<f64>, p: usize, has_intercept: bool) -> Result<Self> {
        let n = y.len();
        if n == 0 {
            return Err(domain!("dataset needs at least one observation"));
        }
        if p == 0 {
            return Err(domain!("dataset needs at least one covariate"));
        }
        if x.len() != n * p {
            return Err(dimension!("covariate buffer has {} entries, expected {n}x{p}", x.len()));
        }
        if !all_finite(&y) || !all_finite(&x) {
            return Err(domain!("dataset entries must be finite"));
        }
        let mut x_cols = vec![0.0; n * p];
        for (i, row) in x.chunks_exact(p).enumerate() {
            for (k, v) in row.iter().enumerate() {
                x_cols[k * n + i] = *v;
            }
        }
        Ok(Dataset { y, x, x_cols, p, has_intercept, outlier_flags: None })
    }

    pub fn from_rows(y: Vec<f64>, rows: &[Vec<f64>], has_intercept: bool) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if rows.len() != y.len() {
            return Err(dimension!("{} covariate rows for {} responses", rows.len(), y.len()));
        }
        if rows.iter().any(|r| r.len() != p) {
            return Err(dimension!("ragged covariate rows"));
        }
        Self::new(y, rows.concat(), p, has_intercept)
    }

    pub fn with_outlier_flags(mut self, flags: Vec<bool>) -> Result<Self> {
        if flags.len() != self.n() {
            return Err(dimension!("{} outlier flags for {} observations", flags.len(), self.n()));
        }
        self.outlier_flags = Some(flags);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn has_intercept(&self) -> bool {
        self.has_intercept
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.x.chunks_exact(self.p)
    }

    pub fn x_flat(&self) -> &[f64] {
        &self.x
    }

    /// Covariate `k` (0-based) across all observations.
    pub fn column(&self, k: usize) -> &[f64] {
        let n = self.n();
        &self.x_cols[k * n..(k + 1) * n]
    }

    pub fn outlier_flags(&self) -> Option<&[bool]> {
        self.outlier_flags.as_deref()
    }

    /// Observations at the given indices, in order.
    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        let y = idx.iter().map(|&i| self.y[i]).collect();
        let mut x = Vec::with_capacity(idx.len() * self.p);
        for &i in idx {
            x.extend_from_slice(self.row(i));
        }
        let mut out = Self::new(y, x, self.p, self.has_intercept)?;
        if let Some(f) = &self.outlier_flags {
            out.outlier_flags = Some(idx.iter().map(|&i| f[i]).collect());
        }
        Ok(out)
    }

    /// Observations not flagged as outliers (all of them when unflagged).
    pub fn clean_subset(&self) -> Result<Self> {
        let idx: Vec<usize> = match &self.outlier_flags {
            Some(f) => (0..self.n()).filter(|&i| !f[i]).collect(),
            None => (0..self.n()).collect(),
        };
        self.subset(&idx)
    }
}

/// Intercept, coefficients and error variance.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionParams {
    alpha: f64,
    beta: Vec<f64>,
    sigma2: f64,
}

impl RegressionParams {
    pub fn new(alpha: f64, beta: Vec<f64>, sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(domain!("sigma2 must be positive and finite, got {sigma2}"));
        }
        if !alpha.is_finite() || !all_finite(&beta) {
            return Err(domain!("regression coefficients must be finite"));
        }
        Ok(RegressionParams { alpha, beta, sigma2 })
    }

    pub(crate) fn from_parts(alpha: f64, beta: Vec<f64>, sigma2: f64) -> Self {
        debug_assert!(sigma2 > 0.0);
        RegressionParams { alpha, beta, sigma2 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn p(&self) -> usize {
        self.beta.len()
    }

    /// `alpha + x' beta`
    #[inline]
    pub fn mean(&self, row: &[f64]) -> f64 {
        self.alpha + crate::math::dot(row, &self.beta)
    }

    /// `(alpha, beta_1, ..., beta_p, sigma2)`
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.beta.len() + 2);
        v.push(self.alpha);
        v.extend_from_slice(&self.beta);
        v.push(self.sigma2);
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorKind {
    NormalIG,
    Laplace,
    Horseshoe,
}

/// Parameterization of the inverse-Gaussian full conditional of `1/u_k`
/// under the Laplace prior. `lambda2` denotes the stored value of λ².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LaplaceIgForm {
    /// `mu = sqrt(lambda2 / beta_k^2)`, `shape = lambda2`, from `u_k ~ Exp(lambda2 / 2)`.
    #[default]
    Derived,
    /// `mu = sqrt(lambda / beta_k^2)`, `shape = lambda` with `lambda = sqrt(lambda2)`.
    Printed,
}

/// Shape of the gamma full conditional of the horseshoe global scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HorseshoeLambdaShape {
    /// `c1 + p/2`, the exact conditional under `u_k ~ IG(1/2, lambda/xi_k)`.
    #[default]
    HalfP,
    /// `c1 + p`. With bootstrap-minimizer coefficient draws the null
    /// coefficients sit at zero and the `HalfP` conditional drives `lambda`
    /// towards zero; this shape keeps a positive fixed point.
    FullP,
}

/// Prior on `(alpha, beta, sigma2)` and, for shrinkage priors, on the
/// latent scales.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSpec {
    kind: PriorKind,
    beta_precision: Option<DMatrix<f64>>,
    s_alpha: f64,
    a: f64,
    c1: f64,
    c2: f64,
    laplace_form: LaplaceIgForm,
    horseshoe_shape: HorseshoeLambdaShape,
}

pub const DEFAULT_S_ALPHA: f64 = 100.0;
pub const DEFAULT_S_BETA: f64 = 100.0;
pub const DEFAULT_A: f64 = 1.0;
pub const DEFAULT_C: f64 = 1.0;

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(domain!("{name} must be positive and finite, got {v}"))
    }
}

impl PriorSpec {
    /// Normal prior `N(0, s_beta)` on beta (`s_beta` is p x p, row-major,
    /// symmetric positive definite) and the inverse-gamma prior on sigma2.
    pub fn normal_ig(s_beta: &[f64], p: usize, s_alpha: f64, a: f64) -> Result<Self> {
        check_positive("s_alpha", s_alpha)?;
        check_positive("a", a)?;
        if s_beta.len() != p * p || p == 0 {
            return Err(dimension!("S_beta has {} entries, expected {p}x{p}", s_beta.len()));
        }
        let m = DMatrix::from_row_slice(p, p, s_beta);
        for i in 0..p {
            for j in 0..i {
                let (u, l) = (m[(i, j)], m[(j, i)]);
                if (u - l).abs() > 1e-12 * (1.0 + u.abs().max(l.abs())) {
                    return Err(domain!("S_beta must be symmetric"));
                }
            }
        }
        let chol = m.cholesky().ok_or_else(|| domain!("S_beta must be positive definite"))?;
        Ok(PriorSpec {
            kind: PriorKind::NormalIG,
            beta_precision: Some(chol.inverse()),
            s_alpha,
            a,
            c1: DEFAULT_C,
            c2: DEFAULT_C,
            laplace_form: LaplaceIgForm::Derived,
            horseshoe_shape: HorseshoeLambdaShape::HalfP,
        })
    }

    /// `S_beta = variance * I`.
    pub fn normal_ig_isotropic(p: usize, variance: f64, s_alpha: f64, a: f64) -> Result<Self> {
        check_positive("S_beta variance", variance)?;
        let mut s = vec![0.0; p * p];
        for k in 0..p {
            s[k * p + k] = variance;
        }
        Self::normal_ig(&s, p, s_alpha, a)
    }

    fn shrinkage(kind: PriorKind, s_alpha: f64, a: f64, c1: f64, c2: f64) -> Result<Self> {
        check_positive("s_alpha", s_alpha)?;
        check_positive("a", a)?;
        check_positive("c1", c1)?;
        check_positive("c2", c2)?;
        Ok(PriorSpec {
            kind,
            beta_precision: None,
            s_alpha,
            a,
            c1,
            c2,
            laplace_form: LaplaceIgForm::Derived,
            horseshoe_shape: HorseshoeLambdaShape::HalfP,
        })
    }

    pub fn laplace(s_alpha: f64, a: f64, c1: f64, c2: f64) -> Result<Self> {
        Self::shrinkage(PriorKind::Laplace, s_alpha, a, c1, c2)
    }

    pub fn horseshoe(s_alpha: f64, a: f64, c1: f64, c2: f64) -> Result<Self> {
        Self::shrinkage(PriorKind::Horseshoe, s_alpha, a, c1, c2)
    }

    pub fn default_normal_ig(p: usize) -> Self {
        Self::normal_ig_isotropic(p, DEFAULT_S_BETA, DEFAULT_S_ALPHA, DEFAULT_A).expect("default hyperparameters are valid")
    }

    pub fn default_laplace() -> Self {
        Self::laplace(DEFAULT_S_ALPHA, DEFAULT_A, DEFAULT_C, DEFAULT_C).expect("default hyperparameters are valid")
    }

    pub fn default_horseshoe() -> Self {
        Self::horseshoe(DEFAULT_S_ALPHA, DEFAULT_A, DEFAULT_C, DEFAULT_C).expect("default hyperparameters are valid")
    }

    pub fn with_laplace_form(mut self, form: LaplaceIgForm) -> Self {
        self.laplace_form = form;
        self
    }

    pub fn with_horseshoe_shape(mut self, shape: HorseshoeLambdaShape) -> Self {
        self.horseshoe_shape = shape;
        self
    }

    pub fn kind(&self) -> PriorKind {
        self.kind
    }

    /// `S_beta^{-1}`; present for the normal–inverse-gamma prior only.
    pub fn beta_precision(&self) -> Option<&DMatrix<f64>> {
        self.beta_precision.as_ref()
    }

    pub fn s_alpha(&self) -> f64 {
        self.s_alpha
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn laplace_form(&self) -> LaplaceIgForm {
        self.laplace_form
    }

    pub fn horseshoe_shape(&self) -> HorseshoeLambdaShape {
        self.horseshoe_shape
    }

    pub fn is_shrinkage(&self) -> bool {
        self.kind != PriorKind::NormalIG
    }
}

/// Closed form used for the sigma2 step of the MM iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SigmaUpdate {
    /// `(a + sum s_i r_i^2) / (2 + a + n/(1+gamma))`
    #[default]
    Printed,
    /// `(2a + sum s_i r_i^2) / (2 + a + n/(1+gamma))`, the exact minimizer of
    /// the majorizer of the weighted objective; guarantees monotone descent.
    StrictMajorizer,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaConfig {
    gamma: f64,
    mm_tol: f64,
    mm_max_iter: usize,
    sigma_update: SigmaUpdate,
}

pub const DEFAULT_GAMMA: f64 = 0.2;
pub const DEFAULT_MM_TOL: f64 = 1e-8;
pub const DEFAULT_MM_MAX_ITER: usize = 500;

impl Default for GammaConfig {
    fn default() -> Self {
        GammaConfig {
            gamma: DEFAULT_GAMMA,
            mm_tol: DEFAULT_MM_TOL,
            mm_max_iter: DEFAULT_MM_MAX_ITER,
            sigma_update: SigmaUpdate::Printed,
        }
    }
}

impl GammaConfig {
    pub fn new(gamma: f64, mm_tol: f64, mm_max_iter: usize) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(domain!("gamma must be finite and nonnegative, got {gamma}"));
        }
        check_positive("mm_tol", mm_tol)?;
        if mm_max_iter == 0 {
            return Err(domain!("mm_max_iter must be at least 1"));
        }
        Ok(GammaConfig { gamma, mm_tol, mm_max_iter, sigma_update: SigmaUpdate::Printed })
    }

    pub fn with_gamma(gamma: f64) -> Result<Self> {
        Self::new(gamma, DEFAULT_MM_TOL, DEFAULT_MM_MAX_ITER)
    }

    pub fn with_sigma_update(mut self, mode: SigmaUpdate) -> Self {
        self.sigma_update = mode;
        self
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mm_tol(&self) -> f64 {
        self.mm_tol
    }

    pub fn mm_max_iter(&self) -> usize {
        self.mm_max_iter
    }

    pub fn sigma_update(&self) -> SigmaUpdate {
        self.sigma_update
    }
}

/// Current regression parameters plus the latent scales of the shrinkage
/// prior. `lambda` holds λ² under the Laplace prior and λ under the horseshoe.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    params: RegressionParams,
    u: Vec<f64>,
    xi: Vec<f64>,
    lambda: f64,
}

impl ChainState {
    pub fn new(params: RegressionParams, u: Vec<f64>, xi: Vec<f64>, lambda: f64) -> Result<Self> {
        let p = params.p();
        if u.len() != p || xi.len() != p {
            return Err(dimension!("latent scales must have length {p}"));
        }
        if u.iter().chain(&xi).any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(domain!("latent scales must be positive and finite"));
        }
        check_positive("lambda", lambda)?;
        Ok(ChainState { params, u, xi, lambda })
    }

    /// Unit latent scales around `params`.
    pub fn initial(params: RegressionParams) -> Self {
        let p = params.p();
        ChainState { params, u: vec![1.0; p], xi: vec![1.0; p], lambda: 1.0 }
    }

    pub(crate) fn from_parts(params: RegressionParams, u: Vec<f64>, xi: Vec<f64>, lambda: f64) -> Self {
        ChainState { params, u, xi, lambda }
    }

    pub fn params(&self) -> &RegressionParams {
        &self.params
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn with_params(&self, params: RegressionParams) -> Self {
        ChainState { params, ..self.clone() }
    }

    /// Checks every type invariant; used on kept chain states.
    pub fn is_valid(&self) -> bool {
        self.params.sigma2 > 0.0
            && self.params.sigma2.is_finite()
            && self.params.alpha.is_finite()
            && all_finite(&self.params.beta)
            && self.u.iter().chain(&self.xi).all(|&v| v > 0.0 && v.is_finite())
            && self.lambda > 0.0
            && self.lambda.is_finite()
    }
}

/// Post-burn-in chain output with the configuration that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Draws {
    samples: Vec<ChainState>,
    burnin: usize,
    seed: u64,
    gamma_config: GammaConfig,
    prior: PriorSpec,
    /// Number of inner MM solves that stopped at the iteration cap.
    pub mm_nonconverged: usize,
}

impl Draws {
    pub fn new(samples: Vec<ChainState>, burnin: usize, seed: u64, gamma_config: GammaConfig, prior: PriorSpec) -> Result<Self> {
        if samples.is_empty() {
            return Err(domain!("draws must contain at least one sample"));
        }
        let p = samples[0].params.p();
        if samples.iter().any(|s| s.params.p() != p) {
            return Err(dimension!("samples disagree on the number of coefficients"));
        }
        Ok(Draws { samples, burnin, seed, gamma_config, prior, mm_nonconverged: 0 })
    }

    pub fn samples(&self) -> &[ChainState] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn p(&self) -> usize {
        self.samples[0].params.p()
    }

    pub fn burnin(&self) -> usize {
        self.burnin
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn gamma_config(&self) -> &GammaConfig {
        &self.gamma_config
    }

    pub fn prior(&self) -> &PriorSpec {
        &self.prior
    }

    /// Trace of parameter `index` in `(alpha, beta_1..beta_p, sigma2)` order.
    pub fn series(&self, index: usize) -> Vec<f64> {
        let p = self.p();
        self.samples
            .iter()
            .map(|s| match index {
                0 => s.params.alpha,
                k if k <= p => s.params.beta[k - 1],
                _ => s.params.sigma2,
            })
            .collect()
    }

    /// Trace of `beta_k`, `k` counted from 1.
    pub fn beta_series(&self, k: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.params.beta[k - 1]).collect()
    }
}

/// Error-distribution contamination used in the simulation designs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Contamination {
    None,
    /// `omega` mixing weight on `N(0, scale^2)`.
    HomoI {
        omega: f64,
        scale: f64,
    },
    /// `omega` mixing weight on `N(10, 1)`.
    HomoII {
        omega: f64,
    },
    /// Mixing weight `delta * logistic(-3.3 + x_i,10)` on `N(0, 10^2)`.
    HeteroI {
        delta: f64,
    },
    /// Mixing weight `delta * logistic(-3.3 + x_i,10)` on `N(10, 1)`.
    HeteroII {
        delta: f64,
    },
    /// The first `round(n * omega)` errors are `N(0, scale^2)`.
    LeadingBlock {
        omega: f64,
        scale: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    n: usize,
    alpha_true: f64,
    beta_true: Vec<f64>,
    rho: f64,
    contamination: Contamination,
    hetero_index: usize,
}

impl ScenarioSpec {
    /// `hetero_index` is the 1-based covariate driving heterogeneous
    /// contamination.
    pub fn new(
        n: usize,
        alpha_true: f64,
        beta_true: Vec<f64>,
        rho: f64,
        contamination: Contamination,
        hetero_index: usize,
    ) -> Result<Self> {
        if n == 0 || beta_true.is_empty() {
            return Err(domain!("scenario needs n >= 1 and p >= 1"));
        }
        if !(rho > -1.0 && rho < 1.0) {
            return Err(domain!("rho must lie in (-1, 1), got {rho}"));
        }
        if !alpha_true.is_finite() || !all_finite(&beta_true) {
            return Err(domain!("true coefficients must be finite"));
        }
        match contamination {
            Contamination::HomoI { omega, .. } | Contamination::HomoII { omega } | Contamination::LeadingBlock { omega, .. }
                if !(0.0..=1.0).contains(&omega) =>
            {
                return Err(domain!("omega must lie in [0, 1], got {omega}"))
            }
            Contamination::HeteroI { delta } | Contamination::HeteroII { delta } if !(delta >= 0.0) => {
                return Err(domain!("delta must be nonnegative, got {delta}"))
            }
            Contamination::HomoI { scale, .. } | Contamination::LeadingBlock { scale, .. } if !(scale > 0.0) => {
                return Err(domain!("contamination scale must be positive"))
            }
            _ => {}
        }
        if hetero_index == 0 {
            return Err(domain!("hetero_index is 1-based"));
        }
        Ok(ScenarioSpec { n, alpha_true, beta_true, rho, contamination, hetero_index })
    }

    /// The benchmark design: `alpha = 0.5`, `beta_1 = beta_4 = 0.5`,
    /// `beta_7 = beta_10 = beta_13 = 2`, all other coefficients zero,
    /// `rho = 0.2`, `n = 100`.
    pub fn benchmark(p: usize, contamination: Contamination) -> Result<Self> {
        let mut beta = vec![0.0; p];
        for (k, v) in [(1, 0.5), (4, 0.5), (7, 2.0), (10, 2.0), (13, 2.0)] {
            if k <= p {
                beta[k - 1] = v;
            }
        }
        Self::new(100, 0.5, beta, 0.2, contamination, 10)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.beta_true.len()
    }

    pub fn alpha_true(&self) -> f64 {
        self.alpha_true
    }

    pub fn beta_true(&self) -> &[f64] {
        &self.beta_true
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn contamination(&self) -> Contamination {
        self.contamination
    }

    pub fn hetero_index(&self) -> usize {
        self.hetero_index
    }

    pub fn with_n(mut self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(domain!("scenario needs n >= 1"));
        }
        self.n = n;
        Ok(self)
    }

    /// True parameters with unit error variance.
    pub fn truth(&self) -> RegressionParams {
        RegressionParams::from_parts(self.alpha_true, self.beta_true.clone(), 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_rejects_invariant_violations() {
        assert!(Dataset::new(vec![], vec![], 1, true).is_err());
        assert!(Dataset::new(vec![1.0], vec![], 0, true).is_err());
        assert!(Dataset::new(vec![1.0, 2.0], vec![1.0], 1, true).is_err());
        assert!(Dataset::new(vec![f64::NAN], vec![1.0], 1, true).is_err());
        assert!(Dataset::new(vec![1.0], vec![f64::INFINITY], 1, true).is_err());
        let d = Dataset::new(vec![1.0, 2.0], vec![1.0, 2.0, 3.0, 4.0], 2, false).unwrap();
        assert_eq!(d.row(1), &[3.0, 4.0]);
        assert!(d.clone().with_outlier_flags(vec![true]).is_err());
    }

    #[test]
    fn clean_subset_drops_flagged_rows() {
        let d = Dataset::new(vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0], 1, true)
            .unwrap()
            .with_outlier_flags(vec![false, true, false])
            .unwrap();
        let c = d.clean_subset().unwrap();
        assert_eq!(c.y(), &[1.0, 3.0]);
        assert_eq!(c.outlier_flags(), Some(&[false, false][..]));
    }

    #[test]
    fn params_and_state_validation() {
        assert!(RegressionParams::new(0.0, vec![1.0], 0.0).is_err());
        assert!(RegressionParams::new(0.0, vec![1.0], -1.0).is_err());
        assert!(RegressionParams::new(f64::NAN, vec![1.0], 1.0).is_err());
        let p = RegressionParams::new(0.0, vec![1.0, 2.0], 1.0).unwrap();
        assert!(ChainState::new(p.clone(), vec![1.0], vec![1.0, 1.0], 1.0).is_err());
        assert!(ChainState::new(p.clone(), vec![1.0, 0.0], vec![1.0, 1.0], 1.0).is_err());
        assert!(ChainState::new(p.clone(), vec![1.0, 1.0], vec![1.0, 1.0], 0.0).is_err());
        assert!(ChainState::new(p, vec![1.0, 1.0], vec![1.0, 1.0], 1.0).unwrap().is_valid());
    }

    #[test]
    fn prior_validation() {
        assert!(PriorSpec::normal_ig(&[1.0, 2.0, 2.0, 1.0], 2, 1.0, 1.0).is_err());
        assert!(PriorSpec::normal_ig(&[1.0, 0.5, 0.4, 1.0], 2, 1.0, 1.0).is_err());
        assert!(PriorSpec::normal_ig(&[2.0, 0.0, 0.0, 4.0], 2, 1.0, 1.0).is_ok());
        assert!(PriorSpec::laplace(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(PriorSpec::horseshoe(1.0, 1.0, -1.0, 1.0).is_err());
        let p = PriorSpec::normal_ig(&[2.0, 0.0, 0.0, 4.0], 2, 1.0, 1.0).unwrap();
        let prec = p.beta_precision().unwrap();
        assert!((prec[(0, 0)] - 0.5).abs() < 1e-15 && (prec[(1, 1)] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn gamma_config_validation() {
        assert!(GammaConfig::new(-0.1, 1e-8, 10).is_err());
        assert!(GammaConfig::new(0.0, 1e-8, 10).is_ok());
        assert!(GammaConfig::new(0.2, 0.0, 10).is_err());
        assert!(GammaConfig::new(0.2, 1e-8, 0).is_err());
        assert_eq!(GammaConfig::default().gamma(), 0.2);
    }

    #[test]
    fn scenario_validation_and_benchmark_truth() {
        assert!(ScenarioSpec::new(10, 0.0, vec![1.0], 1.0, Contamination::None, 1).is_err());
        assert!(ScenarioSpec::new(10, 0.0, vec![1.0], 0.2, Contamination::HomoII { omega: 1.5 }, 1).is_err());
        assert!(ScenarioSpec::new(10, 0.0, vec![1.0], 0.2, Contamination::HeteroI { delta: -1.0 }, 1).is_err());
        let s = ScenarioSpec::benchmark(20, Contamination::None).unwrap();
        let b = s.beta_true();
        assert_eq!((b[0], b[3], b[6], b[9], b[12]), (0.5, 0.5, 2.0, 2.0, 2.0));
        assert_eq!(b.iter().filter(|&&v| v == 0.0).count(), 15);
        assert_eq!(s.alpha_true(), 0.5);
    }
}
