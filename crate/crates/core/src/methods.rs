//! Named estimation methods and a single entry point that fits any of them.

use alloc::string::String;

use crate::baselines::{conjugate_chain, ErrorModel};
use crate::error::{domain, Result};
use crate::model::{
    Dataset, Draws, GammaConfig, HorseshoeLambdaShape, PriorSpec, DEFAULT_A, DEFAULT_C, DEFAULT_GAMMA, DEFAULT_S_ALPHA,
    DEFAULT_S_BETA,
};
use crate::rng::RngStream;
use crate::sampler::run_chain;

/// Degrees of freedom of the t error model (t-BL, t-LM).
pub const T_DF: f64 = 3.0;
/// Cauchy errors are t with one degree of freedom (c-BL, c-LM).
pub const CAUCHY_DF: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Gamma-divergence synthetic posterior, Laplace prior.
    Rbl,
    /// Gamma-divergence synthetic posterior, horseshoe prior.
    Rhs,
    /// Bayesian lasso, normal errors.
    Bl,
    /// Bayesian lasso, t errors.
    TBl,
    /// Bayesian lasso, Cauchy errors.
    CBl,
    /// Gamma-divergence synthetic posterior, normal–inverse-gamma prior.
    Synthetic,
    /// Normal linear model, normal–inverse-gamma prior.
    Lm,
    TLm,
    CLm,
}

impl Method {
    pub const ALL: [Method; 9] =
        [Method::Rbl, Method::Rhs, Method::Bl, Method::TBl, Method::CBl, Method::Synthetic, Method::Lm, Method::TLm, Method::CLm];

    pub fn name(self) -> &'static str {
        match self {
            Method::Rbl => "rbl",
            Method::Rhs => "rhs",
            Method::Bl => "bl",
            Method::TBl => "tbl",
            Method::CBl => "cbl",
            Method::Synthetic => "synthetic",
            Method::Lm => "lm",
            Method::TLm => "tlm",
            Method::CLm => "clm",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        let lower = String::from(s).to_ascii_lowercase().replace('-', "");
        Method::ALL.into_iter().find(|m| m.name() == lower).ok_or_else(|| domain!("unknown method '{s}'"))
    }

    /// Whether the method fits the gamma-divergence synthetic posterior.
    pub fn is_synthetic(self) -> bool {
        matches!(self, Method::Rbl | Method::Rhs | Method::Synthetic)
    }

    /// Error model of the likelihood-based methods.
    pub fn error_model(self) -> Option<ErrorModel> {
        match self {
            Method::Bl | Method::Lm => Some(ErrorModel::Normal),
            Method::TBl | Method::TLm => Some(ErrorModel::StudentT(T_DF)),
            Method::CBl | Method::CLm => Some(ErrorModel::StudentT(CAUCHY_DF)),
            _ => None,
        }
    }

    /// The prior the method uses on `p` coefficients. The horseshoe method
    /// uses the `c1 + p` global-scale shape.
    pub fn prior(self, p: usize, s: &FitSettings) -> Result<PriorSpec> {
        match self {
            Method::Rbl | Method::Bl | Method::TBl | Method::CBl => PriorSpec::laplace(s.s_alpha, s.a, s.c1, s.c2),
            Method::Rhs => {
                Ok(PriorSpec::horseshoe(s.s_alpha, s.a, s.c1, s.c2)?.with_horseshoe_shape(HorseshoeLambdaShape::FullP))
            }
            Method::Synthetic | Method::Lm | Method::TLm | Method::CLm => {
                PriorSpec::normal_ig_isotropic(p, s.s_beta, s.s_alpha, s.a)
            }
        }
    }
}

impl core::fmt::Display for Method {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// Tuning shared by every method. Fields a method does not use are ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitSettings {
    pub gamma: f64,
    pub n_burn: usize,
    pub n_keep: usize,
    pub s_alpha: f64,
    /// Prior variance of each coefficient under the normal–inverse-gamma prior.
    pub s_beta: f64,
    pub a: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for FitSettings {
    fn default() -> Self {
        FitSettings {
            gamma: DEFAULT_GAMMA,
            n_burn: 1000,
            n_keep: 2000,
            s_alpha: DEFAULT_S_ALPHA,
            s_beta: DEFAULT_S_BETA,
            a: DEFAULT_A,
            c1: DEFAULT_C,
            c2: DEFAULT_C,
        }
    }
}

impl FitSettings {
    /// Flat normal priors (variance `1e6`) and `Ga(1, 1)` on `1/sigma2`.
    pub fn vague() -> Self {
        FitSettings { s_alpha: 1e6, s_beta: 1e6, a: 2.0, ..Self::default() }
    }
}

/// Fits `method` to `data`. Likelihood methods record `gamma = 0`.
pub fn fit(method: Method, data: &Dataset, settings: &FitSettings, rng: &mut RngStream) -> Result<Draws> {
    let prior = method.prior(data.p(), settings)?;
    match method.error_model() {
        Some(errors) => Ok(conjugate_chain(data, errors, &prior, settings.n_burn, settings.n_keep, rng)?.draws),
        None => {
            let cfg = GammaConfig::with_gamma(settings.gamma)?;
            run_chain(data, &prior, &cfg, settings.n_burn, settings.n_keep, rng)
        }
    }
}
