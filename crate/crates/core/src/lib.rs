//! Robust Bayesian linear regression through gamma-divergence synthetic
//! posteriors.
//!
//! Posterior draws come from a weighted likelihood bootstrap: each draw
//! minimizes a Dirichlet-weighted version of the gamma-divergence objective
//! with an MM algorithm. Under Laplace and horseshoe shrinkage priors the
//! bootstrap step sits inside a Gibbs sampler over the latent prior scales.
//!
//! The crate is `no_std` and needs only `alloc`; file formats, the CLI and
//! the parallel experiment harness live in the `robreg` crate.
#![no_std]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod diagnostics;
pub mod distributions;
pub mod error;
pub mod math;
pub mod methods;
pub mod mm;
pub mod model;
pub mod objective;
pub mod rng;
pub mod sampler;
pub mod scenario;

pub use error::{Error, Result};
pub use methods::{fit, FitSettings, Method};
pub use model::{
    ChainState, Contamination, Dataset, Draws, GammaConfig, HorseshoeLambdaShape, LaplaceIgForm, PriorKind, PriorSpec,
    RegressionParams, ScenarioSpec, SigmaUpdate,
};
pub use objective::WeightVector;
pub use rng::RngStream;

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
