//! File formats, dataset recipes, experiment drivers and the command-line
//! front end built on `robreg-core`.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod experiments;
pub mod io;
pub mod manifest;
pub mod recipes;

pub use error::{AppError, AppResult};
