//! Robust generalized-Bayesian linear regression with the scaled
//! pseudo-Huber loss, its L1/L2 limits, ridge and spike-and-slab priors.

// `!(x > 0.0)` is used on purpose so that NaN fails parameter checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diagnostics;
pub mod distributions;
pub mod error;
pub mod exec;
pub mod forecast;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod sampler;
pub mod special;
pub mod sph;
pub mod spike_slab;
pub mod stats;
pub mod synthetic;

pub use error::{Error, Result};
pub use model::{ChainState, CommonSpec, Dataset, McmcConfig, ModelSpec, PosteriorDraws, RidgeSpec, SpikeSlabSpec};
pub use sph::{LossKind, LossVariant};
