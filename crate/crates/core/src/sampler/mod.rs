//! MCMC samplers and chain orchestration.

pub mod alpha;
mod chain;
pub mod ridge;
pub mod slice;
pub mod steps;

pub use alpha::{log_alpha2_conditional, GammaPrior};
pub use chain::{fit, run_chain};
pub use ridge::RidgeSampler;
pub use slice::slice_sample_step;

pub(crate) use ridge::compute_residuals;
