//! Finite-state distributions, distribution-dependent polynomial kernels and
//! the exact law flow `mu_{n+1}^T = mu_n^T P_{mu_n}`.
//!
//! States are 0-based throughout the crate.

mod distribution;
mod flow;
mod kernel;
mod matrix;
mod model_file;

pub use distribution::{overlap, tv_distance, Distribution, MASS_TOL};
pub(crate) use distribution::sample_index;
pub use flow::{
    flow_step, propagate, sample_trajectory, stationary, Stationary, DEFAULT_STATIONARY_MAX_ITER,
    DEFAULT_STATIONARY_TOL,
};
pub use kernel::{validate_kernel, KernelValidation, PolynomialKernel, KERNEL_TOL};
pub use matrix::{StochasticMatrix, ROW_TOL};
pub use model_file::{load_model, model_to_json, parse_model, MatrixLiteral, ModelSpec};

use rand::Rng;

use crate::error::Result;

/// Flat random point of the probability simplex.
pub fn random_distribution<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Result<Distribution> {
    Distribution::random(p, rng)
}
