//! Convergence bounds for finite-state nonlinear Markov chains.
//!
//! The crate builds distribution-dependent polynomial kernels, couples two
//! copies of their linear part, and turns the spectral radius of the coupling
//! matrix into total-variation bounds. The same bound, applied to the hidden
//! chain of a Gaussian HMM fitted on sliding windows of returns, gives a
//! volatility indicator that is compared against GARCH(1,1).

pub mod bounds;
pub mod chain;
pub mod cli;
pub mod coupling;
pub mod error;
pub mod experiments;
pub mod ghmm;
pub mod rng;
pub mod signal;
pub mod table;
pub mod volatility;

pub use error::{Error, Result};
