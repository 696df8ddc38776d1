//! Coupling of two copies of a linear chain, the pair matrix of the
//! not-yet-met dynamics, and its spectral radius.

mod construction;
mod lemma;
mod matrix;

pub use construction::{
    kappa, marginal_kernels, overlap_q, sample_coupled_pair, sample_coupled_state,
    simulate_coupled_chain, split_densities, step_coupled, CoupledRun, CouplingState,
    MarginalLaws, SplitLaws,
};
pub use lemma::{lemma_check, LemmaReport, LemmaRow, LemmaThresholds, MIN_POWERED_SAMPLES};
pub use matrix::{
    build_coupling_matrix, matrix_one_norm, spectral_radius, CouplingMatrix, SpectralEstimate,
    DEFAULT_POWER_CAP,
};
