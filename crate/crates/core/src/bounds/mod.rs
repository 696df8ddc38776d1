//! Convergence coefficients and bound curves: Markov-Dobrushin (one-step
//! and k-step), the coupling-matrix spectral bound, the initial-distance
//! bound, the perturbation bound and their combination.

mod coefficients;
mod curves;
mod moments;
mod report;

pub use coefficients::{
    delta_estimate, gamma_estimate, kstep_product, lipschitz_lambda, md_alpha_kernel,
    md_alpha_matrix, Estimate, EstimateKind, GammaEstimate, SamplingConfig,
};
pub use curves::{
    kstep_bound_curve, md_bound_curve, spectral_curve, theorem2_bound, theorem2_bruteforce,
    theorem3_bound, theorem4_bound, theorem4_curve, BruteForceMax, Curve, Regime, TV_MAX,
};
pub use moments::{rho_moment_check, RhoReport};
pub use report::{full_report, BoundReport, ReportConfig};
