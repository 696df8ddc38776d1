use rayon::prelude::*;
use serde::Serialize;

use super::coefficients::{gamma_estimate, SamplingConfig};
use crate::chain::{propagate, Distribution, PolynomialKernel, StochasticMatrix};
use crate::error::{Error, Result};
use crate::rng::substream;

#[derive(Debug, Clone, Serialize)]
pub struct RhoReport {
    pub n: usize,
    pub k: u32,
    pub samples: usize,
    pub mean: f64,
    pub std_error: f64,
    pub gamma: f64,
    /// `(1 + gamma)^(n (k - 1))`.
    pub bound: f64,
    pub pass: bool,
}

/// Samples paths of the nonlinear chain from `mu0` and averages `rho_n^k`,
/// where `rho_n` is the product of `C_1(x_i, x_{i+1}) / P_{mu_i}(x_i, x_{i+1})`
/// along the path. Passes when the mean is within three standard errors of
/// the moment bound.
pub fn rho_moment_check(
    kernel: &PolynomialKernel,
    mu0: &Distribution,
    n: usize,
    k: u32,
    samples: usize,
    seed: u64,
) -> Result<RhoReport> {
    if k == 0 {
        return Err(Error::InvalidArgument("moment order must be >= 1".into()));
    }
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    let gamma = gamma_estimate(kernel, &SamplingConfig::default())?.gamma;
    let linear = kernel.linear_part();
    let laws = propagate(kernel, mu0, n)?;
    let kernels: Vec<StochasticMatrix> = laws[..n]
        .iter()
        .map(|mu| kernel.evaluate(mu))
        .collect::<Result<_>>()?;

    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let mut x = mu0.sample(&mut rng);
            let mut rho = 1.0;
            for step in &kernels {
                let y = step.sample_next(x, &mut rng);
                let denom = step.get(x, y);
                assert!(denom > 0.0, "sampled a zero-probability transition");
                rho *= linear.get(x, y) / denom;
                x = y;
            }
            rho.powi(k as i32)
        })
        .collect();

    let count = values.len() as f64;
    let mean = values.iter().sum::<f64>() / count;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
    let std_error = (var / count).sqrt();
    let bound = (1.0 + gamma).powi((n as i32) * (k as i32 - 1));
    Ok(RhoReport {
        n,
        k,
        samples,
        mean,
        std_error,
        gamma,
        bound,
        pass: mean <= bound + 3.0 * std_error,
    })
}
