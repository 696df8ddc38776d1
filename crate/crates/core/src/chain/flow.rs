use rand::Rng;
use serde::Serialize;

use super::distribution::{tv_distance, Distribution};
use super::kernel::PolynomialKernel;
use crate::error::{Error, Result};

pub const DEFAULT_STATIONARY_TOL: f64 = 1e-10;
pub const DEFAULT_STATIONARY_MAX_ITER: usize = 1_000_000;

/// One step of the nonlinear flow: `mu^T P_mu`.
pub fn flow_step(kernel: &PolynomialKernel, mu: &Distribution) -> Result<Distribution> {
    kernel.evaluate(mu)?.step(mu)
}

/// Exact law sequence `mu_0, ..., mu_n`.
pub fn propagate(
    kernel: &PolynomialKernel,
    mu0: &Distribution,
    n: usize,
) -> Result<Vec<Distribution>> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(mu0.clone());
    for t in 0..n {
        let next = flow_step(kernel, &out[t])?;
        out.push(next);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct Stationary {
    pub dist: Distribution,
    /// Flow steps applied to the barycenter to reach `dist`.
    pub iterations: usize,
    /// `tv(dist, dist^T P_dist)`.
    pub residual: f64,
}

/// Fixed point of the flow, found by iterating from the barycenter until one
/// more step moves the law by at most `tol` in total variation.
pub fn stationary(kernel: &PolynomialKernel, tol: f64, max_iter: usize) -> Result<Stationary> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    let mut mu = Distribution::uniform(kernel.dim())?;
    let mut iterations = 0;
    loop {
        let next = flow_step(kernel, &mu)?;
        let residual = tv_distance(&mu, &next)?;
        if residual <= tol {
            return Ok(Stationary {
                dist: mu,
                iterations,
                residual,
            });
        }
        if iterations >= max_iter {
            return Err(Error::NonConvergence {
                iterations,
                residual,
                last: next.into_vec(),
            });
        }
        mu = next;
        iterations += 1;
    }
}

/// Single path of the nonlinear chain: `X_0 ~ mu_0`, then
/// `X_{t+1} ~ P_{mu_t}(X_t, .)` along the exact law flow.
pub fn sample_trajectory<R: Rng + ?Sized>(
    kernel: &PolynomialKernel,
    mu0: &Distribution,
    n: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let laws = propagate(kernel, mu0, n)?;
    let mut path = Vec::with_capacity(n + 1);
    let mut x = mu0.sample(rng);
    path.push(x);
    for law in &laws[..n] {
        x = kernel.evaluate(law)?.sample_next(x, rng);
        path.push(x);
    }
    Ok(path)
}
