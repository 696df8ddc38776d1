//! Scalar coefficients: Markov-Dobrushin overlaps, Lipschitz constants, the
//! perturbation ratio and the distance between the two fixed points.
//!
//! Infima and suprema over the simplex are estimated from vertices plus a
//! seeded Monte-Carlo sample, so every estimate carries the direction of its
//! one-sided error.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::chain::{
    propagate, stationary, tv_distance, Distribution, PolynomialKernel, StochasticMatrix,
};
use crate::error::{Error, Result};
use crate::rng::stream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplingConfig {
    pub samples: usize,
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            samples: 10_000,
            seed: 0x0a1f_a5eed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    Exact,
    UpperEstimateOfInf,
    LowerEstimateOfSup,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub kind: EstimateKind,
    /// Number of probed points (0 for exact values).
    pub samples: usize,
}

impl Estimate {
    fn exact(value: f64) -> Self {
        Estimate {
            value,
            kind: EstimateKind::Exact,
            samples: 0,
        }
    }
}

fn row_overlap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.min(*y)).sum()
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("step count k must be >= 1".into()));
    }
    Ok(())
}

/// Exact `alpha_k = min_{x, x'} sum_y P^k(x, y) ^ P^k(x', y)` for a linear chain.
pub fn md_alpha_matrix(p: &StochasticMatrix, k: usize) -> Result<f64> {
    check_k(k)?;
    let pk = p.power(k);
    let n = p.dim();
    let mut best = 1.0_f64;
    for x in 0..n {
        for x2 in (x + 1)..n {
            best = best.min(row_overlap(&pk.row(x), &pk.row(x2)));
        }
    }
    Ok(best.clamp(0.0, 1.0))
}

/// Candidate laws: all vertices, the barycenter, then flat random points.
fn probe_points(p: usize, sampling: &SamplingConfig) -> Result<Vec<Distribution>> {
    let mut rng = stream(sampling.seed);
    let mut pts: Vec<Distribution> = (0..p)
        .map(|i| Distribution::vertex(p, i))
        .collect::<Result<_>>()?;
    pts.push(Distribution::uniform(p)?);
    for _ in 0..sampling.samples {
        pts.push(Distribution::random(p, &mut rng)?);
    }
    Ok(pts)
}

/// `k`-step product `P_{mu_0} P_{mu_1} ... P_{mu_{k-1}}` along the flow from `mu`.
pub fn kstep_product(kernel: &PolynomialKernel, mu: &Distribution, k: usize) -> Result<DMatrix<f64>> {
    let laws = propagate(kernel, mu, k.saturating_sub(1))?;
    let n = kernel.dim();
    let mut acc = DMatrix::identity(n, n);
    for law in laws.iter().take(k) {
        acc *= kernel.evaluate(law)?.as_matrix();
    }
    Ok(acc)
}

/// Upper estimate of `inf_{x, x', mu, nu} sum_y P^(k)_mu(x, y) ^ P^(k)_nu(x', y)`.
///
/// Pairs are formed from consecutive probe points plus every vertex pair, so
/// the cost stays linear in the sample count.
pub fn md_alpha_kernel(
    kernel: &PolynomialKernel,
    k: usize,
    sampling: &SamplingConfig,
) -> Result<Estimate> {
    check_k(k)?;
    if kernel.is_linear() {
        return Ok(Estimate::exact(md_alpha_matrix(&kernel.linear_part(), k)?));
    }
    let n = kernel.dim();
    let pts = probe_points(n, sampling)?;
    let products = pts
        .iter()
        .map(|mu| kstep_product(kernel, mu, k))
        .collect::<Result<Vec<_>>>()?;
    let rows = |m: &DMatrix<f64>, x: usize| -> Vec<f64> { m.row(x).iter().copied().collect() };
    let pair_min = |a: &DMatrix<f64>, b: &DMatrix<f64>| -> f64 {
        let mut best = 1.0_f64;
        for x in 0..n {
            for x2 in 0..n {
                if x != x2 {
                    best = best.min(row_overlap(&rows(a, x), &rows(b, x2)));
                }
            }
        }
        best
    };
    let mut best = 1.0_f64;
    // same-law pairs
    for m in &products {
        best = best.min(pair_min(m, m));
    }
    // vertex / barycenter pairs
    for i in 0..=n {
        for j in 0..=n {
            if i != j {
                best = best.min(pair_min(&products[i], &products[j]));
            }
        }
    }
    for w in products.windows(2) {
        best = best.min(pair_min(&w[0], &w[1]));
    }
    Ok(Estimate {
        value: best.clamp(0.0, 1.0),
        kind: EstimateKind::UpperEstimateOfInf,
        samples: pts.len(),
    })
}

/// Lower estimate of the `k`-step Lipschitz constant
/// `sup ||P^(k)_mu(x, .) - P^(k)_nu(x, .)|| / ||mu - nu||`. Zero for kernels
/// with no distribution dependence.
pub fn lipschitz_lambda(
    kernel: &PolynomialKernel,
    k: usize,
    sampling: &SamplingConfig,
) -> Result<Estimate> {
    check_k(k)?;
    if kernel.is_linear() {
        return Ok(Estimate::exact(0.0));
    }
    let n = kernel.dim();
    let pts = probe_points(n, sampling)?;
    let products = pts
        .iter()
        .map(|mu| kstep_product(kernel, mu, k))
        .collect::<Result<Vec<_>>>()?;
    let ratio = |i: usize, j: usize| -> Result<f64> {
        let d = tv_distance(&pts[i], &pts[j])?;
        if d <= 1e-12 {
            return Ok(0.0);
        }
        let mut best = 0.0_f64;
        for x in 0..n {
            let num: f64 = (0..n)
                .map(|y| (products[i][(x, y)] - products[j][(x, y)]).abs())
                .sum();
            best = best.max(num / d);
        }
        Ok(best)
    };
    let mut best = 0.0_f64;
    for i in 0..=n {
        for j in (i + 1)..=n {
            best = best.max(ratio(i, j)?);
        }
    }
    for i in 1..pts.len() {
        best = best.max(ratio(i - 1, i)?);
    }
    Ok(Estimate {
        value: best,
        kind: EstimateKind::LowerEstimateOfSup,
        samples: pts.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaEstimate {
    pub gamma: f64,
    pub kind: EstimateKind,
    /// Entry and law at which the supremum was attained.
    pub row: usize,
    pub col: usize,
    pub mu: Vec<f64>,
}

/// Lower estimate of the smallest `gamma` with `C_1(x, y) / P_mu(x, y) <= 1 + gamma`.
/// Entries that are linear in the driving coordinate attain their extremes
/// at vertices, which are always probed.
pub fn gamma_estimate(kernel: &PolynomialKernel, sampling: &SamplingConfig) -> Result<GammaEstimate> {
    let n = kernel.dim();
    let linear = kernel.linear_part();
    let mut out = GammaEstimate {
        gamma: 0.0,
        kind: if kernel.is_linear() {
            EstimateKind::Exact
        } else {
            EstimateKind::LowerEstimateOfSup
        },
        row: 0,
        col: 0,
        mu: Distribution::uniform(n)?.into_vec(),
    };
    if kernel.is_linear() {
        return Ok(out);
    }
    for mu in probe_points(n, sampling)? {
        let m = kernel.evaluate(&mu)?;
        for x in 0..n {
            for y in 0..n {
                let base = linear.get(x, y);
                let here = m.get(x, y);
                if base <= 0.0 {
                    continue;
                }
                if here <= 0.0 {
                    return Err(Error::InfiniteGamma { row: x, col: y });
                }
                let g = base / here - 1.0;
                if g > out.gamma {
                    out.gamma = g;
                    out.row = x;
                    out.col = y;
                    out.mu = mu.probs().to_vec();
                }
            }
        }
    }
    Ok(out)
}

/// `||pi - pi*||` between the fixed point of the kernel and the stationary
/// law of its linear part; `force_zero` returns 0 without solving.
pub fn delta_estimate(
    kernel: &PolynomialKernel,
    tol: f64,
    max_iter: usize,
    force_zero: bool,
) -> Result<f64> {
    if force_zero {
        return Ok(0.0);
    }
    let pi = stationary(kernel, tol, max_iter).map_err(|e| e.labeled("nonlinear fixed point"))?;
    let pi_lin = stationary(&PolynomialKernel::linear(kernel.linear_part()), tol, max_iter)
        .map_err(|e| e.labeled("linear fixed point"))?;
    tv_distance(&pi.dist, &pi_lin.dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{builtin_example, example1_matrix};

    fn quick() -> SamplingConfig {
        SamplingConfig {
            samples: 2_000,
            seed: 1,
        }
    }

    #[test]
    fn example1_alpha_values() {
        let p = example1_matrix();
        let expected = [0.8, 0.3, 0.11, 0.04];
        for (k, e) in (1..=4).zip(expected) {
            let a = md_alpha_matrix(&p, k).unwrap();
            assert!((2.0 * (1.0 - a) - e).abs() < 0.005, "k={k} {a}");
        }
        assert!((md_alpha_matrix(&p, 1).unwrap() - 0.6).abs() < 1e-12);
        assert!(md_alpha_matrix(&p, 0).is_err());
    }

    #[test]
    fn identical_rows_have_full_overlap() {
        let r = vec![0.3, 0.3, 0.4];
        let p = StochasticMatrix::from_rows(&[r.clone(), r.clone(), r]).unwrap();
        for k in 1..4 {
            assert!((md_alpha_matrix(&p, k).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn alpha_is_monotone_in_k() {
        for id in [1, 2] {
            let p = builtin_example(id, 0.0).unwrap().linear_part();
            let alphas: Vec<f64> = (1..=6).map(|k| md_alpha_matrix(&p, k).unwrap()).collect();
            assert!(alphas.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{alphas:?}");
        }
    }

    #[test]
    fn nonlinear_alpha_is_below_linear() {
        let k = builtin_example(1, 0.1).unwrap();
        let est = md_alpha_kernel(&k, 1, &quick()).unwrap();
        assert_eq!(est.kind, EstimateKind::UpperEstimateOfInf);
        assert!(est.value <= 0.6 + 1e-12);
    }

    #[test]
    fn lipschitz_examples() {
        let lin = PolynomialKernel::linear(example1_matrix());
        assert_eq!(lipschitz_lambda(&lin, 1, &quick()).unwrap().value, 0.0);

        // Row 1 moves by 2 kappa |mu1 - nu1| <= kappa ||mu - nu||, attained at
        // vertex pairs.
        let l1 = lipschitz_lambda(&builtin_example(1, 0.1).unwrap(), 1, &quick()).unwrap();
        assert!(l1.value > 0.0 && l1.value <= 0.2);
        assert!((l1.value - 0.1).abs() < 1e-12);
        let l2 = lipschitz_lambda(&builtin_example(1, 0.2).unwrap(), 1, &quick()).unwrap();
        assert!((l2.value / l1.value - 2.0).abs() < 0.2);
    }

    #[test]
    fn gamma_examples() {
        let g = gamma_estimate(&builtin_example(1, 0.1).unwrap(), &quick()).unwrap();
        assert!((g.gamma - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!((g.row, g.col), (0, 0));
        assert_eq!(g.mu, vec![1.0, 0.0, 0.0, 0.0]);
        let g = gamma_estimate(&builtin_example(1, 0.2).unwrap(), &quick()).unwrap();
        assert!((g.gamma - 1.0).abs() < 1e-12);
        let g = gamma_estimate(&PolynomialKernel::linear(example1_matrix()), &quick()).unwrap();
        assert_eq!(g.gamma, 0.0);
    }

    #[test]
    fn gamma_infinite_when_kernel_vanishes() {
        let k = builtin_example(1, 0.4).unwrap();
        assert!(matches!(
            gamma_estimate(&k, &quick()),
            Err(Error::InfiniteGamma { row: 0, col: 0 })
        ));
    }

    #[test]
    fn delta_examples() {
        let lin = PolynomialKernel::linear(example1_matrix());
        assert!(delta_estimate(&lin, 1e-10, 100_000, false).unwrap() < 1e-9);
        let d = delta_estimate(&builtin_example(1, 0.1).unwrap(), 1e-10, 100_000, false).unwrap();
        assert!(d > 0.0 && d < 0.2, "{d}");
        assert_eq!(
            delta_estimate(&builtin_example(1, 0.1).unwrap(), 1e-10, 1, true).unwrap(),
            0.0
        );
    }
}
