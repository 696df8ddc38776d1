use std::ops::Index;

use rand::Rng;
use rand_distr::{Distribution as _, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a probability vector.
pub const MASS_TOL: f64 = 1e-12;

/// Probability vector over `p >= 2` states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution(Vec<f64>);

impl Distribution {
    /// Validates nonnegativity and unit mass (within [`MASS_TOL`]).
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidDistribution(format!(
                "need at least 2 states, got {}",
                probs.len()
            )));
        }
        if let Some((i, v)) = probs
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "entry {i} is {v}, must be finite and >= 0"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}, not 1"
            )));
        }
        Ok(Distribution(probs))
    }

    /// Normalizes nonnegative weights with positive total.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be nonnegative with positive finite total".into(),
            ));
        }
        Distribution::new(weights.into_iter().map(|w| w / total).collect())
    }

    /// Accepts a vector whose mass drifted from 1 by floating-point error only,
    /// renormalizing it. Drift beyond `1e-9` is a caller bug.
    pub(crate) fn renormalized(mut probs: Vec<f64>) -> Result<Self> {
        for v in probs.iter_mut() {
            if *v < 0.0 && *v > -1e-12 {
                *v = 0.0;
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!(
                "mass drifted to {total}"
            )));
        }
        if (total - 1.0).abs() > MASS_TOL {
            probs.iter_mut().for_each(|v| *v /= total);
        }
        Distribution::new(probs)
    }

    pub fn uniform(p: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidDistribution(format!(
                "need at least 2 states, got {p}"
            )));
        }
        Ok(Distribution(vec![1.0 / p as f64; p]))
    }

    /// Point mass on `state` (0-based).
    pub fn vertex(p: usize, state: usize) -> Result<Self> {
        if state >= p {
            return Err(Error::InvalidArgument(format!(
                "state {state} out of range for p = {p}"
            )));
        }
        let mut v = vec![0.0; p];
        v[state] = 1.0;
        Distribution::new(v)
    }

    /// Flat (Dirichlet(1, ..., 1)) sample on the simplex, built from
    /// normalized unit-rate exponential draws.
    pub fn random<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidDistribution(format!(
                "need at least 2 states, got {p}"
            )));
        }
        let draws: Vec<f64> = (0..p).map(|_| Exp1.sample(rng)).collect();
        Distribution::from_weights(draws)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Draws a state index.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.0, rng)
    }
}

impl Index<usize> for Distribution {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Distribution::new(v)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Self {
        d.0
    }
}

/// Inverse-CDF draw from nonnegative weights summing to (about) one.
pub(crate) fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, w) in weights.iter().enumerate() {
        if *w > 0.0 {
            last_positive = i;
            acc += w;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

fn check_dims(a: &Distribution, b: &Distribution) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// Total-variation distance as the sum of absolute differences, so disjoint
/// supports give the maximum value 2.
pub fn tv_distance(a: &Distribution, b: &Distribution) -> Result<f64> {
    check_dims(a, b)?;
    Ok(a.0.iter().zip(&b.0).map(|(x, y)| (x - y).abs()).sum())
}

/// Overlap mass `sum_x min(a(x), b(x))`, equal to `1 - tv/2`.
pub fn overlap(a: &Distribution, b: &Distribution) -> Result<f64> {
    check_dims(a, b)?;
    Ok(a.0.iter().zip(&b.0).map(|(x, y)| x.min(*y)).sum())
}
