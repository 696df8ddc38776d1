use rayon::prelude::*;
use serde::Serialize;

use super::construction::{overlap_q, simulate_coupled_chain};
use crate::chain::{propagate, Distribution, PolynomialKernel, StochasticMatrix};
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::table::{fmt_num, Table};

/// Below this many samples the check is flagged as underpowered.
pub const MIN_POWERED_SAMPLES: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaThresholds {
    /// Maximum TV between an empirical marginal and its exact law.
    pub marginal_tv: f64,
    /// Maximum `|P^(equal) - q_t|`.
    pub equality_gap: f64,
    /// When false only the excess `P^(equal) - q_t` is held to
    /// `equality_gap`; a deficit is allowed (coupling inequality).
    pub two_sided: bool,
}

impl Default for LemmaThresholds {
    fn default() -> Self {
        LemmaThresholds {
            marginal_tv: 0.02,
            equality_gap: 0.01,
            two_sided: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaRow {
    pub t: usize,
    pub tv1: f64,
    pub tv2: f64,
    pub q_exact: f64,
    pub q_empirical: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub rows: Vec<LemmaRow>,
    pub samples: usize,
    pub seed: u64,
    pub thresholds: LemmaThresholds,
    pub max_marginal_tv: f64,
    /// Largest `q_empirical - q_exact` (positive: excess meeting).
    pub max_excess: f64,
    /// Largest `q_exact - q_empirical` (positive: deficit).
    pub max_deficit: f64,
    pub underpowered: bool,
    pub pass: bool,
}

impl LemmaReport {
    pub fn to_table(&self) -> Table {
        let mut table = Table::new(&["t", "tv1", "tv2", "q_exact", "q_empirical"]);
        for r in &self.rows {
            table.push(vec![
                r.t.to_string(),
                fmt_num(r.tv1),
                fmt_num(r.tv2),
                fmt_num(r.q_exact),
                fmt_num(r.q_empirical),
            ]);
        }
        table
    }
}

/// Monte-Carlo check of the coupled pair: empirical marginals of both
/// coordinates against exact propagation, and the empirical meeting
/// frequency against the exact overlap `q_t` of the two laws.
pub fn lemma_check(
    p: &StochasticMatrix,
    mu0: &Distribution,
    nu0: &Distribution,
    n: usize,
    samples: usize,
    seed: u64,
    thresholds: LemmaThresholds,
) -> Result<LemmaReport> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be positive".into()));
    }
    let dim = p.dim();
    let linear = PolynomialKernel::linear(p.clone());
    let law1 = propagate(&linear, mu0, n)?;
    let law2 = propagate(&linear, nu0, n)?;

    // counts[t] = (hist of x1, hist of x2, #equal)
    let zero = || vec![(vec![0u64; dim], vec![0u64; dim], 0u64); n + 1];
    let counts = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            simulate_coupled_chain(p, mu0, nu0, n, &mut rng)
        })
        .try_fold(zero, |mut acc, run| {
            let run = run?;
            for t in 0..=n {
                acc[t].0[run.x1[t]] += 1;
                acc[t].1[run.x2[t]] += 1;
                acc[t].2 += (run.x1[t] == run.x2[t]) as u64;
            }
            Ok::<_, Error>(acc)
        })
        .try_reduce(zero, |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                x.0.iter_mut().zip(y.0).for_each(|(u, v)| *u += v);
                x.1.iter_mut().zip(y.1).for_each(|(u, v)| *u += v);
                x.2 += y.2;
            }
            Ok(a)
        })?;

    let total = samples as f64;
    let tv_to = |hist: &[u64], law: &Distribution| -> f64 {
        hist.iter()
            .zip(law.probs())
            .map(|(c, p)| (*c as f64 / total - p).abs())
            .sum()
    };
    let mut rows = Vec::with_capacity(n + 1);
    for t in 0..=n {
        rows.push(LemmaRow {
            t,
            tv1: tv_to(&counts[t].0, &law1[t]),
            tv2: tv_to(&counts[t].1, &law2[t]),
            q_exact: overlap_q(&law1[t], &law2[t])?,
            q_empirical: counts[t].2 as f64 / total,
        });
    }

    let max_marginal_tv = rows.iter().map(|r| r.tv1.max(r.tv2)).fold(0.0, f64::max);
    let max_excess = rows
        .iter()
        .map(|r| r.q_empirical - r.q_exact)
        .fold(f64::NEG_INFINITY, f64::max);
    let max_deficit = rows
        .iter()
        .map(|r| r.q_exact - r.q_empirical)
        .fold(f64::NEG_INFINITY, f64::max);
    let gap = if thresholds.two_sided {
        max_excess.max(max_deficit)
    } else {
        max_excess
    };
    let pass = max_marginal_tv < thresholds.marginal_tv && gap < thresholds.equality_gap;
    Ok(LemmaReport {
        rows,
        samples,
        seed,
        thresholds,
        max_marginal_tv,
        max_excess,
        max_deficit,
        underpowered: samples < MIN_POWERED_SAMPLES,
        pass,
    })
}
