//! Built-in example chains and Monte-Carlo envelopes of the true distance to
//! the fixed point, tabulated against the bound curves.

mod builtin;

pub use builtin::{
    builtin_example, builtin_example_variant, example1_matrix, example2_matrix, Example2Variant,
};

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{full_report, BoundReport, ReportConfig};
use crate::chain::{
    load_model, propagate, stationary, tv_distance, Distribution, PolynomialKernel,
    DEFAULT_STATIONARY_MAX_ITER, DEFAULT_STATIONARY_TOL,
};
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::table::{fmt_num, Table};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSource {
    Example(u8),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub source: ModelSource,
    pub kappa: f64,
    pub trials: usize,
    pub steps: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if let ModelSource::Example(_) = self.source {
            if !(0.0..=0.25).contains(&self.kappa) {
                return Err(Error::InvalidArgument(format!(
                    "kappa = {} outside [0, 0.25] for built-in examples",
                    self.kappa
                )));
            }
        }
        if self.trials == 0 || self.steps == 0 {
            return Err(Error::InvalidArgument("trials and steps must be >= 1".into()));
        }
        Ok(())
    }

    pub fn kernel(&self) -> Result<PolynomialKernel> {
        self.validate()?;
        match &self.source {
            ModelSource::Example(id) => builtin_example(*id, self.kappa),
            ModelSource::File(path) => load_model(path),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeRow {
    pub n: usize,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Envelope {
    /// Rows for `n = 0..=steps`.
    pub rows: Vec<EnvelopeRow>,
    pub stationary: Distribution,
    pub trials: usize,
}

/// Propagates `trials` random initial laws (or the single `initial` law when
/// given) exactly and records `||mu_n - pi||` for `n = 0..=steps`.
pub fn tv_envelope(
    kernel: &PolynomialKernel,
    trials: usize,
    steps: usize,
    seed: u64,
    initial: Option<&Distribution>,
) -> Result<Envelope> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    let pi = stationary(kernel, DEFAULT_STATIONARY_TOL, DEFAULT_STATIONARY_MAX_ITER)?.dist;
    let p = kernel.dim();
    let paths: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mu0 = match initial {
                Some(mu) => mu.clone(),
                None => Distribution::random(p, &mut substream(seed, i as u64))?,
            };
            propagate(kernel, &mu0, steps)?
                .iter()
                .map(|mu| tv_distance(mu, &pi))
                .collect()
        })
        .collect::<Result<_>>()?;

    let rows = (0..=steps)
        .map(|n| {
            let col = paths.iter().map(|path| path[n]);
            let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
            for v in col {
                lo = lo.min(v);
                hi = hi.max(v);
                sum += v;
            }
            EnvelopeRow {
                n,
                min: lo,
                mean: (sum / trials as f64).clamp(lo, hi),
                max: hi,
            }
        })
        .collect();
    Ok(Envelope {
        rows,
        stationary: pi,
        trials,
    })
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub envelope: Envelope,
    pub report: BoundReport,
}

impl Comparison {
    /// Columns: n, envelope min/mean/max, md, spectral, theorem4_small,
    /// theorem4_large; rows `n = 1..=steps`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&[
            "n",
            "env_min",
            "env_mean",
            "env_max",
            "md",
            "spectral",
            "theorem4_small",
            "theorem4_large",
        ]);
        let curve = |name: &str| self.report.curve(name).expect("curve present");
        for row in self.envelope.rows.iter().skip(1) {
            let n = row.n;
            t.push(vec![
                n.to_string(),
                fmt_num(row.min),
                fmt_num(row.mean),
                fmt_num(row.max),
                fmt_num(curve("md").at(n)),
                fmt_num(curve("spectral").at(n)),
                fmt_num(curve("theorem4_small").at(n)),
                fmt_num(curve("theorem4_large").at(n)),
            ]);
        }
        t
    }
}

/// True-distance envelope next to the bound curves.
pub fn compare_bounds(
    kernel: &PolynomialKernel,
    steps: usize,
    trials: usize,
    seed: u64,
    config: &ReportConfig,
) -> Result<Comparison> {
    let envelope = tv_envelope(kernel, trials, steps, seed, None)?;
    let report = full_report(kernel, steps, config)?;
    Ok(Comparison { envelope, report })
}

/// Writes a table as CSV (header row, LF endings) without leaving a partial
/// file behind on failure.
pub fn export_report(table: &Table, path: impl AsRef<Path>) -> Result<()> {
    table.write(path)
}
