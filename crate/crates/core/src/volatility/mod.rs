//! TV volatility: the one-step spectral bound of a Gaussian-HMM hidden chain
//! fitted on sliding windows of returns, with a GARCH(1,1) baseline.

mod garch;
mod simplex;

pub use garch::{
    fit_garch11, garch_conditional_vol, simulate_garch, GarchFit, GarchModel, BOUNDARY_PERSISTENCE,
};
pub use simplex::{nelder_mead, SimplexOptions, SimplexResult};

use chrono::NaiveDate;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{theorem2_bound, TV_MAX};
use crate::coupling::{build_coupling_matrix, spectral_radius, DEFAULT_POWER_CAP};
use crate::error::{Error, Result};
use crate::ghmm::{fit_baum_welch, FitConfig, InitPolicy};
use crate::rng::{mix_seed, stream};
use crate::signal::{denoise, log_returns, PriceSeries, ReturnSeries, WaveletSpec};
use crate::table::{fmt_num, Table};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolatilityConfig {
    pub windows: Vec<usize>,
    pub reps: usize,
    pub n_states: usize,
    pub epochs: usize,
    /// Exponent `n` in `2 (1 - 1/p) (r + eps)^n`.
    pub exponent: u32,
    pub eps_override: Option<f64>,
    pub seed: u64,
}

impl Default for VolatilityConfig {
    fn default() -> Self {
        VolatilityConfig {
            windows: vec![60, 65, 70, 75, 80],
            reps: 10,
            n_states: 3,
            epochs: 15,
            exponent: 1,
            eps_override: None,
            seed: 0x7f0_1a71,
        }
    }
}

impl VolatilityConfig {
    /// Window lengths `min, min + step, ..` up to `max`.
    pub fn window_range(min: usize, max: usize, step: usize) -> Result<Vec<usize>> {
        if step == 0 || min > max {
            return Err(Error::InvalidArgument(format!(
                "bad window range {min}..={max} step {step}"
            )));
        }
        Ok((min..=max).step_by(step).collect())
    }

    pub fn validate(&self, series_len: usize) -> Result<()> {
        if self.windows.is_empty() {
            return Err(Error::InvalidArgument("no window lengths".into()));
        }
        if self.reps == 0 {
            return Err(Error::InvalidArgument("reps must be >= 1".into()));
        }
        if self.n_states < 2 {
            return Err(Error::InvalidArgument("n_states must be >= 2".into()));
        }
        if let Some(e) = self.eps_override {
            if !(e.is_finite() && e >= 0.0) {
                return Err(Error::InvalidArgument(format!("eps = {e} must be >= 0")));
            }
        }
        for &l in &self.windows {
            if l < 20 || l > series_len {
                return Err(Error::InvalidArgument(format!(
                    "window length {l} outside [20, {series_len}]"
                )));
            }
            if l < 10 * self.n_states {
                return Err(Error::InvalidArgument(format!(
                    "window length {l} too short for {} states",
                    self.n_states
                )));
            }
        }
        Ok(())
    }

    fn max_window(&self) -> usize {
        self.windows.iter().copied().max().unwrap_or(0)
    }
}

/// Indicator `2 (1 - 1/p) (r + eps)^n`, clamped to `[0, 2]`.
pub fn tv_indicator(r: f64, eps: f64, p: usize, exponent: u32) -> Result<f64> {
    Ok((theorem2_bound(p)? * (r + eps).powi(exponent as i32)).clamp(0.0, TV_MAX))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolatilitySeries {
    pub dates: Vec<NaiveDate>,
    pub tv_mean: Vec<f64>,
    /// Sample standard deviation over all (length, rep) fits.
    pub tv_std: Vec<f64>,
    /// `tv_mean -/+ 1.96 tv_std / sqrt(reps)`.
    pub tv_ci_lo: Vec<f64>,
    pub tv_ci_hi: Vec<f64>,
    /// Number of fits at the date that hit state starvation or the emission floor.
    pub flagged_fits: Vec<usize>,
}

impl VolatilitySeries {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

struct FitOutcome {
    value: f64,
    flagged: bool,
}

fn window_indicator(window: &[f64], config: &VolatilityConfig, seed: u64) -> Result<FitOutcome> {
    let fit_config = FitConfig {
        n_states: config.n_states,
        epochs: config.epochs,
        init: InitPolicy::Random,
    };
    let fit = fit_baum_welch(window, &fit_config, &mut stream(seed))?;
    let m = build_coupling_matrix(&fit.model.transition_matrix()?);
    let est = spectral_radius(&m, DEFAULT_POWER_CAP)?;
    let eps = config.eps_override.unwrap_or(est.residual);
    Ok(FitOutcome {
        value: tv_indicator(est.radius, eps, config.n_states, config.exponent)?,
        flagged: !fit.starved.is_empty() || fit.emission_floored,
    })
}

/// For every return index `t` with a full window of the longest length,
/// fits each (length, rep) window ending at `t` from a random start and
/// aggregates the indicator.
pub fn tv_volatility(returns: &ReturnSeries, config: &VolatilityConfig) -> Result<VolatilitySeries> {
    config.validate(returns.len())?;
    let first = config.max_window() - 1;
    let dates_n = returns.len() - first;
    let lens = config.windows.len();
    let per_date = lens * config.reps;
    let values = &returns.values;

    let outcomes: Vec<FitOutcome> = (0..dates_n * per_date)
        .into_par_iter()
        .map(|task| {
            let t = first + task / per_date;
            let l = config.windows[(task % per_date) / config.reps];
            window_indicator(&values[t + 1 - l..=t], config, mix_seed(config.seed, task as u64))
                .map_err(|e| e.labeled(format!("window of {l} ending {}", returns.dates[t])))
        })
        .collect::<Result<_>>()?;

    let mut out = VolatilitySeries {
        dates: returns.dates[first..].to_vec(),
        tv_mean: Vec::with_capacity(dates_n),
        tv_std: Vec::with_capacity(dates_n),
        tv_ci_lo: Vec::with_capacity(dates_n),
        tv_ci_hi: Vec::with_capacity(dates_n),
        flagged_fits: Vec::with_capacity(dates_n),
    };
    let half = 1.96 / (config.reps as f64).sqrt();
    for chunk in outcomes.chunks(per_date) {
        let k = chunk.len() as f64;
        let mean = chunk.iter().map(|o| o.value).sum::<f64>() / k;
        let std = if chunk.len() > 1 {
            (chunk.iter().map(|o| (o.value - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        } else {
            0.0
        };
        out.tv_mean.push(mean);
        out.tv_std.push(std);
        out.tv_ci_lo.push((mean - half * std).max(0.0));
        out.tv_ci_hi.push((mean + half * std).min(TV_MAX));
        out.flagged_fits.push(chunk.iter().filter(|o| o.flagged).count());
    }
    Ok(out)
}

fn min_max(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .map(|v| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
        .collect()
}

pub const COMPARISON_HEADER: [&str; 12] = [
    "date",
    "sq_return",
    "garch_sigma",
    "tv_mean",
    "tv_std",
    "tv_ci_lo",
    "tv_ci_hi",
    "sq_return_norm",
    "garch_sigma_norm",
    "tv_mean_norm",
    "tv_std_norm",
    "flagged_fits",
];

/// Per-date comparison on the dates covered by `tv`. The `_norm` columns are
/// min-max scaled over the rows of the table.
pub fn comparison_table(returns: &ReturnSeries, tv: &VolatilitySeries, garch_sigma: &[f64]) -> Result<Table> {
    if garch_sigma.len() != returns.len() {
        return Err(Error::DimensionMismatch {
            expected: returns.len(),
            found: garch_sigma.len(),
        });
    }
    if tv.is_empty() {
        return Err(Error::InvalidArgument("no volatility dates to compare".into()));
    }
    let offset = returns
        .dates
        .iter()
        .position(|d| *d == tv.dates[0])
        .ok_or_else(|| Error::InvalidArgument("volatility dates do not overlap the returns".into()))?;
    if offset + tv.len() > returns.len() || returns.dates[offset..offset + tv.len()] != tv.dates[..] {
        return Err(Error::InvalidArgument("volatility dates misaligned with returns".into()));
    }
    let sq: Vec<f64> = returns.values[offset..offset + tv.len()].iter().map(|r| r * r).collect();
    let sigma = &garch_sigma[offset..offset + tv.len()];
    let norms = [min_max(&sq), min_max(sigma), min_max(&tv.tv_mean), min_max(&tv.tv_std)];

    let mut t = Table::new(&COMPARISON_HEADER);
    for i in 0..tv.len() {
        t.push(vec![
            tv.dates[i].to_string(),
            fmt_num(sq[i]),
            fmt_num(sigma[i]),
            fmt_num(tv.tv_mean[i]),
            fmt_num(tv.tv_std[i]),
            fmt_num(tv.tv_ci_lo[i]),
            fmt_num(tv.tv_ci_hi[i]),
            fmt_num(norms[0][i]),
            fmt_num(norms[1][i]),
            fmt_num(norms[2][i]),
            fmt_num(norms[3][i]),
            tv.flagged_fits[i].to_string(),
        ]);
    }
    Ok(t)
}

/// Which returns feed the hidden-chain fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ReturnSource {
    #[default]
    Denoised,
    Raw,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub returns: ReturnSeries,
    pub tv: VolatilitySeries,
    pub garch: GarchFit,
    pub garch_sigma: Vec<f64>,
    pub table: Table,
    pub wavelet_warning: Option<String>,
}

/// Denoise, take log returns, run the sliding-window indicator and the
/// GARCH baseline on the same returns.
pub fn volatility_pipeline(
    prices: &PriceSeries,
    wavelet: &WaveletSpec,
    source: ReturnSource,
    config: &VolatilityConfig,
) -> Result<PipelineOutput> {
    let (returns, wavelet_warning) = match source {
        ReturnSource::Denoised => {
            let d = denoise(prices, wavelet)?;
            (log_returns(&d.prices), d.warning)
        }
        ReturnSource::Raw => (log_returns(prices), None),
    };
    let tv = tv_volatility(&returns, config)?;
    let garch = fit_garch11(&returns.values)?;
    let garch_sigma = garch_conditional_vol(&garch.model, &returns.values)?;
    let table = comparison_table(&returns, &tv, &garch_sigma)?;
    Ok(PipelineOutput {
        returns,
        tv,
        garch,
        garch_sigma,
        table,
        wavelet_warning,
    })
}

/// Log-normal price path whose daily return volatility switches from
/// `sigma_low` to `sigma_high` after `n_low` days.
pub fn two_regime_prices(n_low: usize, n_high: usize, sigma_low: f64, sigma_high: f64, seed: u64) -> Result<PriceSeries> {
    let mut rng = stream(seed);
    let mut log_price = 100f64.ln();
    let mut close = Vec::with_capacity(n_low + n_high + 1);
    close.push(log_price.exp());
    for t in 0..n_low + n_high {
        let s = if t < n_low { sigma_low } else { sigma_high };
        log_price += s * rng.sample::<f64, _>(StandardNormal);
        close.push(log_price.exp());
    }
    PriceSeries::daily(NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date"), close)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeCheck {
    pub mean_low: f64,
    pub mean_high: f64,
    /// Share of high-regime dates whose indicator exceeds the low-regime mean.
    pub high_share_above_low_mean: f64,
    pub pass: bool,
}

/// Compares the indicator before and after `break_date`. Passes when the
/// high regime has the larger mean and more than half of its dates sit above
/// the low-regime mean.
pub fn regime_check(tv: &VolatilitySeries, break_date: NaiveDate) -> Result<RegimeCheck> {
    let (mut low, mut high) = (Vec::new(), Vec::new());
    for (d, v) in tv.dates.iter().zip(&tv.tv_mean) {
        if *d < break_date {
            low.push(*v);
        } else {
            high.push(*v);
        }
    }
    if low.is_empty() || high.is_empty() {
        return Err(Error::InvalidArgument("break date leaves a regime empty".into()));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mean_low, mean_high) = (mean(&low), mean(&high));
    let share = high.iter().filter(|v| **v > mean_low).count() as f64 / high.len() as f64;
    Ok(RegimeCheck {
        mean_low,
        mean_high,
        high_share_above_low_mean: share,
        pass: mean_high > mean_low && share > 0.5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> VolatilityConfig {
        VolatilityConfig {
            windows: vec![60, 70],
            reps: 2,
            ..VolatilityConfig::default()
        }
    }

    #[test]
    fn indicator_values() {
        assert_eq!(tv_indicator(0.0, 0.0, 3, 1).unwrap(), 0.0);
        assert!((tv_indicator(0.5, 0.0, 3, 1).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(tv_indicator(1.5, 0.0, 3, 1).unwrap(), 2.0);
        assert!((tv_indicator(0.5, 0.0, 3, 2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn config_checks() {
        let c = VolatilityConfig::default();
        assert!(c.validate(100).is_ok());
        assert!(c.validate(79).is_err());
        assert_eq!(VolatilityConfig::window_range(60, 80, 5).unwrap(), c.windows);
        let mut c = small();
        c.reps = 0;
        assert!(c.validate(100).is_err());
    }

    #[test]
    fn series_is_deterministic_and_bounded() {
        let prices = two_regime_prices(120, 60, 0.005, 0.03, 1).unwrap();
        let r = log_returns(&prices);
        let cfg = VolatilityConfig {
            reps: 1,
            seed: 9,
            ..small()
        };
        let a = tv_volatility(&r, &cfg).unwrap();
        let b = tv_volatility(&r, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), r.len() - 69);
        for i in 0..a.len() {
            assert!((0.0..=2.0).contains(&a.tv_mean[i]) && a.tv_std[i] >= 0.0);
            assert!(a.tv_ci_lo[i] <= a.tv_mean[i] && a.tv_mean[i] <= a.tv_ci_hi[i]);
        }
    }

    #[test]
    fn comparison_table_shape() {
        let prices = two_regime_prices(100, 50, 0.005, 0.03, 2).unwrap();
        let out = volatility_pipeline(&prices, &WaveletSpec::default(), ReturnSource::Denoised, &small()).unwrap();
        let t = &out.table;
        assert_eq!(t.header, COMPARISON_HEADER);
        assert_eq!(t.rows.len(), out.tv.len());
        for name in ["sq_return_norm", "garch_sigma_norm", "tv_mean_norm", "tv_std_norm"] {
            assert!(t.numbers(name).unwrap().iter().all(|v| (0.0..=1.0).contains(v)));
        }
        let empty = VolatilitySeries {
            dates: vec![],
            tv_mean: vec![],
            tv_std: vec![],
            tv_ci_lo: vec![],
            tv_ci_hi: vec![],
            flagged_fits: vec![],
        };
        assert!(comparison_table(&out.returns, &empty, &out.garch_sigma).is_err());
    }
}
