//! Price ingestion, db8 wavelet denoising, log returns and the descriptive
//! statistics table (moments, Kolmogorov-Smirnov, Ljung-Box).

mod prices;
pub mod special;
mod stats;
mod wavelet;

pub use prices::{
    load_prices, load_prices_with, log_returns, parse_prices, PriceColumns, PriceSeries,
    ReturnSeries,
};
pub use stats::{
    autocorrelation, descriptive_stats, ks_test, ljung_box, stars, Descriptive, KsResult, LjungBox,
    DEFAULT_LB_LAGS, DEGENERATE_SPREAD,
};
pub use wavelet::{
    default_levels, denoise_signal, dwt, idwt, max_levels, shrink, Denoised, Pyramid, Threshold,
    WaveletFamily, WaveletSpec, DB8, MIN_LEVEL_LEN,
};

use crate::error::{Error, Result};
use crate::table::{fmt_num, Table};

/// Denoised prices plus the removed component `input - output`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenoisedPrices {
    pub prices: PriceSeries,
    pub noise: Vec<f64>,
    pub threshold: f64,
    pub levels: usize,
    pub warning: Option<String>,
}

pub fn denoise(prices: &PriceSeries, spec: &WaveletSpec) -> Result<DenoisedPrices> {
    let out = denoise_signal(prices.close(), spec)?;
    if let Some(v) = out.signal.iter().find(|v| **v <= 0.0) {
        return Err(Error::Degenerate(format!(
            "denoised price {v} is not positive"
        )));
    }
    Ok(DenoisedPrices {
        prices: PriceSeries::new(prices.dates().to_vec(), out.signal)?,
        noise: out.noise,
        threshold: out.threshold,
        levels: out.levels,
        warning: out.warning,
    })
}

/// One row of the descriptive table.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsRow {
    pub label: String,
    pub descriptive: Descriptive,
    /// `None` when the series is degenerate.
    pub ks: Option<KsResult>,
    pub lb: Option<LjungBox>,
}

pub fn stats_row(label: &str, x: &[f64]) -> Result<StatsRow> {
    let descriptive = descriptive_stats(x)?;
    let (ks, lb) = if descriptive.degenerate {
        (None, None)
    } else {
        (Some(ks_test(x)?), Some(ljung_box(x, DEFAULT_LB_LAGS)?))
    };
    Ok(StatsRow {
        label: label.to_string(),
        descriptive,
        ks,
        lb,
    })
}

pub const STATS_HEADER: [&str; 10] = [
    "type", "mean", "std", "skewness", "kurtosis", "ks_stat", "ks_stars", "lb_q", "lb_stars",
    "degenerate",
];

pub fn stats_table(rows: &[StatsRow]) -> Table {
    let mut t = Table::new(&STATS_HEADER);
    for r in rows {
        let d = &r.descriptive;
        t.push(vec![
            r.label.clone(),
            fmt_num(d.mean),
            fmt_num(d.std),
            fmt_num(d.skewness),
            fmt_num(d.kurtosis),
            r.ks.map_or("nan".into(), |k| fmt_num(k.statistic)),
            r.ks.map_or(String::new(), |k| k.stars.to_string()),
            r.lb.map_or("nan".into(), |l| fmt_num(l.q)),
            r.lb.map_or(String::new(), |l| l.stars.to_string()),
            d.degenerate.to_string(),
        ]);
    }
    t
}

/// Rows `label` (raw returns), `label*` (denoised returns) and `noise`
/// (removed price component).
pub fn return_stats(label: &str, prices: &PriceSeries, spec: &WaveletSpec) -> Result<(Vec<StatsRow>, DenoisedPrices)> {
    let denoised = denoise(prices, spec)?;
    let raw = log_returns(prices);
    let smooth = log_returns(&denoised.prices);
    let rows = vec![
        stats_row(label, &raw.values)?,
        stats_row(&format!("{label}*"), &smooth.values)?,
        stats_row("noise", &denoised.noise)?,
    ];
    Ok((rows, denoised))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use chrono::NaiveDate;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn walk(n: usize, seed: u64) -> PriceSeries {
        let mut rng = stream(seed);
        let mut s = 100.0;
        let close = (0..n)
            .map(|_| {
                s *= (0.01 * rng.sample::<f64, _>(StandardNormal)).exp();
                s
            })
            .collect();
        PriceSeries::daily(NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(), close).unwrap()
    }

    #[test]
    fn constant_prices_are_unchanged() {
        let p = PriceSeries::daily(NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(), vec![42.0; 100]).unwrap();
        let d = denoise(&p, &WaveletSpec::default()).unwrap();
        assert!(d.noise.iter().all(|v| v.abs() < 1e-9));
        let (rows, _) = return_stats("X", &p, &WaveletSpec::default()).unwrap();
        assert!(rows.iter().all(|r| r.descriptive.degenerate));
        let t = stats_table(&rows);
        assert_eq!(t.rows.len(), 3);
    }

    #[test]
    fn lognormal_walk_table() {
        let (rows, _) = return_stats("TSLA", &walk(754, 3), &WaveletSpec::default()).unwrap();
        let labels: Vec<_> = rows.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, ["TSLA", "TSLA*", "noise"]);
        let t = stats_table(&rows);
        for name in ["mean", "std", "skewness", "kurtosis", "ks_stat", "lb_q"] {
            assert!(t.numbers(name).unwrap().iter().all(|v| v.is_finite()), "{name}");
        }
        // Smoothing strips high-frequency variation.
        assert!(rows[1].descriptive.std < rows[0].descriptive.std);
    }

    #[test]
    fn second_pass_changes_less() {
        for seed in 0..20 {
            let p = walk(300, seed);
            let once = denoise(&p, &WaveletSpec::default()).unwrap();
            let twice = denoise(&once.prices, &WaveletSpec::default()).unwrap();
            let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
            assert!(norm(&twice.noise) < norm(&once.noise), "seed {seed}");
        }
    }
}
