//! Descriptive statistics, KS and Ljung-Box tests for raw returns, denoised
//! returns and the removed noise of a simulated price path.

use chrono::NaiveDate;
use nmc_bounds::signal::{return_stats, stats_table, PriceSeries, WaveletSpec};
use nmc_bounds::volatility::{simulate_garch, GarchModel};
use nmc_bounds::rng::stream;

fn main() -> nmc_bounds::Result<()> {
    let model = GarchModel::new(0.0005, 4e-6, 0.1, 0.85)?;
    let returns = simulate_garch(&model, 754, &mut stream(5));
    let mut close = vec![100.0];
    for r in &returns {
        close.push(close.last().unwrap() * r.exp());
    }
    let prices = PriceSeries::daily(NaiveDate::from_ymd_opt(2021, 1, 4).unwrap(), close)?;
    let (rows, _) = return_stats("SIM", &prices, &WaveletSpec::default())?;
    print!("{}", stats_table(&rows).to_csv());
    Ok(())
}
