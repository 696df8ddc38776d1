//! TV volatility on a synthetic series whose volatility jumps halfway.

use nmc_bounds::signal::WaveletSpec;
use nmc_bounds::volatility::{
    regime_check, two_regime_prices, volatility_pipeline, ReturnSource, VolatilityConfig,
};

fn main() -> nmc_bounds::Result<()> {
    let prices = two_regime_prices(400, 400, 0.005, 0.03, 1)?;
    let config = VolatilityConfig {
        reps: 3,
        ..VolatilityConfig::default()
    };
    let out = volatility_pipeline(&prices, &WaveletSpec::default(), ReturnSource::Raw, &config)?;
    let check = regime_check(&out.tv, prices.dates()[401])?;
    println!("{check:?}");
    println!(
        "garch: alpha1 {:.3}, beta1 {:.3}",
        out.garch.model.alpha1, out.garch.model.beta1
    );
    for row in out.table.rows.iter().step_by(100) {
        println!("{}", row.join(","));
    }
    Ok(())
}
