//! True distances from 500 random starts next to the bound curves.

use nmc_bounds::bounds::ReportConfig;
use nmc_bounds::experiments::{builtin_example, compare_bounds};

fn main() -> nmc_bounds::Result<()> {
    let kernel = builtin_example(2, 0.1)?;
    let cmp = compare_bounds(&kernel, 15, 500, 42, &ReportConfig::default())?;
    println!("stationary law: {:.4?}", cmp.envelope.stationary.probs());
    print!("{}", cmp.to_table().to_csv());
    Ok(())
}
