//! Full coefficient report and bound curves for a nonlinear kernel.

use nmc_bounds::bounds::{full_report, ReportConfig};
use nmc_bounds::experiments::builtin_example;

fn main() -> nmc_bounds::Result<()> {
    let kernel = builtin_example(1, 0.1)?;
    let report = full_report(&kernel, 10, &ReportConfig::default())?;
    println!("{}", report.coefficients_json());
    print!("{}", report.to_table().to_csv());
    Ok(())
}
