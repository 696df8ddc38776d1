//! Simulates a GARCH(1,1) series and recovers its parameters.

use nmc_bounds::volatility::{fit_garch11, simulate_garch, GarchModel};
use nmc_bounds::rng::stream;

fn main() -> nmc_bounds::Result<()> {
    let truth = GarchModel::new(0.0, 2e-6, 0.08, 0.87)?;
    let returns = simulate_garch(&truth, 3000, &mut stream(9));
    let fit = fit_garch11(&returns)?;
    print!("{}", fit.to_table().to_csv());
    println!(
        "persistence {:.4} (true {:.2}), log-likelihood {:.2}, converged {}",
        fit.model.persistence(),
        truth.persistence(),
        fit.log_likelihood,
        fit.converged
    );
    Ok(())
}
