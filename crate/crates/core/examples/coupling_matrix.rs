//! Builds the coupling matrix of a chain and estimates its spectral radius.

use nmc_bounds::bounds::spectral_curve;
use nmc_bounds::coupling::{build_coupling_matrix, matrix_one_norm, spectral_radius, DEFAULT_POWER_CAP};
use nmc_bounds::experiments::{example1_matrix, example2_matrix};

fn main() -> nmc_bounds::Result<()> {
    for (name, p) in [("example 1", example1_matrix()), ("example 2", example2_matrix())] {
        let m = build_coupling_matrix(&p);
        let est = spectral_radius(&m, DEFAULT_POWER_CAP)?;
        let curve = spectral_curve(est.radius, est.residual, p.dim(), 5)?;
        println!(
            "{name}: {} pairs, ||M||_1 = {:.4}, r(M) = {:.6} (residual {:.1e})",
            m.dim(),
            matrix_one_norm(&m),
            est.radius,
            est.residual
        );
        println!("  2(1-1/p)(r+eps)^n, n=1..5: {:.4?}", curve.values);
    }
    Ok(())
}
