//! Markov-Dobrushin coefficients of the Example 1 matrix and the bound they give.

use nmc_bounds::bounds::{md_alpha_matrix, md_bound_curve};
use nmc_bounds::experiments::example1_matrix;

fn main() -> nmc_bounds::Result<()> {
    let p = example1_matrix();
    for k in 1..=4 {
        let alpha = md_alpha_matrix(&p, k)?;
        println!("k={k}  alpha_k={alpha:.4}  2(1-alpha_k)={:.4}", 2.0 * (1.0 - alpha));
    }
    let curve = md_bound_curve(md_alpha_matrix(&p, 1)?, 0.0, 6)?;
    println!("one-step bound for n=1..6: {:.4?}", curve.values);
    Ok(())
}
