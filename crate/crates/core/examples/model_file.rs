//! Round-trips a kernel through its JSON model format.

use nmc_bounds::chain::{flow_step, model_to_json, parse_model, Distribution};
use nmc_bounds::experiments::builtin_example;

fn main() -> nmc_bounds::Result<()> {
    let json = model_to_json(&builtin_example(1, 0.2)?);
    println!("{json}");
    let kernel = parse_model(&json)?;
    let mu = Distribution::uniform(kernel.dim())?;
    println!("one step from uniform: {:.4?}", flow_step(&kernel, &mu)?.probs());
    Ok(())
}
