//! Fits a 3-state Gaussian HMM by Baum-Welch and decodes the hidden path.

use nalgebra::DMatrix;
use nmc_bounds::ghmm::{fit_baum_welch, sample_ghmm, viterbi, FitConfig, GhmmModel};
use nmc_bounds::rng::stream;

fn main() -> nmc_bounds::Result<()> {
    let truth = GhmmModel::new(
        vec![1.0 / 3.0; 3],
        DMatrix::from_fn(3, 3, |i, j| if i == j { 0.9 } else { 0.05 }),
        vec![-0.02, 0.0, 0.02],
        vec![2.5e-5; 3],
    )?;
    let sample = sample_ghmm(&truth, 2000, &mut stream(1))?;
    let fit = fit_baum_welch(&sample.observations, &FitConfig::default(), &mut stream(2))?;
    println!("log-likelihood trace: {:.2?}", fit.trace);
    println!("means: {:.4?}", fit.model.means());
    println!("transition:\n{:.3}", fit.model.transition());
    let path = viterbi(&fit.model, &sample.observations)?;
    println!("first 30 decoded states: {:?}", &path[..30]);
    Ok(())
}
