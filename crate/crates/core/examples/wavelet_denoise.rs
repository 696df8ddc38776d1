//! Soft-threshold db8 denoising of a noisy sine.

use nmc_bounds::signal::{denoise_signal, WaveletSpec};
use nmc_bounds::rng::stream;
use rand::Rng;
use rand_distr::StandardNormal;

fn main() -> nmc_bounds::Result<()> {
    let mut rng = stream(3);
    let clean: Vec<f64> = (0..512).map(|i| (i as f64 / 40.0).sin()).collect();
    let noisy: Vec<f64> = clean
        .iter()
        .map(|c| c + 0.2 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let out = denoise_signal(&noisy, &WaveletSpec::default())?;
    let rmse = |x: &[f64]| {
        (x.iter().zip(&clean).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / x.len() as f64).sqrt()
    };
    println!("levels {}, threshold {:.4}", out.levels, out.threshold);
    println!("rmse noisy {:.4}, denoised {:.4}", rmse(&noisy), rmse(&out.signal));
    Ok(())
}
