use serde::Serialize;

use super::special::{chi2_sf, kolmogorov_sf, normal_cdf};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Descriptive {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator).
    pub std: f64,
    /// `m3 / m2^(3/2)`; NaN when degenerate.
    pub skewness: f64,
    /// Excess kurtosis `m4 / m2^2 - 3`; NaN when degenerate.
    pub kurtosis: f64,
    /// Zero spread, so the shape statistics are undefined.
    pub degenerate: bool,
}

/// Spread (relative to `max(1, |mean|)`) below which a series counts as constant.
pub const DEGENERATE_SPREAD: f64 = 1e-10;

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn descriptive_stats(x: &[f64]) -> Result<Descriptive> {
    if x.len() < 4 {
        return Err(Error::TooShort {
            needed: 4,
            found: x.len(),
        });
    }
    let n = x.len() as f64;
    let m = mean(x);
    let central = |k: i32| x.iter().map(|v| (v - m).powi(k)).sum::<f64>() / n;
    let (m2, m3, m4) = (central(2), central(3), central(4));
    let std = (m2 * n / (n - 1.0)).sqrt();
    let degenerate = m2.sqrt() <= DEGENERATE_SPREAD * m.abs().max(1.0);
    let (skewness, kurtosis) = if degenerate {
        (f64::NAN, f64::NAN)
    } else {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    };
    Ok(Descriptive {
        n: x.len(),
        mean: m,
        std: if degenerate { 0.0 } else { std },
        skewness,
        kurtosis,
        degenerate,
    })
}

/// Significance stars: `***` for p < 0.005, `**` for p < 0.01, `*` for p < 0.05.
pub fn stars(p: f64) -> &'static str {
    if p < 0.005 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub stars: &'static str,
}

/// One-sample Kolmogorov-Smirnov test against the normal law with the sample
/// mean and standard deviation. Estimating the parameters makes the
/// asymptotic p-value conservative in statistic but anti-conservative in
/// interpretation (Lilliefors); it is reported as is.
pub fn ks_test(x: &[f64]) -> Result<KsResult> {
    if x.len() < 8 {
        return Err(Error::TooShort {
            needed: 8,
            found: x.len(),
        });
    }
    let d = descriptive_stats(x)?;
    if d.degenerate {
        return Err(Error::Degenerate("standard deviation is zero".into()));
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let statistic = sorted
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let f = normal_cdf((v - d.mean) / d.std);
            (f - i as f64 / n).max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max)
        .clamp(0.0, 1.0);
    let sqrt_n = n.sqrt();
    let p_value = kolmogorov_sf((sqrt_n + 0.12 + 0.11 / sqrt_n) * statistic);
    Ok(KsResult {
        statistic,
        p_value,
        stars: stars(p_value),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LjungBox {
    pub q: f64,
    pub lags: usize,
    pub p_value: f64,
    pub stars: &'static str,
}

pub const DEFAULT_LB_LAGS: usize = 12;

/// Sample autocorrelation at lags `1..=max_lag`.
pub fn autocorrelation(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let m = mean(x);
    let denom: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
    if denom <= 0.0 {
        return Err(Error::Degenerate("series has zero variance".into()));
    }
    Ok((1..=max_lag)
        .map(|k| {
            x[k..]
                .iter()
                .zip(x)
                .map(|(a, b)| (a - m) * (b - m))
                .sum::<f64>()
                / denom
        })
        .collect())
}

/// Ljung-Box portmanteau test `Q = n (n + 2) sum rho_k^2 / (n - k)` with a
/// chi-square reference on `max_lag` degrees of freedom.
pub fn ljung_box(x: &[f64], max_lag: usize) -> Result<LjungBox> {
    if max_lag == 0 {
        return Err(Error::InvalidArgument("max_lag must be >= 1".into()));
    }
    if x.len() <= max_lag + 1 {
        return Err(Error::TooShort {
            needed: max_lag + 2,
            found: x.len(),
        });
    }
    let n = x.len() as f64;
    let rho = autocorrelation(x, max_lag)?;
    let q = n
        * (n + 2.0)
        * rho
            .iter()
            .enumerate()
            .map(|(i, r)| r * r / (n - (i + 1) as f64))
            .sum::<f64>();
    let p_value = chi2_sf(q, max_lag as f64);
    Ok(LjungBox {
        q,
        lags: max_lag,
        p_value,
        stars: stars(p_value),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, substream};
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = stream(seed);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn fixture_against_direct_sums() {
        let x = [0.1, -0.4, 0.25, 0.9, -1.2, 0.05, 0.3];
        let d = descriptive_stats(&x).unwrap();
        // numpy / scipy.stats (bias=True moments)
        assert!(d.mean.abs() < 1e-15);
        assert!((d.std - 0.6551081335677849).abs() < 1e-10);
        assert!((d.skewness - -0.6526252762710708).abs() < 1e-10);
        assert!((d.kurtosis - -0.0784220944481091).abs() < 1e-10);
    }

    #[test]
    fn symmetric_series_has_no_skew() {
        let x = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        assert!(descriptive_stats(&x).unwrap().skewness.abs() < 1e-15);
    }

    #[test]
    fn constant_is_degenerate() {
        let d = descriptive_stats(&[2.0; 10]).unwrap();
        assert!(d.degenerate && d.std == 0.0 && d.skewness.is_nan());
        assert!(ks_test(&[2.0; 10]).is_err());
        assert!(descriptive_stats(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn normal_kurtosis_near_zero() {
        let d = descriptive_stats(&normals(100_000, 5)).unwrap();
        assert!(d.kurtosis.abs() < 0.1 && d.skewness.abs() < 0.05);
    }

    #[test]
    fn ks_flags_heavy_tails() {
        let x: Vec<f64> = normals(754, 6).iter().map(|v| v.powi(3)).collect();
        let r = ks_test(&x).unwrap();
        assert_eq!(r.stars, "***");
        assert!((0.0..=1.0).contains(&r.statistic));
    }

    #[test]
    fn ks_null_rejection_rate() {
        let rejected = (0..100)
            .filter(|s| ks_test(&normals(754, 100 + s)).unwrap().p_value < 0.05)
            .count();
        assert!(rejected <= 10, "{rejected}");
    }

    #[test]
    fn ljung_box_detects_ar1() {
        let mut rng = substream(9, 0);
        let mut x = vec![0.0; 754];
        for t in 1..x.len() {
            x[t] = 0.5 * x[t - 1] + rng.sample::<f64, _>(StandardNormal);
        }
        let lb = ljung_box(&x, DEFAULT_LB_LAGS).unwrap();
        assert_eq!(lb.stars, "***");
        assert!(ljung_box(&x[..13], 12).is_err());
    }

    #[test]
    fn ljung_box_null_mean() {
        let qs: Vec<f64> = (0..200)
            .map(|s| {
                let mut rng = substream(77, s);
                let x: Vec<f64> = (0..754).map(|_| 1e-9 * rng.sample::<f64, _>(StandardNormal)).collect();
                ljung_box(&x, 12).unwrap().q
            })
            .collect();
        let m = qs.iter().sum::<f64>() / qs.len() as f64;
        assert!((m - 12.0).abs() < 1.5, "{m}");
    }

    #[test]
    fn star_legend() {
        assert_eq!(stars(0.001), "***");
        assert_eq!(stars(0.007), "**");
        assert_eq!(stars(0.03), "*");
        assert_eq!(stars(0.2), "");
    }
}
