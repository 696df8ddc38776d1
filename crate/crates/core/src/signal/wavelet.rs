use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Daubechies scaling filter with 8 vanishing moments (16 taps).
pub const DB8: [f64; 16] = [
    0.05441584224310401,
    0.31287159091429995,
    0.6756307362972898,
    0.5853546836542067,
    -0.015829105256349306,
    -0.2840155429615469,
    0.0004724845739132828,
    0.12874742662047847,
    -0.017369301001807547,
    -0.044088253930794755,
    0.013981027917398282,
    0.008746094047405777,
    -0.004870352993451574,
    -0.00039174037337694705,
    0.0006754494064505693,
    -0.00011747678412476953,
];

/// Shortest signal a level may be applied to.
pub const MIN_LEVEL_LEN: usize = DB8.len();

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WaveletFamily {
    /// Also accepted as `db8-16tap`.
    #[default]
    #[serde(alias = "db8-16tap")]
    Db8,
}

impl std::str::FromStr for WaveletFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "db8" | "db8-16tap" => Ok(WaveletFamily::Db8),
            other => Err(Error::InvalidArgument(format!("unknown wavelet family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Threshold {
    #[default]
    Soft,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct WaveletSpec {
    pub family: WaveletFamily,
    /// `None` picks `min(4, floor(log2(N / 15)))`.
    pub levels: Option<usize>,
    pub threshold: Threshold,
}

impl WaveletSpec {
    pub fn filter(&self) -> &'static [f64] {
        match self.family {
            WaveletFamily::Db8 => &DB8,
        }
    }
}

/// Default depth `min(4, floor(log2(n / 15)))`, at least 1.
pub fn default_levels(n: usize) -> usize {
    let ratio = n as f64 / 15.0;
    if ratio < 2.0 {
        1
    } else {
        (ratio.log2().floor() as usize).min(4)
    }
}

/// Deepest level whose input still has `MIN_LEVEL_LEN` samples.
pub fn max_levels(n: usize) -> usize {
    let mut levels = 0;
    let mut len = n;
    while len >= MIN_LEVEL_LEN {
        levels += 1;
        len /= 2;
    }
    levels
}

/// Multi-level decomposition of a signal of length `len`.
///
/// The transform is the periodized orthogonal DWT of the mirrored signal
/// `[x, reverse(x)]`, scaled by `1/sqrt(2)` so that the coefficient energy
/// equals the energy of `x`. At a level whose input has odd length the last
/// sample is carried unchanged in `tails`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pyramid {
    pub len: usize,
    /// Finest level first.
    pub details: Vec<Vec<f64>>,
    pub tails: Vec<Option<f64>>,
    pub approx: Vec<f64>,
    pub warning: Option<String>,
}

impl Pyramid {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    pub fn energy(&self) -> f64 {
        let sq = |v: &[f64]| v.iter().map(|c| c * c).sum::<f64>();
        sq(&self.approx)
            + self.details.iter().map(|d| sq(d)).sum::<f64>()
            + self.tails.iter().flatten().map(|t| t * t).sum::<f64>()
    }
}

fn highpass(h: &[f64]) -> Vec<f64> {
    let l = h.len();
    (0..l)
        .map(|n| if n % 2 == 0 { h[l - 1 - n] } else { -h[l - 1 - n] })
        .collect()
}

fn analysis_step(x: &[f64], h: &[f64], g: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = x.len();
    let half = m / 2;
    let mut a = vec![0.0; half];
    let mut d = vec![0.0; half];
    for k in 0..half {
        for (n, (hn, gn)) in h.iter().zip(g).enumerate() {
            let v = x[(2 * k + n) % m];
            a[k] += hn * v;
            d[k] += gn * v;
        }
    }
    (a, d)
}

fn synthesis_step(a: &[f64], d: &[f64], h: &[f64], g: &[f64]) -> Vec<f64> {
    let m = 2 * a.len();
    let mut x = vec![0.0; m];
    for k in 0..a.len() {
        for (n, (hn, gn)) in h.iter().zip(g).enumerate() {
            x[(2 * k + n) % m] += hn * a[k] + gn * d[k];
        }
    }
    x
}

/// Forward transform. Requests deeper than the signal allows are reduced,
/// with a note in `Pyramid::warning`.
pub fn dwt(x: &[f64], spec: &WaveletSpec) -> Result<Pyramid> {
    let n = x.len();
    if n < MIN_LEVEL_LEN {
        return Err(Error::TooShort {
            needed: MIN_LEVEL_LEN,
            found: n,
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("signal contains non-finite values".into()));
    }
    let requested = spec.levels.unwrap_or_else(|| default_levels(n));
    if requested == 0 {
        return Err(Error::InvalidArgument("levels must be >= 1".into()));
    }
    let allowed = max_levels(n);
    let (levels, warning) = if requested > allowed {
        (
            allowed,
            Some(format!(
                "{requested} levels requested for {n} samples; reduced to {allowed}"
            )),
        )
    } else {
        (requested, None)
    };

    let h = spec.filter();
    let g = highpass(h);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut current: Vec<f64> = x.iter().chain(x.iter().rev()).map(|v| v * scale).collect();
    let mut details = Vec::with_capacity(levels);
    let mut tails = Vec::with_capacity(levels);
    for _ in 0..levels {
        let tail = if current.len() % 2 == 1 {
            current.pop()
        } else {
            None
        };
        let (a, d) = analysis_step(&current, h, &g);
        details.push(d);
        tails.push(tail);
        current = a;
    }
    Ok(Pyramid {
        len: n,
        details,
        tails,
        approx: current,
        warning,
    })
}

/// Inverse of [`dwt`]. The two mirrored halves are averaged, which is the
/// orthogonal projection back onto symmetric signals.
pub fn idwt(pyramid: &Pyramid, spec: &WaveletSpec) -> Result<Vec<f64>> {
    if pyramid.details.len() != pyramid.tails.len() {
        return Err(Error::InvalidArgument("pyramid levels and tails disagree".into()));
    }
    let h = spec.filter();
    let g = highpass(h);
    let mut current = pyramid.approx.clone();
    for (d, tail) in pyramid.details.iter().zip(&pyramid.tails).rev() {
        if d.len() != current.len() {
            return Err(Error::DimensionMismatch {
                expected: current.len(),
                found: d.len(),
            });
        }
        current = synthesis_step(&current, d, h, &g);
        if let Some(t) = tail {
            current.push(*t);
        }
    }
    let n = pyramid.len;
    if current.len() != 2 * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            found: current.len(),
        });
    }
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    Ok((0..n)
        .map(|i| 0.5 * (current[i] + current[2 * n - 1 - i]) / scale)
        .collect())
}

fn soft(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len();
    if m % 2 == 1 {
        values[m / 2]
    } else {
        0.5 * (values[m / 2 - 1] + values[m / 2])
    }
}

/// Soft-thresholds every detail level at `sigma sqrt(2 ln N)` with
/// `sigma = median(|finest detail|) / 0.6745`. Returns the threshold used.
pub fn shrink(pyramid: &mut Pyramid) -> f64 {
    let mut finest: Vec<f64> = pyramid.details[0].iter().map(|d| d.abs()).collect();
    let sigma = median(&mut finest) / 0.6745;
    let t = sigma * (2.0 * (pyramid.len as f64).ln()).sqrt();
    for d in &mut pyramid.details {
        d.iter_mut().for_each(|c| *c = soft(*c, t));
    }
    t
}

/// Denoised signal and the removed part `x - denoised`.
#[derive(Debug, Clone, PartialEq)]
pub struct Denoised {
    pub signal: Vec<f64>,
    pub noise: Vec<f64>,
    pub threshold: f64,
    pub levels: usize,
    pub warning: Option<String>,
}

pub fn denoise_signal(x: &[f64], spec: &WaveletSpec) -> Result<Denoised> {
    let mut pyramid = dwt(x, spec)?;
    let threshold = match spec.threshold {
        Threshold::Soft => shrink(&mut pyramid),
        Threshold::None => 0.0,
    };
    let signal = idwt(&pyramid, spec)?;
    let noise = x.iter().zip(&signal).map(|(a, b)| a - b).collect();
    Ok(Denoised {
        signal,
        noise,
        threshold,
        levels: pyramid.levels(),
        warning: pyramid.warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn exact() -> WaveletSpec {
        WaveletSpec {
            threshold: Threshold::None,
            ..WaveletSpec::default()
        }
    }

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
        let den: f64 = a.iter().map(|x| x * x).sum();
        (num / den).sqrt()
    }

    #[test]
    fn filter_is_orthonormal() {
        let s: f64 = DB8.iter().sum();
        assert!((s - std::f64::consts::SQRT_2).abs() < 1e-12);
        for k in 0..8 {
            let c: f64 = (0..16 - 2 * k).map(|n| DB8[n] * DB8[n + 2 * k]).sum();
            let e = if k == 0 { 1.0 } else { 0.0 };
            assert!((c - e).abs() < 1e-10, "shift {k}: {c}");
        }
        let g = highpass(&DB8);
        let cross: f64 = DB8.iter().zip(&g).map(|(a, b)| a * b).sum();
        assert!(cross.abs() < 1e-12);
    }

    #[test]
    fn roundtrip_and_energy() {
        let mut rng = stream(10);
        for &n in &[16, 17, 64, 100, 257, 754, 1001] {
            let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let p = dwt(&x, &exact()).unwrap();
            let energy: f64 = x.iter().map(|v| v * v).sum();
            assert!((p.energy() - energy).abs() / energy < 1e-8, "n={n}");
            assert!(rel_err(&x, &idwt(&p, &exact()).unwrap()) < 1e-8, "n={n}");
        }
    }

    #[test]
    fn constant_has_no_detail() {
        let x = vec![3.5; 200];
        let p = dwt(&x, &exact()).unwrap();
        assert_eq!(p.levels(), 3);
        assert!(p.details.iter().flatten().all(|d| d.abs() < 1e-10));
        let scale = 2f64.powf(p.levels() as f64 / 2.0) / std::f64::consts::SQRT_2;
        assert!(p.approx.iter().all(|a| (a - 3.5 * scale).abs() < 1e-9));
    }

    #[test]
    fn level_reduction_warns() {
        let x = vec![1.0; 40];
        let spec = WaveletSpec {
            levels: Some(6),
            ..exact()
        };
        let p = dwt(&x, &spec).unwrap();
        assert_eq!(p.levels(), 2);
        assert!(p.warning.is_some());
        assert!(dwt(&[1.0; 15], &exact()).is_err());
    }

    #[test]
    fn default_depth() {
        assert_eq!(default_levels(754), 4);
        assert_eq!(default_levels(60), 2);
        assert_eq!(default_levels(20), 1);
    }

    #[test]
    fn denoise_recovers_sine() {
        let mut rng = stream(2);
        let n = 512;
        let clean: Vec<f64> = (0..n).map(|i| (i as f64 * 0.05).sin()).collect();
        let noisy: Vec<f64> = clean
            .iter()
            .map(|c| c + 0.2 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let out = denoise_signal(&noisy, &WaveletSpec::default()).unwrap();
        let mse = |a: &[f64]| a.iter().zip(&clean).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
        assert!(mse(&out.signal) < 0.5 * mse(&noisy));
        for i in 0..n {
            assert!((noisy[i] - out.signal[i] - out.noise[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn denoise_without_threshold_is_identity() {
        let x: Vec<f64> = (0..300).map(|i| (i as f64).sqrt()).collect();
        let out = denoise_signal(&x, &exact()).unwrap();
        assert!(x.iter().zip(&out.signal).all(|(a, b)| (a - b).abs() < 1e-8));
    }

    #[test]
    fn family_aliases() {
        assert_eq!("db8-16tap".parse::<WaveletFamily>().unwrap(), WaveletFamily::Db8);
        assert!("haar".parse::<WaveletFamily>().is_err());
        let spec: WaveletSpec =
            serde_json::from_str(r#"{"family":"db8-16tap","levels":2,"threshold":"none"}"#).unwrap();
        assert_eq!(spec.levels, Some(2));
    }
}
