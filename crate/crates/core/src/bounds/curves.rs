use rand::Rng;
use serde::Serialize;

use crate::chain::{tv_distance, Distribution};
use crate::error::{Error, Result};

/// Upper bound on any total-variation distance.
pub const TV_MAX: f64 = 2.0;

fn clamp_tv(v: f64) -> f64 {
    v.clamp(0.0, TV_MAX)
}

/// Bound values for `n = 1..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub values: Vec<f64>,
    /// Set when the inputs give no contraction at all (`alpha = lambda = 0`).
    pub degenerate: bool,
}

impl Curve {
    /// Value at step `n >= 1`.
    pub fn at(&self, n: usize) -> f64 {
        self.values[n - 1]
    }
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidArgument(format!("{name} = {v} not in [0, 1]")));
    }
    Ok(())
}

/// Markov-Dobrushin bound `2 (1 - alpha + lambda)^n`, or `2 / (lambda n)` when
/// `lambda == alpha`.
pub fn md_bound_curve(alpha: f64, lambda: f64, n_max: usize) -> Result<Curve> {
    check_unit("alpha", alpha)?;
    check_unit("lambda", lambda)?;
    if alpha == 0.0 && lambda == 0.0 {
        return Ok(Curve {
            values: vec![TV_MAX; n_max],
            degenerate: true,
        });
    }
    let values = (1..=n_max)
        .map(|n| {
            let v = if lambda == alpha {
                2.0 / (lambda * n as f64)
            } else {
                2.0 * (1.0 - alpha + lambda).powi(n as i32)
            };
            clamp_tv(v)
        })
        .collect();
    Ok(Curve {
        values,
        degenerate: false,
    })
}

/// `k`-step bound `d0 (1 - alpha_k + lambda_k)^[n/k] (1 + lambda_1)^(n mod k)`;
/// when `alpha_k == lambda_k > 0` the harmonic form
/// `d0 / (2 + lambda_k n d0) (1 + lambda_1)^(n mod k)` is used instead.
pub fn kstep_bound_curve(
    alpha_k: f64,
    lambda_k: f64,
    lambda_1: f64,
    d0: f64,
    k: usize,
    n_max: usize,
) -> Result<Curve> {
    check_unit("alpha_k", alpha_k)?;
    check_unit("lambda_k", lambda_k)?;
    check_unit("lambda_1", lambda_1)?;
    if !(0.0..=TV_MAX).contains(&d0) {
        return Err(Error::InvalidArgument(format!("d0 = {d0} not in [0, 2]")));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let harmonic = alpha_k == lambda_k && lambda_k > 0.0;
    let values = (1..=n_max)
        .map(|n| {
            let tail = (1.0 + lambda_1).powi((n % k) as i32);
            let v = if harmonic {
                d0 / (2.0 + lambda_k * n as f64 * d0) * tail
            } else {
                d0 * (1.0 - alpha_k + lambda_k).powi((n / k) as i32) * tail
            };
            clamp_tv(v)
        })
        .collect();
    Ok(Curve {
        values,
        degenerate: alpha_k == 0.0 && lambda_k == 0.0,
    })
}

/// `2 (1 - 1/p)`: worst distance from the uniform law to any law on `p` states.
pub fn theorem2_bound(p: usize) -> Result<f64> {
    if p < 2 {
        return Err(Error::InvalidArgument(format!("p must be >= 2, got {p}")));
    }
    Ok(2.0 * (1.0 - 1.0 / p as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BruteForceMax {
    pub max: f64,
    pub argmax: Distribution,
}

/// Largest `||uniform - pi||` over all vertices and `trials` flat random laws.
pub fn theorem2_bruteforce<R: Rng + ?Sized>(
    p: usize,
    trials: usize,
    rng: &mut R,
) -> Result<BruteForceMax> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    let uniform = Distribution::uniform(p)?;
    let mut best = BruteForceMax {
        max: f64::NEG_INFINITY,
        argmax: uniform.clone(),
    };
    let mut consider = |pi: Distribution| -> Result<()> {
        let d = tv_distance(&uniform, &pi)?;
        if d > best.max {
            best.max = d;
            best.argmax = pi;
        }
        Ok(())
    };
    for i in 0..p {
        consider(Distribution::vertex(p, i)?)?;
    }
    for _ in 0..trials {
        consider(Distribution::random(p, rng)?)?;
    }
    Ok(best)
}

/// Perturbation bound `2 (e^-(1 + n gamma) + n gamma) / (1 + n gamma)`.
pub fn theorem3_bound(gamma: f64, n: usize) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::InvalidArgument(format!("gamma = {gamma} must be >= 0")));
    }
    let x = n as f64 * gamma;
    Ok(clamp_tv(2.0 * ((-(1.0 + x)).exp() + x) / (1.0 + x)))
}

/// `2 (1 - 1/p) (r + eps)^n` for `n = 1..=n_max`.
pub fn spectral_curve(r: f64, eps: f64, p: usize, n_max: usize) -> Result<Curve> {
    let scale = theorem2_bound(p)?;
    let base = r + eps;
    Ok(Curve {
        values: (1..=n_max)
            .map(|n| clamp_tv(scale * base.powi(n as i32)))
            .collect(),
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    SmallN,
    LargeN,
}

/// Combined bound: `2/e + delta + 2 (r + eps)^n (1 - 1/p)` for small `n`,
/// `2 delta + 2 (r + eps)^n (1 - 1/p)` for large `n`.
pub fn theorem4_bound(r: f64, eps: f64, delta: f64, p: usize, n: usize, regime: Regime) -> Result<f64> {
    let core = theorem2_bound(p)? * (r + eps).powi(n as i32);
    let v = match regime {
        Regime::SmallN => 2.0 * (-1.0_f64).exp() + delta + core,
        Regime::LargeN => 2.0 * delta + core,
    };
    Ok(clamp_tv(v))
}

pub fn theorem4_curve(r: f64, eps: f64, delta: f64, p: usize, n_max: usize, regime: Regime) -> Result<Curve> {
    Ok(Curve {
        values: (1..=n_max)
            .map(|n| theorem4_bound(r, eps, delta, p, n, regime))
            .collect::<Result<_>>()?,
        degenerate: false,
    })
}
