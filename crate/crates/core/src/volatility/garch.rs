use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::simplex::{nelder_mead, SimplexOptions};
use crate::error::{Error, Result};
use crate::table::{fmt_num, Table};

/// Persistence above which the fit is flagged as hitting the boundary.
pub const BOUNDARY_PERSISTENCE: f64 = 0.999;
const MAX_PERSISTENCE: f64 = 1.0 - 1e-8;
const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// `sigma2_t = omega + alpha1 (r_{t-1} - mu)^2 + beta1 sigma2_{t-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GarchModel {
    pub mu: f64,
    pub omega: f64,
    pub alpha1: f64,
    pub beta1: f64,
}

impl GarchModel {
    pub fn new(mu: f64, omega: f64, alpha1: f64, beta1: f64) -> Result<Self> {
        let m = GarchModel {
            mu,
            omega,
            alpha1,
            beta1,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.mu, self.omega, self.alpha1, self.beta1]
            .iter()
            .all(|v| v.is_finite());
        if !finite
            || self.omega <= 0.0
            || self.alpha1 < 0.0
            || self.beta1 < 0.0
            || self.alpha1 + self.beta1 >= 1.0
        {
            return Err(Error::InvalidArgument(format!(
                "GARCH parameters outside omega > 0, alpha1, beta1 >= 0, alpha1 + beta1 < 1: {self:?}"
            )));
        }
        Ok(())
    }

    pub fn persistence(&self) -> f64 {
        self.alpha1 + self.beta1
    }

    fn params(&self) -> [f64; 4] {
        [self.mu, self.omega, self.alpha1, self.beta1]
    }
}

fn sample_variance(r: &[f64]) -> f64 {
    let n = r.len() as f64;
    let m = r.iter().sum::<f64>() / n;
    r.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n
}

/// Conditional variances with `sigma2_0` set to the sample variance.
fn variances(params: [f64; 4], returns: &[f64], sigma2_0: f64) -> Vec<f64> {
    let [mu, omega, alpha, beta] = params;
    let mut out = Vec::with_capacity(returns.len());
    let mut s2 = sigma2_0;
    for t in 0..returns.len() {
        if t > 0 {
            let e = returns[t - 1] - mu;
            s2 = omega + alpha * e * e + beta * s2;
        }
        out.push(s2);
    }
    out
}

/// Per-observation Gaussian log-likelihood terms.
fn loglik_terms(params: [f64; 4], returns: &[f64], sigma2_0: f64) -> Vec<f64> {
    let mu = params[0];
    variances(params, returns, sigma2_0)
        .iter()
        .zip(returns)
        .map(|(s2, r)| -0.5 * (LN_2PI + s2.ln() + (r - mu).powi(2) / s2))
        .collect()
}

/// Conditional standard deviations aligned to `returns`.
pub fn garch_conditional_vol(model: &GarchModel, returns: &[f64]) -> Result<Vec<f64>> {
    if returns.is_empty() {
        return Err(Error::TooShort { needed: 1, found: 0 });
    }
    Ok(variances(model.params(), returns, sample_variance(returns))
        .into_iter()
        .map(f64::sqrt)
        .collect())
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Unconstrained coordinates: `mu / scale`, `ln omega`, logit of the
/// persistence, logit of alpha's share of it.
fn decode(z: &[f64], scale: f64) -> [f64; 4] {
    let persistence = MAX_PERSISTENCE * logistic(z[2]);
    let share = logistic(z[3]);
    [z[0] * scale, z[1].exp(), persistence * share, persistence * (1.0 - share)]
}

fn encode(p: [f64; 4], scale: f64) -> Vec<f64> {
    let persistence = (p[2] + p[3]) / MAX_PERSISTENCE;
    vec![p[0] / scale, p[1].ln(), logit(persistence), logit(p[2] / (p[2] + p[3]))]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GarchFit {
    pub model: GarchModel,
    /// Standard errors of `(mu, omega, alpha1, beta1)` from the outer product
    /// of per-observation score vectors; NaN when that matrix is singular.
    pub std_errors: [f64; 4],
    pub log_likelihood: f64,
    pub evals: usize,
    pub converged: bool,
    /// `alpha1 + beta1` ended above `BOUNDARY_PERSISTENCE`.
    pub boundary: bool,
}

impl GarchFit {
    pub fn t_stats(&self) -> [f64; 4] {
        let p = self.model.params();
        std::array::from_fn(|i| p[i] / self.std_errors[i])
    }

    /// Rows `mu, omega, alpha1, beta1`; columns `coef, std_err, t_stat`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["param", "coef", "std_err", "t_stat"]);
        let p = self.model.params();
        let ts = self.t_stats();
        for (i, name) in ["mu", "omega", "alpha1", "beta1"].iter().enumerate() {
            t.push(vec![
                name.to_string(),
                fmt_num(p[i]),
                fmt_num(self.std_errors[i]),
                fmt_num(ts[i]),
            ]);
        }
        t
    }
}

/// Gaussian quasi-maximum-likelihood fit by simplex search over
/// reparameterized coordinates, restarted from a few persistence levels.
pub fn fit_garch11(returns: &[f64]) -> Result<GarchFit> {
    if returns.len() < 50 {
        return Err(Error::TooShort {
            needed: 50,
            found: returns.len(),
        });
    }
    if returns.iter().any(|r| !r.is_finite()) {
        return Err(Error::InvalidArgument("returns must be finite".into()));
    }
    let var = sample_variance(returns);
    if var <= 0.0 {
        return Err(Error::Degenerate("returns have zero variance".into()));
    }
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let scale = var.sqrt();
    let objective = |z: &[f64]| -> f64 {
        -loglik_terms(decode(z, scale), returns, var).iter().sum::<f64>()
    };

    let opts = SimplexOptions {
        max_evals: 6000,
        f_tol: 1e-12,
        initial_step: 0.5,
    };
    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    let mut total_evals = 0;
    for (persistence, share) in [(0.9, 0.1), (0.5, 0.3), (0.98, 0.05), (0.1, 0.5)] {
        let start = encode([mean, var * (1.0 - persistence), persistence * share, persistence * (1.0 - share)], scale);
        // Polish once from the first result to escape a collapsed simplex.
        let first = nelder_mead(objective, &start, &opts);
        let second = nelder_mead(objective, &first.x, &SimplexOptions {
            initial_step: 0.1,
            ..opts
        });
        total_evals += first.evals + second.evals;
        if best.as_ref().is_none_or(|b| second.value < b.1) {
            best = Some((second.x, second.value, second.converged));
        }
    }
    let (z, value, converged) = best.expect("at least one start");
    let params = decode(&z, scale);
    let model = GarchModel::new(params[0], params[1], params[2], params[3])
        .map_err(|e| e.labeled("GARCH optimum"))?;

    Ok(GarchFit {
        model,
        std_errors: opg_std_errors(params, returns, var),
        log_likelihood: -value,
        evals: total_evals,
        converged,
        boundary: model.persistence() > BOUNDARY_PERSISTENCE,
    })
}

fn opg_std_errors(params: [f64; 4], returns: &[f64], sigma2_0: f64) -> [f64; 4] {
    let t = returns.len();
    let mut scores = DMatrix::zeros(t, 4);
    for i in 0..4 {
        let h = 1e-5 * params[i].abs().max(if i == 1 { params[1] } else { 1e-4 });
        let mut up = params;
        let mut down = params;
        up[i] += h;
        down[i] -= h;
        let lu = loglik_terms(up, returns, sigma2_0);
        let ld = loglik_terms(down, returns, sigma2_0);
        for s in 0..t {
            scores[(s, i)] = (lu[s] - ld[s]) / (2.0 * h);
        }
    }
    let opg = scores.transpose() * &scores;
    match opg.try_inverse() {
        Some(cov) => {
            let d = DVector::from_iterator(4, (0..4).map(|i| cov[(i, i)]));
            std::array::from_fn(|i| if d[i] > 0.0 { d[i].sqrt() } else { f64::NAN })
        }
        None => [f64::NAN; 4],
    }
}

/// Simulates `n` returns from `model` with standard normal innovations,
/// started at the unconditional variance.
pub fn simulate_garch<R: rand::Rng + ?Sized>(model: &GarchModel, n: usize, rng: &mut R) -> Vec<f64> {
    use rand_distr::StandardNormal;
    let mut s2 = model.omega / (1.0 - model.persistence());
    let mut out = Vec::with_capacity(n);
    let mut e_prev = 0.0;
    for t in 0..n {
        if t > 0 {
            s2 = model.omega + model.alpha1 * e_prev * e_prev + model.beta1 * s2;
        }
        let z: f64 = rng.sample(StandardNormal);
        let e = s2.sqrt() * z;
        out.push(model.mu + e);
        e_prev = e;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn recursion_fixed_points() {
        let flat = GarchModel::new(0.0, 4e-4, 0.0, 0.0).unwrap();
        let r = [0.01, -0.03, 0.02, 0.0, 0.05];
        let s = garch_conditional_vol(&flat, &r).unwrap();
        assert!(s[1..].iter().all(|v| (v - 0.02).abs() < 1e-15));

        let m = GarchModel::new(0.0, 1e-6, 0.1, 0.8).unwrap();
        let zeros = vec![0.0; 400];
        let mut r = zeros.clone();
        r[0] = 1e-3; // makes the sample variance positive
        let s = garch_conditional_vol(&m, &r).unwrap();
        let target = 1e-6 / (1.0 - 0.8);
        assert!((s.last().unwrap().powi(2) - target).abs() < 1e-12);
    }

    #[test]
    fn shock_decays_geometrically() {
        let m = GarchModel::new(0.0, 1e-6, 0.1, 0.8).unwrap();
        let mut r = vec![0.0; 60];
        r[10] = 0.5;
        let s2: Vec<f64> = garch_conditional_vol(&m, &r)
            .unwrap()
            .iter()
            .map(|v| v * v)
            .collect();
        assert!(s2[11] > 10.0 * s2[10]);
        // With no further shocks the excess over the fixed point shrinks by beta1.
        let fixed = 1e-6 / 0.2;
        for t in 12..40 {
            let ratio = (s2[t] - fixed) / (s2[t - 1] - fixed);
            assert!((ratio - 0.8).abs() < 1e-9);
        }
    }

    #[test]
    fn recovers_persistence() {
        let truth = GarchModel::new(0.0, 0.05e-4, 0.1, 0.85).unwrap();
        let r = simulate_garch(&truth, 3000, &mut stream(21));
        let fit = fit_garch11(&r).unwrap();
        assert!((fit.model.persistence() - 0.95).abs() < 0.08, "{fit:?}");
        assert!(fit.std_errors.iter().all(|s| s.is_finite() && *s > 0.0));
        let t = fit.to_table();
        assert_eq!(t.header, ["param", "coef", "std_err", "t_stat"]);
        let names: Vec<_> = t.rows.iter().map(|r| r[0].as_str()).collect();
        assert_eq!(names, ["mu", "omega", "alpha1", "beta1"]);
    }

    #[test]
    fn white_noise_gives_flat_variance() {
        let truth = GarchModel::new(0.0, 1e-4, 0.0, 0.0).unwrap();
        let r = simulate_garch(&truth, 3000, &mut stream(22));
        let fit = fit_garch11(&r).unwrap();
        let s2: Vec<f64> = garch_conditional_vol(&fit.model, &r)
            .unwrap()
            .iter()
            .map(|v| v * v)
            .collect();
        let var = sample_variance(&r);
        assert!(s2.iter().all(|v| (v / var - 1.0).abs() < 0.1), "{:?}", fit.model);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_garch11(&[0.01; 20]).is_err());
        assert!(fit_garch11(&[0.0; 80]).is_err());
        assert!(GarchModel::new(0.0, 1e-6, 0.5, 0.5).is_err());
    }
}
