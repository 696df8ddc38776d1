//! Gaussian hidden Markov model with scaled forward-backward recursions,
//! fixed-budget Baum-Welch estimation, sampling and Viterbi decoding.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution as _, Exp1, Normal};
use serde::{Deserialize, Serialize};

use crate::chain::{sample_index, StochasticMatrix};
use crate::error::{Error, Result};

pub const VARIANCE_FLOOR: f64 = 1e-10;
pub const EMISSION_FLOOR: f64 = 1e-300;
/// Total posterior mass below which a state counts as starved.
pub const STARVATION_MASS: f64 = 1e-8;
const TRANSITION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct GhmmModel {
    initial: Vec<f64>,
    transition: DMatrix<f64>,
    means: Vec<f64>,
    variances: Vec<f64>,
}

fn check_law(what: &str, values: impl Iterator<Item = f64>) -> Result<()> {
    let mut sum = 0.0;
    for v in values {
        if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
            return Err(Error::InvalidArgument(format!("{what} has entry {v} outside [0, 1]")));
        }
        sum += v;
    }
    if (sum - 1.0).abs() > TRANSITION_TOL {
        return Err(Error::InvalidArgument(format!("{what} sums to {sum}")));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct GhmmJson {
    states: usize,
    initial: Vec<f64>,
    transition: Vec<Vec<f64>>,
    means: Vec<f64>,
    variances: Vec<f64>,
}

impl GhmmModel {
    /// Single-state models use a 1x1 transition; `initial` may then be `[1]`.
    pub fn new(
        initial: Vec<f64>,
        transition: DMatrix<f64>,
        means: Vec<f64>,
        variances: Vec<f64>,
    ) -> Result<Self> {
        let k = means.len();
        if k == 0 {
            return Err(Error::InvalidArgument("need at least one state".into()));
        }
        for len in [initial.len(), variances.len(), transition.nrows(), transition.ncols()] {
            if len != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: len,
                });
            }
        }
        if means.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidArgument("means must be finite".into()));
        }
        if let Some(v) = variances.iter().find(|v| !(v.is_finite() && **v >= VARIANCE_FLOOR)) {
            return Err(Error::InvalidArgument(format!(
                "variance {v} below floor {VARIANCE_FLOOR}"
            )));
        }
        check_law("initial law", initial.iter().copied())?;
        for (i, row) in transition.row_iter().enumerate() {
            check_law(&format!("transition row {i}"), row.iter().copied())?;
        }
        Ok(GhmmModel {
            initial,
            transition,
            means,
            variances,
        })
    }

    pub fn n_states(&self) -> usize {
        self.means.len()
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn transition(&self) -> &DMatrix<f64> {
        &self.transition
    }

    /// The hidden chain as a [`StochasticMatrix`] (at least two states).
    pub fn transition_matrix(&self) -> Result<StochasticMatrix> {
        if self.n_states() < 2 {
            return Err(Error::InvalidArgument(
                "a transition matrix needs at least two states".into(),
            ));
        }
        Ok(StochasticMatrix::new_unchecked(self.transition.clone()))
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    /// Relabels states so that new state `i` is old state `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let k = self.n_states();
        let mut seen = vec![false; k];
        if perm.len() != k || perm.iter().any(|&i| i >= k || std::mem::replace(&mut seen[i], true)) {
            return Err(Error::InvalidArgument("not a permutation".into()));
        }
        let a = &self.transition;
        GhmmModel::new(
            perm.iter().map(|&i| self.initial[i]).collect(),
            DMatrix::from_fn(k, k, |i, j| a[(perm[i], perm[j])]),
            perm.iter().map(|&i| self.means[i]).collect(),
            perm.iter().map(|&i| self.variances[i]).collect(),
        )
    }

    pub fn to_json(&self) -> String {
        let k = self.n_states();
        let json = GhmmJson {
            states: k,
            initial: self.initial.clone(),
            transition: self.transition.row_iter().map(|r| r.iter().copied().collect()).collect(),
            means: self.means.clone(),
            variances: self.variances.clone(),
        };
        serde_json::to_string_pretty(&json).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: GhmmJson = serde_json::from_str(text)?;
        if j.transition.len() != j.states {
            return Err(Error::DimensionMismatch {
                expected: j.states,
                found: j.transition.len(),
            });
        }
        let flat: Vec<f64> = j.transition.iter().flatten().copied().collect();
        if flat.len() != j.states * j.states {
            return Err(Error::DimensionMismatch {
                expected: j.states * j.states,
                found: flat.len(),
            });
        }
        GhmmModel::new(
            j.initial,
            DMatrix::from_row_slice(j.states, j.states, &flat),
            j.means,
            j.variances,
        )
    }

    fn log_density(&self, state: usize, x: f64) -> f64 {
        let v = self.variances[state];
        let d = x - self.means[state];
        -(d * d) / (2.0 * v) - 0.5 * (2.0 * PI * v).ln()
    }
}

/// Output of the scaled forward-backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Posteriors {
    pub log_likelihood: f64,
    /// `gamma[t][i] = P(state_t = i | obs)`.
    pub gamma: Vec<Vec<f64>>,
    /// `xi_sum[(i, j)] = sum_t P(state_t = i, state_{t+1} = j | obs)`.
    pub xi_sum: DMatrix<f64>,
    /// Some emission density fell below `EMISSION_FLOOR` for every state.
    pub floored: bool,
}

/// Flat-array result of one forward-backward pass.
struct Pass {
    k: usize,
    log_likelihood: f64,
    /// Row-major `T x k`.
    gamma: Vec<f64>,
    /// Row-major `k x k`.
    xi_sum: Vec<f64>,
    floored: bool,
}

fn emissions(model: &GhmmModel, obs: &[f64]) -> (Vec<f64>, bool) {
    let k = model.n_states();
    let norm: Vec<f64> = model.variances.iter().map(|v| 1.0 / (2.0 * PI * v).sqrt()).collect();
    let inv2v: Vec<f64> = model.variances.iter().map(|v| 0.5 / v).collect();
    let mut floored = false;
    let mut b = vec![0.0; obs.len() * k];
    for (row, &o) in b.chunks_exact_mut(k).zip(obs) {
        for (i, slot) in row.iter_mut().enumerate() {
            let d = o - model.means[i];
            *slot = norm[i] * (-d * d * inv2v[i]).exp();
        }
        if row.iter().all(|v| *v < EMISSION_FLOOR) {
            floored = true;
            // Keep the relative likelihoods so the step still informs.
            let logs: Vec<f64> = (0..k).map(|i| model.log_density(i, o)).collect();
            let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for (slot, l) in row.iter_mut().zip(logs) {
                *slot = ((l - top).exp() * EMISSION_FLOOR).max(EMISSION_FLOOR * 1e-16);
            }
        }
    }
    (b, floored)
}

fn run_pass(model: &GhmmModel, obs: &[f64]) -> Result<Pass> {
    let t_len = obs.len();
    if t_len == 0 {
        return Err(Error::TooShort { needed: 1, found: 0 });
    }
    if obs.iter().any(|o| !o.is_finite()) {
        return Err(Error::InvalidArgument("observations must be finite".into()));
    }
    let k = model.n_states();
    let a: Vec<f64> = (0..k * k).map(|ij| model.transition[(ij / k, ij % k)]).collect();
    let (b, floored) = emissions(model, obs);

    let mut alpha = vec![0.0; t_len * k];
    let mut scale = vec![0.0; t_len];
    for t in 0..t_len {
        let (done, rest) = alpha.split_at_mut(t * k);
        let cur = &mut rest[..k];
        for j in 0..k {
            let prior = if t == 0 {
                model.initial[j]
            } else {
                let prev = &done[(t - 1) * k..];
                (0..k).map(|i| prev[i] * a[i * k + j]).sum()
            };
            cur[j] = prior * b[t * k + j];
        }
        let c: f64 = cur.iter().sum();
        if !(c > 0.0) {
            return Err(Error::Numeric(format!("forward pass underflow at step {t}")));
        }
        cur.iter_mut().for_each(|v| *v /= c);
        scale[t] = c;
    }

    let mut beta = vec![1.0; t_len * k];
    let mut weighted = vec![0.0; k];
    for t in (0..t_len - 1).rev() {
        for j in 0..k {
            weighted[j] = b[(t + 1) * k + j] * beta[(t + 1) * k + j];
        }
        for i in 0..k {
            beta[t * k + i] = (0..k).map(|j| a[i * k + j] * weighted[j]).sum::<f64>() / scale[t + 1];
        }
    }

    let mut gamma: Vec<f64> = alpha.iter().zip(&beta).map(|(x, y)| x * y).collect();
    for row in gamma.chunks_exact_mut(k) {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= s);
    }

    let mut xi_sum = vec![0.0; k * k];
    for t in 0..t_len - 1 {
        let c = scale[t + 1];
        for j in 0..k {
            weighted[j] = b[(t + 1) * k + j] * beta[(t + 1) * k + j] / c;
        }
        for i in 0..k {
            let ai = alpha[t * k + i];
            for j in 0..k {
                xi_sum[i * k + j] += ai * a[i * k + j] * weighted[j];
            }
        }
    }

    Ok(Pass {
        k,
        log_likelihood: scale.iter().map(|c| c.ln()).sum(),
        gamma,
        xi_sum,
        floored,
    })
}

pub fn forward_backward(model: &GhmmModel, obs: &[f64]) -> Result<Posteriors> {
    let pass = run_pass(model, obs)?;
    let k = pass.k;
    Ok(Posteriors {
        log_likelihood: pass.log_likelihood,
        gamma: pass.gamma.chunks_exact(k).map(|r| r.to_vec()).collect(),
        xi_sum: DMatrix::from_row_slice(k, k, &pass.xi_sum),
        floored: pass.floored,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitPolicy {
    /// Sorted observations split into equal groups; 0.8 self-loops, uniform initial law.
    Quantile,
    /// Means drawn from the observations, global variance, flat random
    /// transition rows.
    Random,
    Given(GhmmModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub n_states: usize,
    /// Exact number of EM iterations; there is no convergence stop.
    pub epochs: usize,
    pub init: InitPolicy,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            n_states: 3,
            epochs: 15,
            init: InitPolicy::Quantile,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub model: GhmmModel,
    /// Log-likelihood of the initial model and after each epoch.
    pub trace: Vec<f64>,
    /// States reset for starvation, one entry per (epoch, state) event.
    pub starved: Vec<(usize, usize)>,
    pub emission_floored: bool,
}

fn moments(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (m, x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n)
}

fn self_loop_matrix(k: usize) -> DMatrix<f64> {
    if k == 1 {
        return DMatrix::from_element(1, 1, 1.0);
    }
    DMatrix::from_fn(k, k, |i, j| if i == j { 0.8 } else { 0.2 / (k - 1) as f64 })
}

fn initial_model<R: Rng + ?Sized>(obs: &[f64], k: usize, policy: &InitPolicy, rng: &mut R) -> Result<GhmmModel> {
    let (_, global_var) = moments(obs);
    let global_var = global_var.max(VARIANCE_FLOOR);
    let uniform = vec![1.0 / k as f64; k];
    match policy {
        InitPolicy::Given(m) => {
            if m.n_states() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: m.n_states(),
                });
            }
            Ok(m.clone())
        }
        InitPolicy::Quantile => {
            let mut sorted = obs.to_vec();
            sorted.sort_by(f64::total_cmp);
            let n = sorted.len();
            let (means, variances) = (0..k)
                .map(|i| {
                    let group = &sorted[i * n / k..(i + 1) * n / k];
                    let (m, v) = moments(group);
                    (m, v.max(VARIANCE_FLOOR))
                })
                .unzip();
            GhmmModel::new(uniform, self_loop_matrix(k), means, variances)
        }
        InitPolicy::Random => {
            let means = (0..k).map(|_| obs[rng.random_range(0..obs.len())]).collect();
            let transition = DMatrix::from_fn(k, k, |_, _| {
                let e: f64 = Exp1.sample(rng);
                e + 1e-12
            });
            let sums: Vec<f64> = transition.row_iter().map(|r| r.sum()).collect();
            let transition = DMatrix::from_fn(k, k, |i, j| transition[(i, j)] / sums[i]);
            GhmmModel::new(uniform, transition, means, vec![global_var; k])
        }
    }
}

fn m_step(model: &GhmmModel, obs: &[f64], pass: &Pass, global_var: f64, epoch: usize, starved: &mut Vec<(usize, usize)>) -> Result<GhmmModel> {
    let k = model.n_states();
    let mut means = model.means.clone();
    let mut variances = model.variances.clone();
    let mut transition = DMatrix::zeros(k, k);
    for i in 0..k {
        let weights = pass.gamma.iter().skip(i).step_by(k);
        let mass: f64 = weights.clone().sum();
        if mass < STARVATION_MASS {
            starved.push((epoch, i));
            variances[i] = global_var;
            for j in 0..k {
                transition[(i, j)] = 1.0 / k as f64;
            }
            continue;
        }
        let m = weights.clone().zip(obs).map(|(g, o)| g * o).sum::<f64>() / mass;
        let v = weights.zip(obs).map(|(g, o)| g * (o - m).powi(2)).sum::<f64>() / mass;
        means[i] = m;
        variances[i] = v.max(VARIANCE_FLOOR);
        let row = &pass.xi_sum[i * k..(i + 1) * k];
        let out: f64 = row.iter().sum();
        for j in 0..k {
            transition[(i, j)] = if out > 0.0 {
                row[j] / out
            } else {
                model.transition[(i, j)]
            };
        }
    }
    let initial = pass.gamma[..k].to_vec();
    GhmmModel::new(initial, transition, means, variances)
}

/// Baum-Welch with exactly `config.epochs` iterations.
pub fn fit_baum_welch<R: Rng + ?Sized>(obs: &[f64], config: &FitConfig, rng: &mut R) -> Result<Fit> {
    let k = config.n_states;
    if k == 0 {
        return Err(Error::InvalidArgument("n_states must be >= 1".into()));
    }
    if obs.len() < 10 * k {
        return Err(Error::TooShort {
            needed: 10 * k,
            found: obs.len(),
        });
    }
    let (_, global_var) = moments(obs);
    let global_var = global_var.max(VARIANCE_FLOOR);
    let mut model = initial_model(obs, k, &config.init, rng)?;
    let mut starved = Vec::new();
    let mut post = run_pass(&model, obs)?;
    let mut floored = post.floored;
    let mut trace = vec![post.log_likelihood];
    for epoch in 0..config.epochs {
        model = m_step(&model, obs, &post, global_var, epoch, &mut starved)?;
        post = run_pass(&model, obs)?;
        floored |= post.floored;
        trace.push(post.log_likelihood);
    }
    Ok(Fit {
        model,
        trace,
        starved,
        emission_floored: floored,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub states: Vec<usize>,
    pub observations: Vec<f64>,
}

pub fn sample_ghmm<R: Rng + ?Sized>(model: &GhmmModel, n: usize, rng: &mut R) -> Result<Sample> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let normals: Vec<Normal<f64>> = model
        .means
        .iter()
        .zip(&model.variances)
        .map(|(m, v)| Normal::new(*m, v.sqrt()).map_err(|e| Error::Numeric(e.to_string())))
        .collect::<Result<_>>()?;
    let mut states = Vec::with_capacity(n);
    let mut observations = Vec::with_capacity(n);
    let mut s = sample_index(&model.initial, rng);
    for t in 0..n {
        if t > 0 {
            let row: Vec<f64> = model.transition.row(s).iter().copied().collect();
            s = sample_index(&row, rng);
        }
        states.push(s);
        observations.push(normals[s].sample(rng));
    }
    Ok(Sample {
        states,
        observations,
    })
}

/// Most probable state path; ties go to the lower state index.
pub fn viterbi(model: &GhmmModel, obs: &[f64]) -> Result<Vec<usize>> {
    if obs.is_empty() {
        return Err(Error::TooShort { needed: 1, found: 0 });
    }
    let k = model.n_states();
    let log_a = model.transition.map(f64::ln);
    let mut score: Vec<f64> = (0..k)
        .map(|i| model.initial[i].ln() + model.log_density(i, obs[0]))
        .collect();
    let mut back = vec![0usize; obs.len() * k];
    for (t, &o) in obs.iter().enumerate().skip(1) {
        let mut next = vec![f64::NEG_INFINITY; k];
        for j in 0..k {
            let (mut best, mut arg) = (f64::NEG_INFINITY, 0);
            for i in 0..k {
                let s = score[i] + log_a[(i, j)];
                if s > best {
                    best = s;
                    arg = i;
                }
            }
            next[j] = best + model.log_density(j, o);
            back[t * k + j] = arg;
        }
        score = next;
    }
    let mut last = 0;
    for i in 1..k {
        if score[i] > score[last] {
            last = i;
        }
    }
    let mut path = vec![0; obs.len()];
    path[obs.len() - 1] = last;
    for t in (1..obs.len()).rev() {
        path[t - 1] = back[t * k + path[t]];
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn three_state() -> GhmmModel {
        let a = DMatrix::from_fn(3, 3, |i, j| if i == j { 0.9 } else { 0.05 });
        GhmmModel::new(vec![1.0 / 3.0; 3], a, vec![-0.02, 0.0, 0.02], vec![0.005f64.powi(2); 3]).unwrap()
    }

    fn single(mean: f64, var: f64) -> GhmmModel {
        GhmmModel::new(vec![1.0], DMatrix::from_element(1, 1, 1.0), vec![mean], vec![var]).unwrap()
    }

    #[test]
    fn single_state_likelihood() {
        let m = single(0.5, 2.0);
        let obs = [0.1, 1.3, -0.4, 2.2];
        let post = forward_backward(&m, &obs).unwrap();
        let direct: f64 = obs
            .iter()
            .map(|o| -(o - 0.5f64).powi(2) / 4.0 - 0.5 * (4.0 * PI).ln())
            .sum();
        assert!((post.log_likelihood - direct).abs() < 1e-12);
        assert!(post.gamma.iter().all(|g| g[0] == 1.0));
        assert_eq!(viterbi(&m, &obs).unwrap(), vec![0; 4]);
    }

    #[test]
    fn separated_states_posterior() {
        let a = DMatrix::from_element(2, 2, 0.5);
        let m = GhmmModel::new(vec![0.5, 0.5], a, vec![-10.0, 10.0], vec![1.0, 1.0]).unwrap();
        let post = forward_backward(&m, &[9.7, 10.2, 10.1]).unwrap();
        assert!(post.gamma.iter().all(|g| g[1] > 0.999));
        for g in &post.gamma {
            assert!((g.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn identical_states_keep_prior() {
        let a = DMatrix::from_row_slice(2, 2, &[0.7, 0.3, 0.6, 0.4]);
        let m = GhmmModel::new(vec![0.6, 0.4], a, vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let post = forward_backward(&m, &[0.3, -1.0, 2.0, 0.1]).unwrap();
        // stationary law of the chain is (2/3, 1/3); the prior chain starts at (0.6, 0.4).
        let mut law = [0.6, 0.4];
        for g in &post.gamma {
            assert!((g[0] - law[0]).abs() < 1e-12);
            law = [law[0] * 0.7 + law[1] * 0.6, law[0] * 0.3 + law[1] * 0.4];
        }
    }

    #[test]
    fn far_observation_is_floored() {
        let m = single(0.0, 1e-6);
        let post = forward_backward(&m, &[1e3]).unwrap();
        assert!(post.floored && post.log_likelihood.is_finite());
    }

    #[test]
    fn zero_epochs_returns_init() {
        let obs: Vec<f64> = (0..60).map(|i| (i as f64).sin()).collect();
        let mut rng = stream(0);
        let cfg = FitConfig {
            epochs: 0,
            ..FitConfig::default()
        };
        let fit = fit_baum_welch(&obs, &cfg, &mut rng).unwrap();
        let init = initial_model(&obs, 3, &InitPolicy::Quantile, &mut rng).unwrap();
        assert_eq!(fit.model, init);
        assert_eq!(fit.trace.len(), 1);
        assert!(fit_baum_welch(&obs[..29], &cfg, &mut rng).is_err());
    }

    #[test]
    fn single_state_recovers_mle() {
        let truth = single(0.3, 0.04);
        let s = sample_ghmm(&truth, 5000, &mut stream(1)).unwrap();
        let cfg = FitConfig {
            n_states: 1,
            ..FitConfig::default()
        };
        let fit = fit_baum_welch(&s.observations, &cfg, &mut stream(2)).unwrap();
        let (m, v) = moments(&s.observations);
        assert!((fit.model.means()[0] - m).abs() < 1e-12);
        assert!((fit.model.variances()[0] - v).abs() < 1e-12);
        let se = (0.04f64 / 5000.0).sqrt();
        assert!((m - 0.3).abs() < 3.0 * se);
    }

    #[test]
    fn three_state_recovery_and_monotone_trace() {
        let s = sample_ghmm(&three_state(), 2000, &mut stream(5)).unwrap();
        let fit = fit_baum_welch(&s.observations, &FitConfig::default(), &mut stream(6)).unwrap();
        assert_eq!(fit.trace.len(), 16);
        assert!(fit.trace.windows(2).all(|w| w[1] >= w[0] - 1e-8));
        let mut order: Vec<usize> = (0..3).collect();
        order.sort_by(|&a, &b| fit.model.means()[a].total_cmp(&fit.model.means()[b]));
        let aligned = fit.model.permuted(&order).unwrap();
        let truth = three_state();
        for i in 0..3 {
            for j in 0..3 {
                let d = (aligned.transition()[(i, j)] - truth.transition()[(i, j)]).abs();
                assert!(d < 0.1, "({i},{j}) {d}");
            }
        }
    }

    #[test]
    fn random_init_is_deterministic_and_monotone() {
        let s = sample_ghmm(&three_state(), 300, &mut stream(8)).unwrap();
        let cfg = FitConfig {
            init: InitPolicy::Random,
            ..FitConfig::default()
        };
        let a = fit_baum_welch(&s.observations, &cfg, &mut stream(9)).unwrap();
        let b = fit_baum_welch(&s.observations, &cfg, &mut stream(9)).unwrap();
        assert_eq!(a, b);
        assert!(a.trace.windows(2).all(|w| w[1] >= w[0] - 1e-8));
    }

    #[test]
    fn relabeled_init_gives_relabeled_fit() {
        let s = sample_ghmm(&three_state(), 400, &mut stream(10)).unwrap();
        let init = initial_model(&s.observations, 3, &InitPolicy::Quantile, &mut stream(0)).unwrap();
        let perm = [2, 0, 1];
        let fit = |m: GhmmModel| {
            let cfg = FitConfig {
                init: InitPolicy::Given(m),
                ..FitConfig::default()
            };
            fit_baum_welch(&s.observations, &cfg, &mut stream(0)).unwrap()
        };
        let a = fit(init.clone()).model.permuted(&perm).unwrap();
        let b = fit(init.permuted(&perm).unwrap()).model;
        for i in 0..3 {
            assert!((a.means()[i] - b.means()[i]).abs() < 1e-12);
            for j in 0..3 {
                assert!((a.transition()[(i, j)] - b.transition()[(i, j)]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sampling_properties() {
        let absorbing = GhmmModel::new(
            vec![0.0, 1.0],
            DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.0, 1.0]),
            vec![0.0, 7.0],
            vec![1.0, VARIANCE_FLOOR],
        )
        .unwrap();
        let s = sample_ghmm(&absorbing, 100, &mut stream(3)).unwrap();
        assert!(s.states.iter().all(|x| *x == 1));
        assert!(s.observations.iter().all(|o| (o - 7.0).abs() < 1e-3));

        let m = three_state();
        let s = sample_ghmm(&m, 100_000, &mut stream(4)).unwrap();
        let mut counts = [[0.0f64; 3]; 3];
        for w in s.states.windows(2) {
            counts[w[0]][w[1]] += 1.0;
        }
        for i in 0..3 {
            let total: f64 = counts[i].iter().sum();
            for j in 0..3 {
                assert!((counts[i][j] / total - m.transition()[(i, j)]).abs() < 0.01);
            }
        }
    }

    #[test]
    fn viterbi_cases() {
        let a = DMatrix::from_element(3, 3, 1.0 / 3.0);
        let m = GhmmModel::new(vec![1.0 / 3.0; 3], a, vec![-5.0, 0.0, 5.0], vec![1.0; 3]).unwrap();
        let obs = [4.0, -6.0, 0.3, 2.6, -2.7];
        assert_eq!(viterbi(&m, &obs).unwrap(), vec![2, 0, 1, 2, 0]);

        let cycle = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        let m = GhmmModel::new(vec![1.0, 0.0, 0.0], cycle, vec![0.0, 1.0, 2.0], vec![1.0; 3]).unwrap();
        let obs = [0.1, 0.9, 2.2, -0.1, 1.1, 1.8];
        assert_eq!(viterbi(&m, &obs).unwrap(), vec![0, 1, 2, 0, 1, 2]);

        // Exact tie between two identical states.
        let m = GhmmModel::new(vec![0.5, 0.5], DMatrix::from_element(2, 2, 0.5), vec![0.0; 2], vec![1.0; 2]).unwrap();
        assert_eq!(viterbi(&m, &[0.2, 0.4]).unwrap(), vec![0, 0]);
    }

    #[test]
    fn json_roundtrip() {
        let m = three_state();
        let back = GhmmModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert!(GhmmModel::from_json(r#"{"states":1,"initial":[1],"transition":[[1]],"means":[0],"variances":[0]}"#).is_err());
    }
}
