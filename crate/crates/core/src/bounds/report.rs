use serde::Serialize;

use super::coefficients::{
    delta_estimate, gamma_estimate, lipschitz_lambda, md_alpha_kernel, md_alpha_matrix, Estimate,
    SamplingConfig,
};
use super::curves::{
    kstep_bound_curve, md_bound_curve, spectral_curve, theorem3_bound, theorem4_curve, Curve,
    Regime, TV_MAX,
};
use crate::chain::{PolynomialKernel, DEFAULT_STATIONARY_MAX_ITER, DEFAULT_STATIONARY_TOL};
use crate::coupling::{build_coupling_matrix, matrix_one_norm, spectral_radius, DEFAULT_POWER_CAP};
use crate::error::{Error, Result};
use crate::table::{fmt_num, Table};

#[derive(Debug, Clone, Serialize)]
pub struct ReportConfig {
    /// Largest step count for `alpha_k` / `lambda_k`.
    pub k_max: usize,
    pub sampling: SamplingConfig,
    pub power_cap: u64,
    /// Replaces the estimator residual as `eps` when set.
    pub eps_override: Option<f64>,
    pub force_delta_zero: bool,
    pub stationary_tol: f64,
    pub stationary_max_iter: usize,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            k_max: 4,
            sampling: SamplingConfig::default(),
            power_cap: DEFAULT_POWER_CAP,
            eps_override: None,
            force_delta_zero: false,
            stationary_tol: DEFAULT_STATIONARY_TOL,
            stationary_max_iter: DEFAULT_STATIONARY_MAX_ITER,
        }
    }
}

/// Coefficients and bound curves for one kernel.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub p: usize,
    pub n_max: usize,
    /// Exact `alpha_k` of the linear part, `k = 1..=k_max`.
    pub alpha: Vec<f64>,
    /// Sampled `alpha_k` over laws for the full kernel.
    pub alpha_nonlinear: Vec<Estimate>,
    pub lambda: Vec<Estimate>,
    pub gamma: f64,
    pub delta: f64,
    pub r: f64,
    pub eps: f64,
    pub eps_residual: f64,
    pub one_norm: f64,
    /// Named curves, each holding values for `n = 1..=n_max`.
    pub curves: Vec<(String, Curve)>,
    pub config: ReportConfig,
}

impl BoundReport {
    pub fn curve(&self, name: &str) -> Option<&Curve> {
        self.curves.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    /// One row per `n`, one column per curve.
    pub fn to_table(&self) -> Table {
        let mut header = vec!["n".to_string()];
        header.extend(self.curves.iter().map(|(n, _)| n.clone()));
        let mut table = Table {
            header,
            rows: Vec::new(),
        };
        for n in 1..=self.n_max {
            let mut row = vec![n.to_string()];
            row.extend(self.curves.iter().map(|(_, c)| fmt_num(c.at(n))));
            table.push(row);
        }
        table
    }

    /// Coefficients and metadata (curves excluded).
    pub fn coefficients_json(&self) -> String {
        let value = serde_json::json!({
            "p": self.p,
            "n_max": self.n_max,
            "alpha": self.alpha,
            "alpha_nonlinear": self.alpha_nonlinear,
            "lambda": self.lambda,
            "gamma": self.gamma,
            "delta": self.delta,
            "r": self.r,
            "eps": self.eps,
            "eps_residual": self.eps_residual,
            "one_norm": self.one_norm,
            "curves": self.curves.iter().map(|(n, c)| serde_json::json!({
                "name": n, "degenerate": c.degenerate
            })).collect::<Vec<_>>(),
            "config": self.config,
        });
        serde_json::to_string_pretty(&value).expect("report serializes")
    }
}

/// Computes every coefficient and emits the curves `md` (linear part,
/// `lambda = 0`), `md_nonlinear`, `kstep_k1..`, `spectral`, `theorem3`,
/// `theorem4_small` and `theorem4_large`.
pub fn full_report(kernel: &PolynomialKernel, n_max: usize, config: &ReportConfig) -> Result<BoundReport> {
    let p = kernel.dim();
    let linear = kernel.linear_part();
    let ks = 1..=config.k_max.max(1);

    let alpha = ks
        .clone()
        .map(|k| md_alpha_matrix(&linear, k))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.labeled("alpha"))?;
    let alpha_nonlinear = ks
        .clone()
        .map(|k| md_alpha_kernel(kernel, k, &config.sampling))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.labeled("nonlinear alpha"))?;
    let lambda = ks
        .clone()
        .map(|k| lipschitz_lambda(kernel, k, &config.sampling))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.labeled("lambda"))?;
    // An unbounded perturbation ratio only voids the perturbation curve.
    let gamma = match gamma_estimate(kernel, &config.sampling) {
        Ok(g) => g.gamma,
        Err(Error::InfiniteGamma { .. }) => f64::INFINITY,
        Err(e) => return Err(e.labeled("gamma")),
    };
    let delta = delta_estimate(
        kernel,
        config.stationary_tol,
        config.stationary_max_iter,
        config.force_delta_zero,
    )
    .map_err(|e| e.labeled("delta"))?;

    let m = build_coupling_matrix(&linear);
    let spectral = spectral_radius(&m, config.power_cap).map_err(|e| e.labeled("spectral radius"))?;
    let eps = config.eps_override.unwrap_or(spectral.residual);
    let r = spectral.radius;

    let unit = |v: f64| v.clamp(0.0, 1.0);
    let mut curves = vec![
        ("md".to_string(), md_bound_curve(alpha[0], 0.0, n_max)?),
        (
            "md_nonlinear".to_string(),
            md_bound_curve(unit(alpha_nonlinear[0].value), unit(lambda[0].value), n_max)?,
        ),
    ];
    for k in ks {
        curves.push((
            format!("kstep_k{k}"),
            kstep_bound_curve(
                unit(alpha_nonlinear[k - 1].value),
                unit(lambda[k - 1].value),
                unit(lambda[0].value),
                TV_MAX,
                k,
                n_max,
            )?,
        ));
    }
    curves.push(("spectral".to_string(), spectral_curve(r, eps, p, n_max)?));
    curves.push((
        "theorem3".to_string(),
        Curve {
            values: (1..=n_max)
                .map(|n| if gamma.is_finite() { theorem3_bound(gamma, n) } else { Ok(TV_MAX) })
                .collect::<Result<_>>()?,
            degenerate: false,
        },
    ));
    curves.push((
        "theorem4_small".to_string(),
        theorem4_curve(r, eps, delta, p, n_max, Regime::SmallN)?,
    ));
    curves.push((
        "theorem4_large".to_string(),
        theorem4_curve(r, eps, delta, p, n_max, Regime::LargeN)?,
    ));

    Ok(BoundReport {
        p,
        n_max,
        alpha,
        alpha_nonlinear,
        lambda,
        gamma,
        delta,
        r,
        eps,
        eps_residual: spectral.residual,
        one_norm: matrix_one_norm(&m),
        curves,
        config: config.clone(),
    })
}
