//! Command-line front end (`nmcb`).
//!
//! Every command prints its effective configuration as one JSON line on
//! standard error and writes its CSV outputs atomically. Exit codes: 0
//! success, 2 input or validation error, 3 numerical nonconvergence, 4 failed
//! statistical check.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bounds::{full_report, ReportConfig, SamplingConfig};
use crate::chain::{load_model, Distribution, PolynomialKernel};
use crate::coupling::{lemma_check, LemmaThresholds};
use crate::error::{Error, Result};
use crate::experiments::{builtin_example_variant, compare_bounds, export_report, Example2Variant};
use crate::signal::{load_prices_with, return_stats, stats_table, PriceColumns, Threshold, WaveletSpec};
use crate::table::{fmt_num, write_atomic};
use crate::volatility::{
    regime_check, two_regime_prices, volatility_pipeline, ReturnSource, VolatilityConfig,
};

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const EXIT_OK: i32 = 0;
pub const EXIT_STATISTICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "nmcb", version, about = "Convergence bounds for nonlinear Markov chains and TV volatility")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coefficients and bound curves for a kernel.
    Bounds(BoundsArgs),
    /// Monte-Carlo envelope of the true distance next to the bounds.
    Simulate(SimulateArgs),
    /// Statistical check of the coupling construction.
    CouplingCheck(CouplingArgs),
    /// Descriptive statistics of raw returns, denoised returns and noise.
    Stats(StatsArgs),
    /// Sliding-window TV volatility with a GARCH(1,1) baseline.
    Volatility(VolatilityArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Kernel JSON file.
    #[arg(long, conflicts_with = "example")]
    pub model: Option<PathBuf>,
    /// Built-in example (1 or 2).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub example: Option<u8>,
    /// Perturbation size for built-in examples.
    #[arg(long, default_value_t = 0.1)]
    pub kappa: f64,
    /// Example 2 with the row-3 entry driven by coordinate 4.
    #[arg(long)]
    pub cross_driven: bool,
}

impl ModelArgs {
    fn kernel(&self) -> Result<PolynomialKernel> {
        match (&self.model, self.example) {
            (Some(path), _) => load_model(path),
            (None, Some(id)) => {
                if !(0.0..=0.25).contains(&self.kappa) {
                    return Err(Error::InvalidArgument(format!(
                        "kappa = {} outside [0, 0.25]",
                        self.kappa
                    )));
                }
                let variant = if self.cross_driven {
                    Example2Variant::CrossDriven
                } else {
                    Example2Variant::RowConsistent
                };
                builtin_example_variant(id, self.kappa, variant)
            }
            (None, None) => Err(Error::InvalidArgument("give --model or --example".into())),
        }
    }

    fn describe(&self) -> serde_json::Value {
        json!({
            "model": self.model,
            "example": self.example,
            "kappa": self.kappa,
            "cross_driven": self.cross_driven,
        })
    }
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Distributions sampled for the nonlinear coefficient estimates.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Replaces the spectral estimator residual as eps.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Sets delta to 0 in the combined bound.
    #[arg(long)]
    pub delta_zero: bool,
    #[arg(long, default_value = "bounds.csv")]
    pub out: PathBuf,
    /// Coefficient JSON; defaults to the CSV path with a .json extension.
    #[arg(long)]
    pub coefficients: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 15)]
    pub steps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value = "simulate.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CouplingArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 5)]
    pub steps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// First initial law as comma-separated weights (default: first vertex).
    #[arg(long)]
    pub start1: Option<String>,
    /// Second initial law (default: uniform).
    #[arg(long)]
    pub start2: Option<String>,
    /// Also fail when the meeting frequency falls short of the overlap.
    #[arg(long)]
    pub strict_equality: bool,
    #[arg(long, default_value = "coupling.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ThresholdArg {
    Soft,
    None,
}

#[derive(Debug, Args)]
pub struct SignalArgs {
    #[arg(long)]
    pub prices: Option<PathBuf>,
    #[arg(long, default_value = "date")]
    pub date_column: String,
    #[arg(long, default_value = "adj_close")]
    pub price_column: String,
    /// Wavelet depth (default min(4, floor(log2(N/15)))).
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long, value_enum, default_value_t = ThresholdArg::Soft)]
    pub threshold: ThresholdArg,
}

impl SignalArgs {
    fn wavelet(&self) -> WaveletSpec {
        WaveletSpec {
            levels: self.levels,
            threshold: match self.threshold {
                ThresholdArg::Soft => Threshold::Soft,
                ThresholdArg::None => Threshold::None,
            },
            ..WaveletSpec::default()
        }
    }

    fn columns(&self) -> PriceColumns {
        PriceColumns {
            date: self.date_column.clone(),
            close: self.price_column.clone(),
        }
    }
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub signal: SignalArgs,
    /// Row label for the series (the denoised row gets a trailing `*`).
    #[arg(long, default_value = "X")]
    pub label: String,
    #[arg(long, default_value = "stats.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VolatilityArgs {
    #[command(flatten)]
    pub signal: SignalArgs,
    #[arg(long, default_value_t = 60)]
    pub window_min: usize,
    #[arg(long, default_value_t = 80)]
    pub window_max: usize,
    #[arg(long, default_value_t = 5)]
    pub window_step: usize,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[arg(long, default_value_t = 3)]
    pub states: usize,
    #[arg(long, default_value_t = 15)]
    pub epochs: usize,
    /// Exponent n of the bound used as indicator.
    #[arg(long, default_value_t = 1)]
    pub exponent: u32,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Fit the hidden chain on raw instead of denoised returns.
    #[arg(long)]
    pub raw_returns: bool,
    /// Run on a synthetic two-regime series and fail (exit 4) unless the
    /// indicator is higher in the volatile regime.
    #[arg(long)]
    pub self_check: bool,
    #[arg(long, default_value = "volatility.csv")]
    pub out: PathBuf,
    #[arg(long, default_value = "garch.csv")]
    pub garch_out: PathBuf,
}

fn print_config(command: &str, config: serde_json::Value) {
    let line = json!({ "command": command, "config": config });
    eprintln!("{line}");
}

fn parse_law(text: &str, p: usize) -> Result<Distribution> {
    let weights = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad weight '{s}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    if weights.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: weights.len(),
        });
    }
    Distribution::new(weights)
}

fn sibling_json(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn cmd_bounds(args: &BoundsArgs, stdout: &mut dyn Write) -> Result<i32> {
    let config = ReportConfig {
        sampling: SamplingConfig {
            samples: args.samples,
            seed: args.seed,
        },
        eps_override: args.eps,
        force_delta_zero: args.delta_zero,
        ..ReportConfig::default()
    };
    let coefficients = args.coefficients.clone().unwrap_or_else(|| sibling_json(&args.out));
    print_config(
        "bounds",
        json!({
            "model": args.model.describe(),
            "steps": args.steps,
            "seed": args.seed,
            "samples": args.samples,
            "eps": args.eps,
            "delta_zero": args.delta_zero,
            "out": args.out,
            "coefficients": coefficients,
        }),
    );
    if args.steps == 0 {
        return Err(Error::InvalidArgument("steps must be >= 1".into()));
    }
    let kernel = args.model.kernel()?;
    let report = full_report(&kernel, args.steps, &config)?;
    let table = report.to_table();
    export_report(&table, &args.out)?;
    write_atomic(&coefficients, report.coefficients_json().as_bytes())?;

    writeln!(stdout, "{}", table.header.join(","))?;
    for row in table.rows.iter().take(4) {
        writeln!(stdout, "{}", row.join(","))?;
    }
    Ok(EXIT_OK)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<i32> {
    print_config(
        "simulate",
        json!({
            "model": args.model.describe(),
            "trials": args.trials,
            "steps": args.steps,
            "seed": args.seed,
            "samples": args.samples,
            "out": args.out,
        }),
    );
    if args.trials == 0 || args.steps == 0 {
        return Err(Error::InvalidArgument("trials and steps must be >= 1".into()));
    }
    let kernel = args.model.kernel()?;
    let config = ReportConfig {
        sampling: SamplingConfig {
            samples: args.samples,
            seed: args.seed,
        },
        ..ReportConfig::default()
    };
    let cmp = compare_bounds(&kernel, args.steps, args.trials, args.seed, &config)?;
    export_report(&cmp.to_table(), &args.out)?;
    Ok(EXIT_OK)
}

fn cmd_coupling_check(args: &CouplingArgs) -> Result<i32> {
    let thresholds = LemmaThresholds {
        two_sided: args.strict_equality,
        ..LemmaThresholds::default()
    };
    print_config(
        "coupling-check",
        json!({
            "model": args.model.describe(),
            "samples": args.samples,
            "steps": args.steps,
            "seed": args.seed,
            "start1": args.start1,
            "start2": args.start2,
            "thresholds": thresholds,
            "out": args.out,
        }),
    );
    let p = args.model.kernel()?.linear_part();
    let dim = p.dim();
    let mu0 = match &args.start1 {
        Some(s) => parse_law(s, dim)?,
        None => Distribution::vertex(dim, 0)?,
    };
    let nu0 = match &args.start2 {
        Some(s) => parse_law(s, dim)?,
        None => Distribution::uniform(dim)?,
    };
    let report = lemma_check(&p, &mu0, &nu0, args.steps, args.samples, args.seed, thresholds)?;
    export_report(&report.to_table(), &args.out)?;
    eprintln!(
        "{}",
        json!({
            "pass": report.pass,
            "underpowered": report.underpowered,
            "max_marginal_tv": report.max_marginal_tv,
            "max_excess": report.max_excess,
            "max_deficit": report.max_deficit,
        })
    );
    if report.underpowered {
        eprintln!(
            "warning: underpowered check ({} samples); result not enforced",
            report.samples
        );
        return Ok(EXIT_OK);
    }
    Ok(if report.pass { EXIT_OK } else { EXIT_STATISTICAL })
}

fn cmd_stats(args: &StatsArgs) -> Result<i32> {
    let spec = args.signal.wavelet();
    print_config(
        "stats",
        json!({
            "prices": args.signal.prices,
            "columns": [args.signal.date_column, args.signal.price_column],
            "wavelet": spec,
            "label": args.label,
            "out": args.out,
            "return_formula": "ln(S_t / S_{t-1})",
            "ks_parameters": "estimated (Lilliefors caveat)",
        }),
    );
    let path = args
        .signal
        .prices
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("--prices is required".into()))?;
    let prices = load_prices_with(path, &args.signal.columns())?;
    let (rows, denoised) = return_stats(&args.label, &prices, &spec)?;
    if let Some(w) = &denoised.warning {
        eprintln!("warning: {w}");
    }
    if rows.iter().any(|r| r.descriptive.degenerate) {
        eprintln!("warning: degenerate series; shape statistics and tests left empty");
    }
    export_report(&stats_table(&rows), &args.out)?;
    Ok(EXIT_OK)
}

fn cmd_volatility(args: &VolatilityArgs) -> Result<i32> {
    let config = VolatilityConfig {
        windows: VolatilityConfig::window_range(args.window_min, args.window_max, args.window_step)?,
        reps: args.reps,
        n_states: args.states,
        epochs: args.epochs,
        exponent: args.exponent,
        eps_override: args.eps,
        seed: args.seed,
    };
    let spec = args.signal.wavelet();
    let source = if args.raw_returns {
        ReturnSource::Raw
    } else {
        ReturnSource::Denoised
    };
    print_config(
        "volatility",
        json!({
            "prices": args.signal.prices,
            "self_check": args.self_check,
            "volatility": config,
            "wavelet": spec,
            "returns": source,
            "normalization": "min-max over the output rows for *_norm columns",
            "out": args.out,
            "garch_out": args.garch_out,
        }),
    );
    let (prices, break_date) = if args.self_check {
        let prices = two_regime_prices(400, 400, 0.005, 0.03, args.seed)?;
        let brk = prices.dates()[401];
        (prices, Some(brk))
    } else {
        let path = args
            .signal
            .prices
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("--prices is required".into()))?;
        (load_prices_with(path, &args.signal.columns())?, None)
    };
    let out = volatility_pipeline(&prices, &spec, source, &config)?;
    if let Some(w) = &out.wavelet_warning {
        eprintln!("warning: {w}");
    }
    let flagged: usize = out.tv.flagged_fits.iter().sum();
    if flagged > 0 {
        eprintln!("warning: {flagged} window fits flagged (state starvation or emission floor)");
    }
    if out.garch.boundary {
        eprintln!("warning: GARCH persistence at the stationarity boundary");
    }
    export_report(&out.table, &args.out)?;
    export_report(&out.garch.to_table(), &args.garch_out)?;

    let m = out.garch.model;
    let se = out.garch.std_errors;
    let ts = out.garch.t_stats();
    println!("{:<8}{:>16}{:>16}{:>12}", "", "coef", "std err", "t");
    for (i, (name, v)) in [("mu", m.mu), ("omega", m.omega), ("alpha1", m.alpha1), ("beta1", m.beta1)]
        .into_iter()
        .enumerate()
    {
        println!("{name:<8}{:>16}{:>16}{:>12}", fmt_num(v), fmt_num(se[i]), format!("{:.3}", ts[i]));
    }

    if let Some(brk) = break_date {
        let check = regime_check(&out.tv, brk)?;
        eprintln!("{}", json!({ "regime_check": check }));
        if !check.pass {
            return Ok(EXIT_STATISTICAL);
        }
    }
    Ok(EXIT_OK)
}

/// Runs a parsed command; returns the exit code for successful runs and
/// checks, or the error.
pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Bounds(a) => cmd_bounds(a, &mut std::io::stdout()),
        Command::Simulate(a) => cmd_simulate(a),
        Command::CouplingCheck(a) => cmd_coupling_check(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Volatility(a) => cmd_volatility(a),
    }
}

/// Entry point for the binary: parses `args`, runs, reports errors on
/// standard error and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_subcommands() {
        let cli = Cli::try_parse_from(["nmcb", "bounds", "--example", "1", "--kappa", "0.1", "--steps", "10"]).unwrap();
        match cli.command {
            Command::Bounds(b) => {
                assert_eq!(b.steps, 10);
                assert_eq!(b.seed, DEFAULT_SEED);
            }
            _ => panic!("wrong subcommand"),
        }
        assert!(Cli::try_parse_from(["nmcb", "bounds", "--example", "3"]).is_err());
        assert!(Cli::try_parse_from(["nmcb", "bounds", "--example", "1", "--model", "m.json"]).is_err());
        assert!(Cli::try_parse_from(["nmcb", "coupling-check", "--example", "1"]).is_ok());
    }

    #[test]
    fn law_parsing() {
        assert_eq!(parse_law("1,0,0", 3).unwrap(), Distribution::vertex(3, 0).unwrap());
        assert!(parse_law("0.5,0.5", 3).is_err());
        assert!(parse_law("a,b,c", 3).is_err());
    }

    #[test]
    fn bounds_prints_first_rows() {
        let dir = tempfile::tempdir().unwrap();
        let args = BoundsArgs {
            model: ModelArgs {
                model: None,
                example: Some(1),
                kappa: 0.0,
                cross_driven: false,
            },
            steps: 6,
            seed: 1,
            samples: 200,
            eps: None,
            delta_zero: false,
            out: dir.path().join("b.csv"),
            coefficients: None,
        };
        let mut buf = Vec::new();
        assert_eq!(cmd_bounds(&args, &mut buf).unwrap(), 0);
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        let coeffs: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("b.json")).unwrap()).unwrap();
        assert_eq!(coeffs["gamma"], 0.0);
    }
}
