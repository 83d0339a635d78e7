//! The `catsim` command line: argument parsing, `--config` overlays and the
//! per-command drivers. `main` only maps the result to an exit code.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::conditional::{find_tau_opt_with, p_zero_curve, write_pcurve_csv, HeraldResult, TauSearch};
use crate::csvfmt;
use crate::cvops::{wigner, write_wigner_csv, WignerGridSpec};
use crate::dynamics::{energy_series, evolve, signal_peak_time, tau_grid, write_energy_csv, SpectrumCache};
use crate::error::{Error, Result};
use crate::feasibility::{self, PlatformParams};
use crate::fits::{self, read_sweep_csv, sweep, write_sweep_csv, FitReport, DEFAULT_BETAS};
use crate::hilbert::{initial_block_state, signal_distribution, FockVector, DEFAULT_EPS_TAIL};
use crate::numkit::{FitLaw, NlsOptions};

pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Parser)]
#[command(name = "catsim", version, about = "Heralded cat-state preparation by degenerate parametric down-conversion")]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "CATSIM_WORKERS")]
    pub workers: Option<usize>,

    /// JSON run configuration; its entries override command-line flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output file (default: stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Pump Poisson tail left out of the initial state.
    #[arg(long, global = true, default_value_t = DEFAULT_EPS_TAIL, allow_negative_numbers = true)]
    pub eps_tail: f64,

    /// Seed for the fit restarts.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mean occupations versus τ (CSV tau,mean_ns,two_mean_np,sum_energy).
    Evolve(EvolveArgs),
    /// Signal photon-number distribution at one τ (CSV n,probability).
    Distribution(DistributionArgs),
    /// Pump-vacuum probability versus τ (CSV tau,p0).
    Pcurve(EvolveArgs),
    /// Optimal heralding time and conditional state (JSON).
    Conditional(ConditionalArgs),
    /// Wigner function of a state read from JSON (CSV x,p,w).
    Wigner(WignerArgs),
    /// Full pipeline over a list of β (CSV).
    Sweep(SweepArgs),
    /// Fit one empirical law to a sweep CSV (JSON).
    Fit(FitArgs),
    /// Physical-units feasibility estimate (JSON).
    Feasibility(FeasibilityArgs),
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    /// Pump amplitude (required here or in --config).
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub tau_max: f64,
    #[arg(long, default_value_t = 400)]
    pub steps: usize,
}

#[derive(Debug, Args)]
pub struct DistributionArgs {
    /// Pump amplitude (required here or in --config).
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Evaluation time; defaults to the maximum of ⟨n_s⟩ on (0, tau_max].
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub tau_max: f64,
}

#[derive(Debug, Args)]
pub struct ConditionalArgs {
    /// Pump amplitude (required here or in --config).
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct WignerArgs {
    /// State JSON: a `conditional` document or a bare Fock vector.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Half-width of the square phase-space grid.
    #[arg(long, default_value_t = 6.0, allow_negative_numbers = true)]
    pub range: f64,
    /// Points per axis.
    #[arg(long, default_value_t = 201)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated β values.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_BETAS, allow_negative_numbers = true)]
    pub betas: Vec<f64>,
    /// Write 0 in the seconds column, making the output reproducible.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawArg {
    Tau,
    P0,
    Xi,
}

impl From<LawArg> for FitLaw {
    fn from(l: LawArg) -> Self {
        match l {
            LawArg::Tau => FitLaw::TauOpt,
            LawArg::P0 => FitLaw::PZero,
            LawArg::Xi => FitLaw::XiPrep,
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Sweep CSV written by `catsim sweep`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub law: Option<LawArg>,
}

#[derive(Debug, Args)]
pub struct FeasibilityArgs {
    /// χ⁽²⁾ in m/V.
    #[arg(long, default_value_t = PlatformParams::default().chi2, allow_negative_numbers = true)]
    pub chi2: f64,
    #[arg(long, default_value_t = PlatformParams::default().n_s, allow_negative_numbers = true)]
    pub ns: f64,
    #[arg(long, default_value_t = PlatformParams::default().n_p, allow_negative_numbers = true)]
    pub np: f64,
    /// Signal wavelength in m.
    #[arg(long, default_value_t = PlatformParams::default().wavelength_s, allow_negative_numbers = true)]
    pub lambda_s: f64,
    /// Mode volume in m³.
    #[arg(long, default_value_t = PlatformParams::default().mode_volume, allow_negative_numbers = true)]
    pub volume: f64,
    #[arg(long, default_value_t = PlatformParams::default().q, allow_negative_numbers = true)]
    pub q: f64,
    #[arg(long, default_value_t = PlatformParams::default().beta, allow_negative_numbers = true)]
    pub beta: f64,
}

/// `--config` document. Every entry is optional and, when present, replaces
/// the corresponding flag.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    pub beta: Option<f64>,
    pub tau: Option<f64>,
    pub tau_max: Option<f64>,
    pub steps: Option<usize>,
    pub input: Option<PathBuf>,
    pub range: Option<f64>,
    pub grid: Option<usize>,
    pub betas: Option<Vec<f64>>,
    pub no_timing: Option<bool>,
    pub law: Option<LawArg>,
    pub eps_tail: Option<f64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub chi2: Option<f64>,
    pub ns: Option<f64>,
    pub np: Option<f64>,
    pub lambda_s: Option<f64>,
    pub volume: Option<f64>,
    pub q: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn set<T: Clone>(slot: &mut T, value: &Option<T>) {
    if let Some(v) = value {
        *slot = v.clone();
    }
}

fn set_opt<T: Clone>(slot: &mut Option<T>, value: &Option<T>) {
    if value.is_some() {
        *slot = value.clone();
    }
}

fn need<T: Copy>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::InvalidInput(format!("{flag} is required (on the command line or in --config)")))
}

fn need_path<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    value
        .as_deref()
        .ok_or_else(|| Error::InvalidInput(format!("{flag} is required (on the command line or in --config)")))
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Evolve(_) => "evolve",
            Command::Distribution(_) => "distribution",
            Command::Pcurve(_) => "pcurve",
            Command::Conditional(_) => "conditional",
            Command::Wigner(_) => "wigner",
            Command::Sweep(_) => "sweep",
            Command::Fit(_) => "fit",
            Command::Feasibility(_) => "feasibility",
        }
    }

    fn apply(&mut self, c: &RunConfig) {
        match self {
            Command::Evolve(a) | Command::Pcurve(a) => {
                set_opt(&mut a.beta, &c.beta);
                set(&mut a.tau_max, &c.tau_max);
                set(&mut a.steps, &c.steps);
            }
            Command::Distribution(a) => {
                set_opt(&mut a.beta, &c.beta);
                set(&mut a.tau_max, &c.tau_max);
                set_opt(&mut a.tau, &c.tau);
            }
            Command::Conditional(a) => set_opt(&mut a.beta, &c.beta),
            Command::Wigner(a) => {
                set_opt(&mut a.input, &c.input);
                set(&mut a.range, &c.range);
                set(&mut a.grid, &c.grid);
            }
            Command::Sweep(a) => {
                set(&mut a.betas, &c.betas);
                set(&mut a.no_timing, &c.no_timing);
            }
            Command::Fit(a) => {
                set_opt(&mut a.input, &c.input);
                set_opt(&mut a.law, &c.law);
            }
            Command::Feasibility(a) => {
                set(&mut a.chi2, &c.chi2);
                set(&mut a.ns, &c.ns);
                set(&mut a.np, &c.np);
                set(&mut a.lambda_s, &c.lambda_s);
                set(&mut a.volume, &c.volume);
                set(&mut a.q, &c.q);
                set(&mut a.beta, &c.beta);
            }
        }
    }
}

impl Cli {
    /// Folds in the `--config` document, if any.
    pub fn resolve(mut self) -> Result<Self> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let cfg = RunConfig::load(&path)?;
        if let Some(cmd) = &cfg.command {
            if cmd != self.command.name() {
                return Err(Error::InvalidInput(format!(
                    "config is for `{cmd}` but `{}` was invoked",
                    self.command.name()
                )));
            }
        }
        set(&mut self.eps_tail, &cfg.eps_tail);
        set(&mut self.seed, &cfg.seed);
        set_opt(&mut self.out, &cfg.out);
        set_opt(&mut self.workers, &cfg.workers);
        self.command.apply(&cfg);
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if !(self.eps_tail > 0.0 && self.eps_tail < 1.0) {
            return bad(format!("--eps-tail must lie in (0, 1), got {}", self.eps_tail));
        }
        if self.workers == Some(0) {
            return bad("--workers must be at least 1".into());
        }
        let beta_ok = |b: f64| b.is_finite() && b >= 0.0;
        match &self.command {
            Command::Evolve(a) | Command::Pcurve(a) => {
                let beta = need(a.beta, "--beta")?;
                if !beta_ok(beta) {
                    return bad(format!("--beta must be finite and non-negative, got {beta}"));
                }
                if !(a.tau_max.is_finite() && a.tau_max >= 0.0) {
                    return bad(format!("--tau-max must be finite and non-negative, got {}", a.tau_max));
                }
                if a.steps == 0 {
                    return bad("--steps must be at least 1".into());
                }
            }
            Command::Distribution(a) => {
                let beta = need(a.beta, "--beta")?;
                if !beta_ok(beta) {
                    return bad(format!("--beta must be finite and non-negative, got {beta}"));
                }
                if let Some(t) = a.tau {
                    if !(t.is_finite() && t >= 0.0) {
                        return bad(format!("--tau must be finite and non-negative, got {t}"));
                    }
                } else if !(a.tau_max > 0.0 && a.tau_max.is_finite()) {
                    return bad(format!("--tau-max must be positive, got {}", a.tau_max));
                }
            }
            Command::Conditional(a) => {
                let beta = need(a.beta, "--beta")?;
                if !(beta.is_finite() && beta > 0.0) {
                    return bad(format!("--beta must be positive, got {beta}"));
                }
            }
            Command::Wigner(a) => {
                need_path(&a.input, "--in")?;
                if !(a.range.is_finite() && a.range > 0.0) || a.grid < 3 {
                    return bad(format!("need --range > 0 and --grid >= 3, got {} and {}", a.range, a.grid));
                }
            }
            Command::Sweep(a) => {
                if a.betas.is_empty() || a.betas.iter().any(|&b| !(b.is_finite() && b > 0.0)) {
                    return bad(format!("--betas must be a non-empty list of positive values, got {:?}", a.betas));
                }
            }
            Command::Fit(a) => {
                need_path(&a.input, "--input")?;
                need(a.law, "--law")?;
            }
            Command::Feasibility(a) => {
                PlatformParams::from(a).validate()?;
            }
        }
        Ok(())
    }
}

impl From<&FeasibilityArgs> for PlatformParams {
    fn from(a: &FeasibilityArgs) -> Self {
        Self {
            chi2: a.chi2,
            n_s: a.ns,
            n_p: a.np,
            wavelength_s: a.lambda_s,
            mode_volume: a.volume,
            q: a.q,
            beta: a.beta,
        }
    }
}

/// Entry point shared by the binary and the tests: resolves the config,
/// validates, configures the worker pool and runs the command.
pub fn run(cli: Cli) -> Result<()> {
    let cli = cli.resolve()?;
    cli.validate()?;
    if let Some(n) = cli.workers {
        // A pool that already exists (tests, repeated calls) is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut buf = Vec::new();
    let warnings = execute(&cli, &mut buf)?;
    match &cli.out {
        Some(path) => {
            let mut f = BufWriter::new(File::create(path)?);
            f.write_all(&buf)?;
            f.flush()?;
        }
        None => match io::stdout().lock().write_all(&buf) {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {}
            other => other?,
        },
    }
    warnings
}

/// Writes the command's artifact into `out`. The inner result carries
/// failures that still produced partial output (sweep points).
fn execute(cli: &Cli, out: &mut Vec<u8>) -> Result<Result<()>> {
    let eps = cli.eps_tail;
    match &cli.command {
        Command::Evolve(a) => {
            let records = energy_series(need(a.beta, "--beta")?, &tau_grid(a.tau_max, a.steps), eps)?;
            write_energy_csv(&mut *out, &records)?;
        }
        Command::Distribution(a) => {
            let beta = need(a.beta, "--beta")?;
            let tau = match a.tau {
                Some(t) => t,
                None if beta == 0.0 => 0.0,
                None => signal_peak_time(beta, a.tau_max, eps)?.0,
            };
            let s0 = initial_block_state(beta, eps)?;
            let state = evolve(&s0, tau, &SpectrumCache::new())?;
            writeln!(out, "n,probability")?;
            for (n, p) in signal_distribution(&state).iter().enumerate() {
                writeln!(out, "{n},{}", csvfmt::sci(*p))?;
            }
        }
        Command::Pcurve(a) => {
            let curve = p_zero_curve(need(a.beta, "--beta")?, &tau_grid(a.tau_max, a.steps), eps)?;
            write_pcurve_csv(&mut *out, &curve)?;
        }
        Command::Conditional(a) => {
            let search = TauSearch {
                eps_tail: eps,
                ..Default::default()
            };
            let r = find_tau_opt_with(need(a.beta, "--beta")?, &search)?;
            if !r.in_fit_range {
                eprintln!("warning: beta = {} lies outside the fit-law range [2, 100]", r.beta);
            }
            serde_json::to_writer_pretty(&mut *out, &r)?;
            writeln!(out)?;
        }
        Command::Wigner(a) => {
            let psi = read_state(need_path(&a.input, "--in")?)?;
            let grid = wigner(
                &psi,
                &WignerGridSpec {
                    range: a.range,
                    points: a.grid,
                },
            )?;
            write_wigner_csv(&mut *out, &grid)?;
        }
        Command::Sweep(a) => {
            for b in fits::out_of_range(&a.betas) {
                eprintln!("warning: beta = {b} lies outside the fit-law range [2, 100]");
            }
            let mut result = sweep(&a.betas, eps);
            if a.no_timing {
                result.records.iter_mut().for_each(|r| r.seconds = 0.0);
            }
            write_sweep_csv(&mut *out, &result.records)?;
            if !result.failures.is_empty() {
                let detail: Vec<String> = result.failures.iter().map(|f| format!("beta = {}: {}", f.beta, f.error)).collect();
                return Ok(Err(Error::Domain(format!(
                    "{} sweep point(s) failed: {}",
                    detail.len(),
                    detail.join("; ")
                ))));
            }
        }
        Command::Fit(a) => {
            let records = read_sweep_csv(File::open(need_path(&a.input, "--input")?)?)?;
            let opts = NlsOptions {
                seed: cli.seed,
                ..Default::default()
            };
            let model = fits::fit_law(need(a.law, "--law")?.into(), &records, &opts)?;
            serde_json::to_writer_pretty(&mut *out, &FitReport::new(&model, &records))?;
            writeln!(out)?;
        }
        Command::Feasibility(a) => {
            let report = feasibility::report(&PlatformParams::from(a))?;
            serde_json::to_writer_pretty(&mut *out, &report)?;
            writeln!(out)?;
        }
    }
    Ok(Ok(()))
}

/// Reads either a `conditional` document or a bare Fock-vector JSON.
pub fn read_state(path: &Path) -> Result<FockVector> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("state").is_some() {
        let r: HeraldResult = serde_json::from_value(value)?;
        Ok(r.psi_raw)
    } else {
        Ok(serde_json::from_value(value)?)
    }
}

/// Exit status for a finished run: 0 ok, 2 bad configuration, 3 numerical.
pub fn exit_code(result: &Result<()>) -> i32 {
    match result {
        Ok(()) => 0,
        Err(e) if e.is_config_error() => 2,
        Err(_) => 3,
    }
}
