// SPDX-License-Identifier: MIT OR Apache-2.0

//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error (bad flags or parameter values),
//! 2 data error (unreadable or malformed input, numerical failure).

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{FusedError, Result};
use crate::experiments::{recovery_probability, ExperimentConfig, Method};
use crate::flsa_solver::{apply_lambda1, flsa_fit, flsa_path};
use crate::ic_checker::{ic_magnitudes, lasso_recovery_bound, support_from_signal};
use crate::io;
use crate::puffer_lasso::{preconditioned_fit, preconditioned_recovery_bound, ThresholdPath};
use crate::signal_model::{benchmark_signal, sample_noisy_stream, StepwiseSignal};

/// Environment variable supplying the default seed.
pub const SEED_ENV: &str = "FUSED_PATTERN_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "fused-pattern",
    version,
    about = "Pattern recovery for blocky signals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fused lasso signal approximator at (λ₁, λ₂) on a sequence CSV.
    Fit(FitArgs),
    /// Preconditioned fit at λ; optionally writes the breakpoints.
    Precondition(PreconditionArgs),
    /// Merge events (flsa) or breakpoints (preconditioned) as CSV.
    Path(PathArgs),
    /// Irrepresentable-condition report for a signal-blocks CSV.
    CheckIc(CheckIcArgs),
    /// Noisy draws from a signal-blocks CSV.
    Simulate(SimulateArgs),
    /// Recovery probability over a noise grid.
    Sweep(SweepArgs),
    /// Sign-recovery lower bounds.
    Bound(BoundArgs),
}

#[derive(Debug, Args)]
struct Output {
    /// Output file (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    lambda1: f64,
    #[arg(long)]
    lambda2: f64,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct PreconditionArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long)]
    lambda: f64,
    /// Also write the breakpoints (`rank,lambda`) here.
    #[arg(long)]
    breakpoints: Option<PathBuf>,
    #[command(flatten)]
    out: Output,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Flsa,
    Preconditioned,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Flsa => Method::Flsa,
            MethodArg::Preconditioned => Method::Preconditioned,
        }
    }
}

#[derive(Debug, Args)]
struct PathArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "flsa")]
    method: MethodArg,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct CheckIcArgs {
    /// Blocks CSV (`L,U,level`).
    #[arg(short, long)]
    signal: PathBuf,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(short, long)]
    signal: PathBuf,
    #[arg(long)]
    sigma: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of draws; more than one yields columns `value_1..value_k`.
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Blocks CSV; the built-in seven-block benchmark when omitted.
    #[arg(short, long)]
    signal: Option<PathBuf>,
    /// Comma-separated noise levels.
    #[arg(long, value_delimiter = ',', required = true)]
    sigmas: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "preconditioned")]
    method: MethodArg,
    /// Zero tolerance for reading signs off fits.
    #[arg(long)]
    tol: Option<f64>,
    /// Full result (config, per-replicate flags) as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    #[command(flatten)]
    out: Output,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BoundKind {
    /// `1 − 2n·exp(−λ²/(8σ²))` for the preconditioned fit.
    Preconditioned,
    /// General lasso bound on the centred difference design.
    Lasso,
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[arg(long, value_enum, default_value = "preconditioned")]
    kind: BoundKind,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    sigma: f64,
    /// Sequence length (preconditioned bound only).
    #[arg(long, conflicts_with = "signal")]
    n: Option<usize>,
    /// Blocks CSV; supplies n and the jump structure.
    #[arg(short, long)]
    signal: Option<PathBuf>,
    /// Digits after the decimal point.
    #[arg(long, default_value_t = 4)]
    digits: usize,
}

/// Runs the tool on `argv` (including the program name) with the process's
/// standard streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Like [`run`] with explicit output streams.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e {
                FusedError::InvalidParameter(_) => 1,
                _ => 2,
            }
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Fit(a) => {
            let y = io::read_sequence_file(&a.input)?;
            let path = flsa_path(&y)?;
            let fit = apply_lambda1(&flsa_fit(&path, a.lambda2)?, a.lambda1)?;
            with_output(&a.out, stdout, |w| io::write_sequence(w, &fit))
        }
        Command::Precondition(a) => {
            let y = io::read_sequence_file(&a.input)?;
            let fit = preconditioned_fit(&y, a.lambda)?;
            if let Some(p) = &a.breakpoints {
                io::write_breakpoints(create(p)?, &fit.breakpoints)?;
            }
            with_output(&a.out, stdout, |w| io::write_sequence(w, &fit.mu_hat))
        }
        Command::Path(a) => {
            let y = io::read_sequence_file(&a.input)?;
            match Method::from(a.method) {
                Method::Flsa => {
                    let path = flsa_path(&y)?;
                    with_output(&a.out, stdout, |w| io::write_merge_events(w, &path))
                }
                Method::Preconditioned => {
                    let path = ThresholdPath::new(&y)?;
                    with_output(&a.out, stdout, |w| {
                        io::write_breakpoints(w, &path.breakpoints)
                    })
                }
            }
        }
        Command::CheckIc(a) => {
            let signal = io::read_signal_file(&a.signal)?;
            let report = ic_magnitudes(&support_from_signal(&signal))?;
            with_output(&a.out, stdout, |w| io::write_json(w, &report))
        }
        Command::Simulate(a) => {
            let signal = io::read_signal_file(&a.signal)?;
            if a.reps == 0 {
                return Err(FusedError::InvalidParameter("reps must be >= 1".into()));
            }
            let seed = resolve_seed(a.seed)?;
            let draws = (0..a.reps)
                .map(|r| sample_noisy_stream(&signal, a.sigma, seed, r as u64).map(|s| s.values))
                .collect::<Result<Vec<_>>>()?;
            with_output(&a.out, stdout, |w| io::write_sequences(w, &draws))
        }
        Command::Sweep(a) => {
            let signal = match &a.signal {
                Some(p) => io::read_signal_file(p)?,
                None => benchmark_signal(),
            };
            let mut config = ExperimentConfig::new(
                signal,
                a.sigmas.clone(),
                a.reps,
                resolve_seed(a.seed)?,
                a.method.into(),
            )?;
            if let Some(tol) = a.tol {
                config.tol = tol;
                config.validate()?;
            }
            let result = recovery_probability(&config)?;
            if let Some(p) = &a.json {
                io::write_json(create(p)?, &result)?;
            }
            with_output(&a.out, stdout, |w| io::write_sweep(w, &result.rows()))
        }
        Command::Bound(a) => bound(a, stdout),
    }
}

fn bound(a: BoundArgs, stdout: &mut dyn Write) -> Result<()> {
    let signal: Option<StepwiseSignal> =
        a.signal.as_deref().map(io::read_signal_file).transpose()?;
    let digits = a.digits;
    match a.kind {
        BoundKind::Preconditioned => {
            let n = match (&signal, a.n) {
                (Some(s), _) => s.len(),
                (None, Some(n)) => n,
                (None, None) => {
                    return Err(FusedError::InvalidParameter("give --n or --signal".into()));
                }
            };
            let value = preconditioned_recovery_bound(a.lambda, a.sigma, n)?;
            writeln!(stdout, "{value:.digits$}")?;
            if let Some(s) = &signal {
                let valid = s.min_jump().is_none_or(|m| m >= 2.0 * a.lambda);
                writeln!(stdout, "jump_condition={valid}")?;
            }
        }
        BoundKind::Lasso => {
            let s = signal.ok_or_else(|| {
                FusedError::InvalidParameter("the lasso bound needs --signal".into())
            })?;
            if a.sigma.is_nan() || a.sigma <= 0.0 {
                return Err(FusedError::InvalidParameter(format!(
                    "sigma must be > 0, got {}",
                    a.sigma
                )));
            }
            let report = ic_magnitudes(&support_from_signal(&s))?;
            if report.eta <= crate::ic_checker::IC_STRICT_MARGIN {
                return Err(FusedError::InvalidSetup(format!(
                    "condition fails (max signed magnitude {:.6}); the bound does not apply",
                    report.max_signed
                )));
            }
            let design = crate::design_transform::centered_design_dense(s.len())?;
            let theta = crate::design_transform::differences(&s.expected());
            // centring leaves the noise covariance σ²(I − 11ᵀ/n), top eigenvalue σ²
            let b = lasso_recovery_bound(
                &design,
                &theta,
                a.lambda,
                a.sigma * a.sigma,
                report.eta.min(1.0),
            )?;
            writeln!(stdout, "probability={:.digits$}", b.probability)?;
            writeln!(stdout, "psi={:.digits$}", b.psi)?;
            writeln!(stdout, "min_signal={:.digits$}", b.min_signal)?;
            writeln!(stdout, "condition_ok={}", b.condition_ok)?;
        }
    }
    Ok(())
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| FusedError::InvalidParameter(format!("{SEED_ENV}={v:?} is not a seed"))),
        Err(_) => Ok(0),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn with_output<F>(out: &Output, stdout: &mut dyn Write, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match &out.output {
        Some(p) => {
            let mut w = create(p)?;
            body(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => body(stdout),
    }
}
