//! `qhet`: closed forms, sweeps, Monte-Carlo runs and cross-validation for
//! heterodyne detection with a phase-insensitive parametric pre-amplifier.
//!
//! Exit codes: 0 success, 1 validation failure, 2 configuration error,
//! 3 domain error. `QHET_THREADS` caps the worker-thread count.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qhet_core::QhetError;

#[derive(Parser, Debug)]
#[command(name = "qhet", version, about = "Heterodyne detection with quantum-correlated image band")]
pub struct Cli {
    /// Scenario file (`key = value` lines); the built-in optical scenario if omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file or directory, depending on the subcommand.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Base RNG seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Overrides the scenario's unit system.
    #[arg(long, global = true, value_enum)]
    pub unit_system: Option<Units>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Units {
    Scaled,
    Si,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate one closed-form quantity.
    Analytic(AnalyticArgs),
    /// Run a parameter sweep file.
    Sweep(SweepArgs),
    /// Synthesize a photocurrent record and measure its noise figure.
    Simulate(SimulateArgs),
    /// Run the cross-method validation suite.
    Validate(ValidateArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    SnrIn,
    SnrOut,
    POut,
    /// Beat amplitude, or J₋(t) with --t.
    Beat,
    #[value(name = "F")]
    F,
    Chi,
    Nf,
    NfRegular,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Form {
    Exact,
    HighGain,
}

#[derive(Args, Debug)]
pub struct AnalyticArgs {
    pub quantity: Quantity,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub theta_l: Option<f64>,
    /// Analysis frequency for F and chi; the beat frequency if omitted.
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    #[arg(long, value_enum, default_value_t = Form::Exact)]
    pub form: Form,
    /// Quantum efficiency for nf-regular.
    #[arg(long)]
    pub xi: Option<f64>,
    /// Time for `beat`.
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// Any scenario key, e.g. `--set gain_db=45`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    pub sweep_file: PathBuf,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Record duration; 2^24 samples at the sample rate if omitted.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Sample rate; 16 samples per beat period if omitted.
    #[arg(long)]
    pub sample_rate: Option<f64>,
    #[arg(long, default_value_t = 4096)]
    pub segment_len: usize,
    /// Also write the record as CSV (t, value).
    #[arg(long)]
    pub csv_record: bool,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long, default_value = "quick")]
    pub level: String,
}

/// A failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn validation(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<QhetError> for Failure {
    fn from(e: QhetError) -> Self {
        let code = match e {
            QhetError::Parse { .. } | QhetError::Validation { .. } => 2,
            QhetError::Io(_) => 2,
            _ => 3,
        };
        Failure { code, message: e.to_string() }
    }
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("QHET_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::config(format!("QHET_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::config(format!("cannot size thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|_| commands::run(&cli));
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("qhet: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
