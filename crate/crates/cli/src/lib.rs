//! Experiment runner for the fractional random walk.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod commands;
mod output;

pub use output::{parse_primes, PrimeSet};

#[derive(Debug, Parser, Serialize)]
#[command(name = "fracwalk", version, about = "Experiments on the walk X -> 1/X + e over F_p")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads; does not affect results.
    #[arg(long, global = true, env = "FRACWALK_THREADS")]
    #[serde(skip)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// TV distance to uniform against the entropy and spectral bounds.
    Mix(MixArgs),
    /// Second eigenvalues of Q, L0, L and the Cayley walk.
    Spectrum(SpectrumArgs),
    /// Comparison constants and the gap chain Q -> L0 -> L.
    Compare(CompareArgs),
    /// Solutions of xy = 1 (mod p) in interval boxes.
    Hyperbola(HyperbolaArgs),
    /// Size of the subgroup of SL2(F_p) generated by the four generators.
    Generate(GenerateArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct WalkArgs {
    /// Step law: u01, u-101, or value:prob pairs such as "0:0.25,1:0.75".
    #[arg(long, default_value = "u01", allow_hyphen_values = true)]
    pub mu: String,

    /// Override a1 (requires --a2).
    #[arg(long, requires = "a2", allow_hyphen_values = true)]
    pub a1: Option<i64>,

    #[arg(long, requires = "a1", allow_hyphen_values = true)]
    pub a2: Option<i64>,
}

#[derive(Debug, Args, Serialize)]
pub struct MixArgs {
    /// A prime.
    #[arg(long)]
    pub p: String,

    #[arg(long, default_value = "u01", allow_hyphen_values = true)]
    pub mu: String,

    #[arg(long, default_value_t = 0.25)]
    pub eps: f64,

    /// Start state of the curve.
    #[arg(long, default_value_t = 0)]
    pub start: usize,

    /// Last step of the curve.
    #[arg(long, default_value_t = 64)]
    pub steps: usize,

    /// Mixing time from --start only instead of the worst start.
    #[arg(long)]
    pub single_start: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum KernelName {
    #[value(name = "Q")]
    Q,
    #[value(name = "L0")]
    L0,
    #[value(name = "L")]
    L,
    #[value(name = "cayley")]
    #[serde(rename = "cayley")]
    Cayley,
}

impl KernelName {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelName::Q => "Q",
            KernelName::L0 => "L0",
            KernelName::L => "L",
            KernelName::Cayley => "cayley",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    /// A prime or an inclusive range "a..b".
    #[arg(long)]
    pub p: String,

    #[command(flatten)]
    pub walk: WalkArgs,

    #[arg(long, value_enum, value_delimiter = ',', default_value = "Q,L0,L", ignore_case = true)]
    pub kernels: Vec<KernelName>,

    /// Write each kernel as JSON into this directory.
    #[arg(long)]
    pub dump_kernel: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    /// A prime or an inclusive range "a..b".
    #[arg(long)]
    pub p: String,

    #[command(flatten)]
    pub walk: WalkArgs,

    /// Random test functions per prime.
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct HyperbolaArgs {
    #[arg(long)]
    pub p: String,

    /// Interval length, or an inclusive range "a..b" of lengths.
    #[arg(long)]
    pub m: String,

    #[arg(long, default_value_t = 1)]
    pub stride: usize,

    /// Start of I; with --j, counts a single box instead of scanning.
    #[arg(long, requires = "j", allow_hyphen_values = true)]
    pub i: Option<i64>,

    #[arg(long, requires = "i", allow_hyphen_values = true)]
    pub j: Option<i64>,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    /// A prime or an inclusive range "a..b".
    #[arg(long)]
    pub p: String,

    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub a1: i64,

    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub b: i64,
}

/// Failure classes, mapped to exit codes 1 and 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Invariant(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Invariant(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Invariant(m) => m,
        }
    }
}

pub(crate) fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 1;
        }
    };
    let result = pool.install(|| commands::dispatch(&cli));
    let (text, failure) = match result {
        Ok(outcome) => (outcome.text, outcome.failure),
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            return e.code();
        }
    };
    let written = match &cli.output {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display())),
        None => out.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: {e}");
        return 1;
    }
    match failure {
        Some(f) => {
            let _ = writeln!(err, "violation: {f}");
            2
        }
        None => 0,
    }
}
