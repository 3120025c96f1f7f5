//! `qwalk`: command-line front end for the lattice walk simulator.
//!
//! Exit status: 0 success, 2 invalid configuration, 3 numerical failure,
//! 4 I/O failure.

mod commands;
mod output;
mod spec;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::output::{real, real_list};
use crate::spec::NodeSpec;

#[derive(Debug, Parser)]
#[command(name = "qwalk", version, about = "Quantum and classical walks on square lattices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Transmission rate; sets the time unit.
    #[arg(long, global = true, default_value_t = 1.0, allow_negative_numbers = true)]
    pub gamma: f64,

    /// Output file; standard output when omitted.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "QWALK_JOBS")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryArg {
    Open,
    Periodic,
}

impl From<BoundaryArg> for qwalk::Boundary {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Open => qwalk::Boundary::Open,
            BoundaryArg::Periodic => qwalk::Boundary::Periodic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindArg {
    Quantum,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Sum over degeneracy classes of the spectrum.
    Formula,
    /// Trapezoidal average of the transition probability over [0, t-max].
    TimeAverage,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// Ascending eigenvalues of the connectivity matrix.
    Spectrum(SpectrumArgs),
    /// Transition probabilities over time, as a series or as full snapshots.
    Evolve(EvolveArgs),
    /// Long-time-averaged probability fields.
    Limiting(LimitingArgs),
    /// Corner versus opposite-corner limiting probabilities across sizes.
    Scan(ScanArgs),
    /// Size dependence of limiting probabilities with power-law fits (odd sizes).
    Scaling(ScalingArgs),
    /// Open-lattice probabilities next to periodic and infinite-lattice baselines.
    BlochCompare(BlochArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Evolve(_) => "evolve",
            Command::Limiting(_) => "limiting",
            Command::Scan(_) => "scan",
            Command::Scaling(_) => "scaling",
            Command::BlochCompare(_) => "bloch-compare",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    /// Lattice side lengths, comma separated.
    #[arg(long = "n", value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Open)]
    pub boundary: BoundaryArg,
    /// Add the periodic-lattice plane-wave spectrum and its difference.
    #[arg(long)]
    pub bloch: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct EvolveArgs {
    #[arg(long = "n")]
    pub size: usize,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Open)]
    pub boundary: BoundaryArg,
    /// corner, opposite-corner, middle or x,y.
    #[arg(long, default_value = "corner")]
    pub source: NodeSpec,
    /// Target node for a time series; full snapshots when omitted.
    #[arg(long)]
    pub observe: Option<NodeSpec>,
    #[arg(long, value_enum, default_value_t = KindArg::Quantum)]
    pub kind: KindArg,
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    #[serde(serialize_with = "real")]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
    #[serde(serialize_with = "real")]
    pub dt: f64,
    /// Explicit ascending times; overrides --t-max/--dt.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(serialize_with = "real_list")]
    pub times: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct LimitingArgs {
    #[arg(long = "n", value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Open)]
    pub boundary: BoundaryArg,
    #[arg(long, default_value = "corner")]
    pub source: NodeSpec,
    #[arg(long, value_enum, default_value_t = Method::Formula)]
    pub method: Method,
    /// Averaging window for --method time-average.
    #[arg(long, default_value_t = 1e4, allow_negative_numbers = true)]
    #[serde(serialize_with = "real")]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
    #[serde(serialize_with = "real")]
    pub dt: f64,
    /// Degeneracy tolerance relative to max(1, max|A|).
    #[arg(long, default_value_t = qwalk::spectral::DEFAULT_RELATIVE_TAU, allow_negative_numbers = true)]
    #[serde(serialize_with = "real")]
    pub tau: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 1)]
    pub n_min: usize,
    #[arg(long, default_value_t = 60)]
    pub n_max: usize,
    #[arg(long, default_value_t = qwalk::spectral::DEFAULT_RELATIVE_TAU, allow_negative_numbers = true)]
    #[serde(serialize_with = "real")]
    pub tau: f64,
    /// Threshold on |chi_cc - chi_oc| * N^2.
    #[arg(long, default_value_t = qwalk::limiting::DEFAULT_ETA, allow_negative_numbers = true)]
    #[serde(serialize_with = "real")]
    pub eta: f64,
    /// Largest side length the scan accepts.
    #[arg(long, default_value_t = qwalk::limiting::DEFAULT_MAX_SIDE)]
    pub max_side: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ScalingArgs {
    /// Odd sizes within [n-min, n-max] are used.
    #[arg(long, default_value_t = 9)]
    pub n_min: usize,
    #[arg(long, default_value_t = 59)]
    pub n_max: usize,
    #[arg(long, default_value_t = qwalk::spectral::DEFAULT_RELATIVE_TAU, allow_negative_numbers = true)]
    #[serde(serialize_with = "real")]
    pub tau: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct BlochArgs {
    #[arg(long = "n", value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    /// Repeat to compare several sources.
    #[arg(long, default_value = "corner")]
    pub source: Vec<NodeSpec>,
    /// Target node; the source itself (return probability) when omitted.
    #[arg(long)]
    pub observe: Option<NodeSpec>,
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    #[serde(serialize_with = "real")]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
    #[serde(serialize_with = "real")]
    pub dt: f64,
}

#[derive(Debug)]
pub enum Failure {
    Config(Vec<String>),
    Numerical(String),
    Io(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io(_) => 4,
        }
    }
}

impl From<qwalk::Error> for Failure {
    fn from(e: qwalk::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Config(vec![e.to_string()])
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(format!("serializing output: {e}"))
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let mut problems = Vec::new();
    if !(cli.gamma > 0.0 && cli.gamma.is_finite()) {
        problems.push(format!("--gamma must be positive and finite, got {}", cli.gamma));
    }
    if cli.jobs == Some(0) {
        problems.push("--jobs must be at least 1".to_string());
    }
    problems.extend(commands::validate(&cli.command, cli.gamma));
    if !problems.is_empty() {
        return Err(Failure::Config(problems));
    }

    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Config(vec![format!("cannot start {jobs} workers: {e}")]))?;
    }

    let rendered = commands::execute(cli)?;
    for line in &rendered.notes {
        eprintln!("{line}");
    }
    match &cli.output {
        Some(path) => fs::write(path, &rendered.bytes)
            .map_err(|e| Failure::Io(format!("writing {}: {e}", path.display()))),
        None => io::stdout()
            .lock()
            .write_all(&rendered.bytes)
            .map_err(|e| Failure::Io(format!("writing standard output: {e}"))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Config(problems) => {
                    eprintln!("error: invalid configuration");
                    for p in problems {
                        eprintln!("  - {p}");
                    }
                }
                Failure::Numerical(msg) => eprintln!("error: numerical failure: {msg}"),
                Failure::Io(msg) => eprintln!("error: {msg}"),
            }
            ExitCode::from(failure.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_errors_map_to_exit_codes() {
        let numerical = qwalk::Error::NumericalFailure {
            iterations: 60,
            residual: 1.0,
        };
        assert_eq!(Failure::from(numerical.at_size(7)).exit_code(), 3);
        let domain = qwalk::Error::Domain("bad".into());
        assert_eq!(Failure::from(domain).exit_code(), 2);
        assert_eq!(Failure::Io(String::new()).exit_code(), 4);
    }
}
