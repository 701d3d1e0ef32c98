//! Command-line entry point for the HVAC fault-diagnosis benchmark.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 provider
//! error, 1 anything else.

mod commands;
mod manifest;

use clap::{Parser, Subcommand, ValueEnum};
use phm_core::agents::{Architecture, ProviderError};
use phm_core::dataset::{ReferenceMode, ReprMode};
use phm_core::error::{ConfigError, DataError, EvalError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
    Provider(String),
    Other(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Provider(_) => 4,
            CliError::Other(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m)
            | CliError::Data(m)
            | CliError::Provider(m)
            | CliError::Other(m) => m,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ProviderError> for CliError {
    fn from(e: ProviderError) -> Self {
        match e {
            ProviderError::NotConfigured(m) => CliError::Config(m),
            other => CliError::Provider(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::EmptyGrid => CliError::Config(e.to_string()),
            other => CliError::Other(other.to_string()),
        }
    }
}

/// Offline provider selection: `oracle` or `transcript:<path>`.
#[derive(Debug, Clone)]
pub enum MockSpec {
    Oracle,
    Transcript(PathBuf),
}

fn parse_mock(s: &str) -> Result<MockSpec, String> {
    if s == "oracle" {
        return Ok(MockSpec::Oracle);
    }
    if let Some(path) = s.strip_prefix("transcript:") {
        if path.is_empty() {
            return Err("transcript mock needs a path: transcript:<path>".into());
        }
        return Ok(MockSpec::Transcript(PathBuf::from(path)));
    }
    Err(format!(
        "unknown mock `{s}` (expected `oracle` or `transcript:<path>`)"
    ))
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DetectorKindArg {
    Rule,
    Agent,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReprArg {
    Raw,
    Stats,
    Both,
}

impl From<ReprArg> for ReprMode {
    fn from(r: ReprArg) -> Self {
        match r {
            ReprArg::Raw => ReprMode::RawData,
            ReprArg::Stats => ReprMode::Statistics,
            ReprArg::Both => ReprMode::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReferenceArg {
    None,
    Raw,
    Stats,
    Both,
}

impl From<ReferenceArg> for ReferenceMode {
    fn from(r: ReferenceArg) -> Self {
        match r {
            ReferenceArg::None => ReferenceMode::None,
            ReferenceArg::Raw => ReferenceMode::RawData,
            ReferenceArg::Stats => ReferenceMode::Statistics,
            ReferenceArg::Both => ReferenceMode::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ArchArg {
    Centralized,
    Decentralized,
}

impl From<ArchArg> for Architecture {
    fn from(a: ArchArg) -> Self {
        match a {
            ArchArg::Centralized => Architecture::Centralized,
            ArchArg::Decentralized => Architecture::Decentralized,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BuiltinScenario {
    /// Ten days, three overlapping faults with mixed onsets.
    TenDay,
    /// Twenty days of recurring filter blockage for continual learning.
    TwentyDay,
}

#[derive(Parser)]
#[command(
    name = "phm",
    version,
    about = "HVAC simulator and fault-diagnosis benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario into a labeled data file.
    Simulate {
        /// Scenario TOML; defaults to a built-in schedule.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Built-in schedule used when no config is given.
        #[arg(long, value_enum, default_value = "ten-day", conflicts_with = "config")]
        builtin: BuiltinScenario,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Detect anomalies per sliding window.
    Detect {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value = "rule")]
        detector: DetectorKindArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 36)]
        window: usize,
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long, value_enum, default_value = "stats")]
        repr: ReprArg,
        #[arg(long, value_enum, default_value = "none")]
        reference: ReferenceArg,
        #[arg(long, default_value = "gpt-4.1-nano")]
        model: String,
        /// Offline provider: `oracle` or `transcript:<path>`.
        #[arg(long, value_parser = parse_mock)]
        mock: Option<MockSpec>,
        #[arg(long, default_value_t = 2)]
        max_retries: u32,
    },
    /// Run the full detection + fault-classification pipeline.
    Classify {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value = "rule")]
        detector: DetectorKindArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 36)]
        window: usize,
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long, value_enum, default_value = "stats")]
        repr: ReprArg,
        #[arg(long, value_enum, default_value = "none")]
        reference: ReferenceArg,
        #[arg(long, value_enum, default_value = "centralized")]
        arch: ArchArg,
        #[arg(long, default_value = "gpt-4.1-nano")]
        model: String,
        #[arg(long, value_parser = parse_mock)]
        mock: Option<MockSpec>,
        #[arg(long, default_value_t = 2)]
        max_retries: u32,
    },
    /// Run continual-learning cycles with prompt feedback.
    Continual {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 24)]
        window: usize,
        #[arg(long, value_enum, default_value = "stats")]
        repr: ReprArg,
        #[arg(long, value_enum, default_value = "none")]
        reference: ReferenceArg,
        #[arg(long, default_value = "gpt-4.1-nano")]
        model: String,
        #[arg(long, value_parser = parse_mock)]
        mock: Option<MockSpec>,
        #[arg(long, default_value_t = 24)]
        cycle_hours: usize,
        #[arg(long, default_value_t = phm_core::continual::DEFAULT_MEMORY_CAP)]
        memory_cap: usize,
        #[arg(long, default_value_t = 2)]
        max_retries: u32,
    },
    /// Run an experiment grid from a TOML config.
    Grid {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_parser = parse_mock)]
        mock: Option<MockSpec>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            config,
            builtin,
            out,
            seed,
        } => commands::simulate::run(&commands::simulate::Args {
            config,
            builtin,
            out,
            seed,
        }),
        Command::Detect {
            data,
            detector,
            out,
            window,
            stride,
            repr,
            reference,
            model,
            mock,
            max_retries,
        } => commands::detect::run(&commands::detect::Args {
            data,
            detector,
            out,
            window,
            stride,
            repr: repr.into(),
            reference: reference.into(),
            model,
            mock,
            max_retries,
        }),
        Command::Classify {
            data,
            detector,
            out,
            window,
            stride,
            repr,
            reference,
            arch,
            model,
            mock,
            max_retries,
        } => commands::classify::run(&commands::classify::Args {
            data,
            detector,
            out,
            window,
            stride,
            repr: repr.into(),
            reference: reference.into(),
            arch: arch.into(),
            model,
            mock,
            max_retries,
        }),
        Command::Continual {
            data,
            out,
            window,
            repr,
            reference,
            model,
            mock,
            cycle_hours,
            memory_cap,
            max_retries,
        } => commands::continual::run(&commands::continual::Args {
            data,
            out,
            window,
            repr: repr.into(),
            reference: reference.into(),
            model,
            mock,
            cycle_hours,
            memory_cap,
            max_retries,
        }),
        Command::Grid { config, out, mock } => {
            commands::grid::run(&commands::grid::Args { config, out, mock })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
