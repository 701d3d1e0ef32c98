//! Subcommand implementations and shared plumbing.

pub mod classify;
pub mod continual;
pub mod detect;
pub mod grid;
pub mod simulate;

use crate::{CliError, MockSpec};
use phm_core::agents::{
    AgentConfig, Architecture, CompletionProvider, HttpProvider, OracleProvider, TranscriptProvider,
};
use phm_core::dataset::{import, ReferenceMode, ReprMode, Representation, TimeSeries};
use phm_core::diagnosis::WindowOutcome;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

/// Creates the output directory (and parents) if needed.
pub fn ensure_out_dir(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::Other(format!("cannot create {}: {e}", out.display())))
}

pub fn load_series(path: &Path) -> Result<TimeSeries, CliError> {
    Ok(import(path)?)
}

/// Builds the completion provider for an agent run. Without `--mock`, the
/// HTTP provider is configured from the environment; missing variables are
/// an immediate configuration error.
pub fn make_provider(
    mock: Option<&MockSpec>,
    series: &TimeSeries,
    timeout: Duration,
) -> Result<Box<dyn CompletionProvider>, CliError> {
    match mock {
        Some(MockSpec::Oracle) => Ok(Box::new(OracleProvider::from_series(series))),
        Some(MockSpec::Transcript(path)) => Ok(Box::new(TranscriptProvider::load(path)?)),
        None => {
            let provider = HttpProvider::from_env(timeout).map_err(|e| {
                CliError::Config(format!(
                    "provider not configured (set {} and {}): {e}",
                    HttpProvider::URL_ENV,
                    HttpProvider::TOKEN_ENV
                ))
            })?;
            Ok(Box::new(provider))
        }
    }
}

pub fn agent_config(
    model: &str,
    arch: Architecture,
    repr: ReprMode,
    reference: ReferenceMode,
    window: usize,
    max_retries: u32,
) -> AgentConfig {
    AgentConfig {
        model_name: model.to_string(),
        architecture: arch,
        representation: Representation::new(repr, reference),
        window_size: window,
        max_retries,
        timeout: Duration::from_secs(60),
    }
}

/// Writes one serialized outcome per line.
pub fn write_outcomes(path: &Path, outcomes: &[WindowOutcome]) -> Result<(), CliError> {
    let mut file = std::fs::File::create(path)
        .map_err(|e| CliError::Other(format!("cannot write {}: {e}", path.display())))?;
    for outcome in outcomes {
        let line = serde_json::to_string(outcome)
            .map_err(|e| CliError::Other(format!("serialize outcome: {e}")))?;
        writeln!(file, "{line}")
            .map_err(|e| CliError::Other(format!("write {}: {e}", path.display())))?;
    }
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Other(format!("serialize: {e}")))?;
    std::fs::write(path, json)
        .map_err(|e| CliError::Other(format!("cannot write {}: {e}", path.display())))
}

pub fn transcript_path(out: &Path) -> PathBuf {
    out.join("transcripts.jsonl")
}
