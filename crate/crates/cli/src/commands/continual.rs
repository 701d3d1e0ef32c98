//! `phm continual`: the evaluation-feedback-update loop with per-cycle
//! accuracy output.

use super::simulate::write_manifest;
use super::{
    agent_config, ensure_out_dir, load_series, make_provider, transcript_path, write_json,
};
use crate::manifest::RunManifest;
use crate::{CliError, MockSpec};
use phm_core::agents::{Agent, Architecture, RecordingProvider, ReferenceData};
use phm_core::continual::run_cycles;
use phm_core::dataset::{ReferenceMode, ReprMode};
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Duration;

pub struct Args {
    pub data: PathBuf,
    pub out: PathBuf,
    pub window: usize,
    pub repr: ReprMode,
    pub reference: ReferenceMode,
    pub model: String,
    pub mock: Option<MockSpec>,
    pub cycle_hours: usize,
    pub memory_cap: usize,
    pub max_retries: u32,
}

pub fn run(args: &Args) -> Result<(), CliError> {
    let series = load_series(&args.data)?;
    ensure_out_dir(&args.out)?;

    let provider = make_provider(args.mock.as_ref(), &series, Duration::from_secs(60))?;
    let recorder = RecordingProvider::create(&*provider, &transcript_path(&args.out))?;
    let cfg = agent_config(
        &args.model,
        Architecture::Centralized,
        args.repr,
        args.reference,
        args.window,
        args.max_retries,
    );
    let reference = (args.reference != ReferenceMode::None)
        .then(|| ReferenceData::from_clean_prefix(&series))
        .transpose()?;
    let agent = Agent::new(cfg, &recorder, reference)?;

    let reports = run_cycles(&series, &agent, args.cycle_hours, args.memory_cap)?;

    let cycles_path = args.out.join("cycles.json");
    write_json(&cycles_path, &reports)?;

    let mut csv = String::from("cycle,accuracy,n_evaluated,n_failed,memory_size\n");
    for report in &reports {
        writeln!(
            csv,
            "{},{},{},{},{}",
            report.cycle,
            report.accuracy,
            report.n_evaluated,
            report.n_failed,
            report.feedback_memory_size
        )
        .expect("string write");
    }
    let accuracy_path = args.out.join("accuracy.csv");
    std::fs::write(&accuracy_path, csv)
        .map_err(|e| CliError::Other(format!("cannot write {}: {e}", accuracy_path.display())))?;

    let mut manifest = RunManifest::new("continual");
    manifest.data_path = Some(args.data.clone());
    manifest.record_artifact(&cycles_path);
    manifest.record_artifact(&accuracy_path);
    manifest.record_artifact(&transcript_path(&args.out));
    write_manifest(&manifest, &args.out)?;

    let mean_accuracy =
        reports.iter().map(|r| r.accuracy).sum::<f64>() / reports.len().max(1) as f64;
    println!(
        "continual: {} cycles, mean accuracy {:.3}, final memory {}",
        reports.len(),
        mean_accuracy,
        reports.last().map(|r| r.feedback_memory_size).unwrap_or(0)
    );
    Ok(())
}
