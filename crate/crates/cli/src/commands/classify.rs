//! `phm classify`: the full two-stage pipeline with fault metrics.

use super::simulate::write_manifest;
use super::{
    agent_config, ensure_out_dir, load_series, make_provider, transcript_path, write_json,
    write_outcomes,
};
use crate::manifest::RunManifest;
use crate::{CliError, DetectorKindArg, MockSpec};
use phm_core::agents::{
    run_windows, Agent, Architecture, RecordingProvider, ReferenceData, DEFAULT_IN_FLIGHT,
};
use phm_core::baseline::run_rule_pipeline;
use phm_core::dataset::{ReferenceMode, ReprMode};
use phm_core::diagnosis::WindowOutcome;
use phm_core::eval::score_outcomes;
use std::path::PathBuf;
use std::time::Duration;

pub struct Args {
    pub data: PathBuf,
    pub detector: DetectorKindArg,
    pub out: PathBuf,
    pub window: usize,
    pub stride: usize,
    pub repr: ReprMode,
    pub reference: ReferenceMode,
    pub arch: Architecture,
    pub model: String,
    pub mock: Option<MockSpec>,
    pub max_retries: u32,
}

pub fn run(args: &Args) -> Result<(), CliError> {
    let series = load_series(&args.data)?;
    ensure_out_dir(&args.out)?;

    let outcomes: Vec<WindowOutcome> = match args.detector {
        DetectorKindArg::Rule => run_rule_pipeline(&series, args.window, args.stride)?,
        DetectorKindArg::Agent => {
            let provider = make_provider(args.mock.as_ref(), &series, Duration::from_secs(60))?;
            let recorder = RecordingProvider::create(&*provider, &transcript_path(&args.out))?;
            let cfg = agent_config(
                &args.model,
                args.arch,
                args.repr,
                args.reference,
                args.window,
                args.max_retries,
            );
            let reference = (args.reference != ReferenceMode::None)
                .then(|| ReferenceData::from_clean_prefix(&series))
                .transpose()?;
            let agent = Agent::new(cfg, &recorder, reference)?;
            run_windows(&series, &agent, args.stride, DEFAULT_IN_FLIGHT)
        }
    };

    if outcomes.is_empty() {
        return Err(CliError::Data(format!(
            "no windows: series has {} rows, window is {}",
            series.len(),
            args.window
        )));
    }
    let total = outcomes.len();
    let failed = outcomes
        .iter()
        .filter(|o| matches!(o, WindowOutcome::Failed { .. }))
        .count();
    if failed == total {
        return Err(CliError::Provider(format!(
            "all {total} windows failed at transport level"
        )));
    }

    let scores = score_outcomes(&series, &outcomes)?;
    let results_path = args.out.join("windows.jsonl");
    write_outcomes(&results_path, &outcomes)?;
    let metrics_path = args.out.join("metrics.json");
    write_json(&metrics_path, &scores)?;

    let mut manifest = RunManifest::new("classify");
    manifest.data_path = Some(args.data.clone());
    manifest.record_artifact(&results_path);
    manifest.record_artifact(&metrics_path);
    if matches!(args.detector, DetectorKindArg::Agent) {
        manifest.record_artifact(&transcript_path(&args.out));
    }
    write_manifest(&manifest, &args.out)?;

    println!(
        "classify: {} windows ({} failed) anomaly f1 {:.3}; fault micro f1 {:.3} macro f1 {:.3}",
        total, failed, scores.anomaly.f1, scores.faults.micro.f1, scores.faults.macro_f1
    );
    Ok(())
}
