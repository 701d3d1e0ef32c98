//! `phm simulate`: run a scenario into a labeled data file.

use super::{ensure_out_dir, write_json};
use crate::manifest::RunManifest;
use crate::{BuiltinScenario, CliError};
use phm_core::dataset::{export, run_scenario};
use phm_core::scenario::{ten_day_demo, twenty_day_filter_cycles, ScenarioConfig};
use std::path::{Path, PathBuf};

pub struct Args {
    pub config: Option<PathBuf>,
    pub builtin: BuiltinScenario,
    pub out: PathBuf,
    pub seed: Option<u64>,
}

pub fn run(args: &Args) -> Result<(), CliError> {
    let mut scenario = match &args.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => match args.builtin {
            BuiltinScenario::TenDay => ten_day_demo(),
            BuiltinScenario::TwentyDay => twenty_day_filter_cycles(),
        },
    };
    if let Some(seed) = args.seed {
        scenario.sim.seed = seed;
    }

    let series = run_scenario(&scenario.sim, &scenario.faults, &scenario.drifts)?;

    ensure_out_dir(&args.out)?;
    let data_path = args.out.join("data.csv");
    export(&series, &data_path)?;

    let summary_path = args.out.join("scenario.json");
    write_json(
        &summary_path,
        &serde_json::json!({
            "duration_hours": scenario.sim.duration_hours,
            "seed": scenario.sim.seed,
            "n_faults": scenario.faults.len(),
            "n_drifts": scenario.drifts.len(),
            "anomalous_hours": series.records().iter().filter(|r| r.truth.anomaly).count(),
        }),
    )?;

    let mut manifest = RunManifest::new("simulate");
    manifest.config_path = args.config.clone();
    manifest.seed = Some(scenario.sim.seed);
    manifest.record_artifact(&data_path);
    manifest.record_artifact(&summary_path);
    write_manifest(&manifest, &args.out)?;

    println!(
        "simulate: wrote {} rows to {}",
        series.len(),
        data_path.display()
    );
    Ok(())
}

pub(super) fn write_manifest(manifest: &RunManifest, out: &Path) -> Result<(), CliError> {
    manifest
        .write(out)
        .map_err(|e| CliError::Other(format!("cannot write manifest: {e}")))
}
