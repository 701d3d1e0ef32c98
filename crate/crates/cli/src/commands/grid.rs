//! `phm grid`: run an experiment grid from a TOML config.

use super::simulate::write_manifest;
use super::{ensure_out_dir, load_series, make_provider, write_json};
use crate::manifest::RunManifest;
use crate::{CliError, MockSpec};
use phm_core::eval::{run_grid, ExperimentGrid};
use serde::Deserialize;
use std::path::PathBuf;
use std::time::Duration;

pub struct Args {
    pub config: PathBuf,
    pub out: PathBuf,
    pub mock: Option<MockSpec>,
}

/// Grid file: the data path plus repeated `[[cell]]` blocks.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    data: PathBuf,
    #[serde(rename = "cell")]
    cells: Vec<phm_core::eval::GridCell>,
}

pub fn run(args: &Args) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let file: GridFile = toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;
    let grid = ExperimentGrid { cells: file.cells };
    grid.validate()?;

    // Data paths resolve relative to the grid file.
    let data_path = if file.data.is_relative() {
        args.config
            .parent()
            .map(|p| p.join(&file.data))
            .unwrap_or(file.data.clone())
    } else {
        file.data.clone()
    };
    let series = load_series(&data_path)?;
    ensure_out_dir(&args.out)?;

    let provider = make_provider(args.mock.as_ref(), &series, Duration::from_secs(60))?;
    let report = run_grid(&grid, &series, &*provider)?;

    let json_path = args.out.join("grid_results.json");
    write_json(&json_path, &report)?;
    let table = report.text_table();
    let table_path = args.out.join("grid_results.txt");
    std::fs::write(&table_path, &table)
        .map_err(|e| CliError::Other(format!("cannot write {}: {e}", table_path.display())))?;

    let mut manifest = RunManifest::new("grid");
    manifest.config_path = Some(args.config.clone());
    manifest.data_path = Some(data_path);
    manifest.record_artifact(&json_path);
    manifest.record_artifact(&table_path);
    write_manifest(&manifest, &args.out)?;

    print!("{table}");
    Ok(())
}
