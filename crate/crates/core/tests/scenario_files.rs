//! The shipped scenario files must stay in lockstep with the built-in
//! schedules they document.

use phm_core::scenario::{ten_day_demo, twenty_day_filter_cycles, ScenarioConfig};
use std::path::PathBuf;

fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

#[test]
fn ten_day_file_matches_builtin() {
    let loaded = ScenarioConfig::load(&scenarios_dir().join("ten_day.toml")).unwrap();
    assert_eq!(loaded, ten_day_demo());
}

#[test]
fn twenty_day_file_matches_builtin() {
    let loaded = ScenarioConfig::load(&scenarios_dir().join("twenty_day_continual.toml")).unwrap();
    assert_eq!(loaded, twenty_day_filter_cycles());
}

#[test]
fn grid_example_cells_deserialize() {
    #[derive(serde::Deserialize)]
    struct GridFile {
        #[allow(dead_code)]
        data: PathBuf,
        #[serde(rename = "cell")]
        cells: Vec<phm_core::eval::GridCell>,
    }
    let text = std::fs::read_to_string(scenarios_dir().join("grid_example.toml")).unwrap();
    let file: GridFile = toml::from_str(&text).unwrap();
    assert!(file.cells.len() >= 5);
}
