//! Scoring against ground truth and the experiment grid runner.
//!
//! Anomaly detection scores as a binary task with anomaly as the positive
//! class. Fault classification scores micro-averaged over the pooled
//! (fault, window) label instances, with per-fault and macro breakdowns
//! emitted alongside.

use crate::agents::{
    Agent, AgentConfig, Architecture, CompletionProvider, ReferenceData, DEFAULT_IN_FLIGHT,
};
use crate::baseline::run_rule_pipeline;
use crate::dataset::{ReferenceMode, ReprMode, Representation, TimeSeries};
use crate::diagnosis::{FaultCall, WindowOutcome};
use crate::error::EvalError;
use crate::faults::{FaultType, GroundTruth};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::time::Duration;

/// Confusion counts and the derived binary metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    /// Windows excluded from the counts because evaluation failed.
    pub n_failed: usize,
}

impl MetricsReport {
    /// Derives the four metrics from raw confusion counts. Undefined ratios
    /// (zero denominators) report as 0.
    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> MetricsReport {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        let accuracy = ratio(tp + tn, tp + tn + fp + fn_);
        MetricsReport {
            true_positives: tp,
            false_positives: fp,
            true_negatives: tn,
            false_negatives: fn_,
            precision,
            recall,
            f1,
            accuracy,
            n_failed: 0,
        }
    }

    pub fn with_failed(mut self, n_failed: usize) -> MetricsReport {
        self.n_failed = n_failed;
        self
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Scores binary anomaly predictions against labels.
pub fn score_anomaly(predictions: &[bool], truths: &[bool]) -> Result<MetricsReport, EvalError> {
    if predictions.len() != truths.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            truths: truths.len(),
        });
    }
    let mut tp = 0;
    let mut fp = 0;
    let mut tn = 0;
    let mut fn_ = 0;
    for (&p, &t) in predictions.iter().zip(truths) {
        match (p, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    Ok(MetricsReport::from_counts(tp, fp, tn, fn_))
}

/// Micro-averaged fault metrics plus per-fault and macro breakdowns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultScores {
    /// Pooled over all (fault, window) label instances.
    pub micro: MetricsReport,
    pub per_fault: Vec<(FaultType, MetricsReport)>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

/// Scores multi-label fault calls against ground truth.
pub fn score_faults(calls: &[FaultCall], truths: &[GroundTruth]) -> Result<FaultScores, EvalError> {
    if calls.len() != truths.len() {
        return Err(EvalError::LengthMismatch {
            predictions: calls.len(),
            truths: truths.len(),
        });
    }
    let mut per_fault = Vec::with_capacity(3);
    let mut pooled = [0usize; 4]; // tp, fp, tn, fn
    for fault in FaultType::ALL {
        let mut counts = [0usize; 4];
        for (call, truth) in calls.iter().zip(truths) {
            let idx = match (call.flag(fault), truth.fault_flag(fault)) {
                (true, true) => 0,
                (true, false) => 1,
                (false, false) => 2,
                (false, true) => 3,
            };
            counts[idx] += 1;
            pooled[idx] += 1;
        }
        per_fault.push((
            fault,
            MetricsReport::from_counts(counts[0], counts[1], counts[2], counts[3]),
        ));
    }
    let micro = MetricsReport::from_counts(pooled[0], pooled[1], pooled[2], pooled[3]);
    let k = per_fault.len() as f64;
    Ok(FaultScores {
        micro,
        macro_precision: per_fault.iter().map(|(_, m)| m.precision).sum::<f64>() / k,
        macro_recall: per_fault.iter().map(|(_, m)| m.recall).sum::<f64>() / k,
        macro_f1: per_fault.iter().map(|(_, m)| m.f1).sum::<f64>() / k,
        per_fault,
    })
}

/// Anomaly and fault metrics for one sequence of pipeline outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeScores {
    pub anomaly: MetricsReport,
    pub faults: FaultScores,
    pub n_failed: usize,
}

/// Scores pipeline outcomes against the series' labels at each evaluation
/// hour. Stage-1 negatives contribute all-false fault calls; failed windows
/// are excluded from the counts and tallied separately.
pub fn score_outcomes(
    series: &TimeSeries,
    outcomes: &[WindowOutcome],
) -> Result<OutcomeScores, EvalError> {
    let mut predictions = Vec::new();
    let mut anomaly_truths = Vec::new();
    let mut calls = Vec::new();
    let mut truths = Vec::new();
    let mut n_failed = 0usize;
    for outcome in outcomes {
        match outcome {
            WindowOutcome::Ok { t, diagnosis } => {
                let truth = series.records()[*t as usize].truth;
                predictions.push(diagnosis.detection.anomalous);
                anomaly_truths.push(truth.anomaly);
                calls.push(
                    diagnosis
                        .fault_call
                        .clone()
                        .unwrap_or_else(FaultCall::negative),
                );
                truths.push(truth);
            }
            WindowOutcome::Failed { .. } => n_failed += 1,
        }
    }
    let anomaly = score_anomaly(&predictions, &anomaly_truths)?.with_failed(n_failed);
    let mut faults = score_faults(&calls, &truths)?;
    faults.micro = faults.micro.with_failed(n_failed);
    Ok(OutcomeScores {
        anomaly,
        faults,
        n_failed,
    })
}

// --- Experiment grid ---------------------------------------------------------

/// Which detector a grid cell runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    Rule,
    Agent,
}

/// One experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub detector: DetectorKind,
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default = "default_repr_mode")]
    pub representation: ReprMode,
    #[serde(default = "default_reference_mode")]
    pub reference: ReferenceMode,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_architecture")]
    pub architecture: Architecture,
}

fn default_model() -> String {
    "gpt-4.1-nano".to_string()
}
fn default_repr_mode() -> ReprMode {
    ReprMode::Statistics
}
fn default_reference_mode() -> ReferenceMode {
    ReferenceMode::None
}
fn default_window() -> usize {
    36
}
fn default_architecture() -> Architecture {
    Architecture::Centralized
}

/// A set of cells to run over one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentGrid {
    #[serde(rename = "cell")]
    pub cells: Vec<GridCell>,
}

impl ExperimentGrid {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.cells.is_empty() {
            return Err(EvalError::EmptyGrid);
        }
        Ok(())
    }
}

/// One scored cell; `error` is set (and scores absent) when the cell failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub cell: GridCell,
    pub scores: Option<OutcomeScores>,
    pub error: Option<String>,
}

/// All cell results, sorted descending by anomaly F1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub rows: Vec<CellResult>,
}

impl GridReport {
    /// Fixed-width table mirroring the result rows, one line per cell.
    pub fn text_table(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{:<9} {:<14} {:<11} {:<11} {:>6} {:<13} {:>9} {:>7} {:>7} {:>9} {:>9} {:>7}",
            "detector",
            "model",
            "repr",
            "reference",
            "window",
            "architecture",
            "precision",
            "recall",
            "f1",
            "accuracy",
            "fault_f1",
            "failed"
        )
        .unwrap();
        for row in &self.rows {
            let cell = &row.cell;
            // Agent-only columns are blanked for rule cells, which ignore them.
            let (detector, model, repr, reference, arch) = match cell.detector {
                DetectorKind::Rule => ("rule", "-", "-", "-", "-"),
                DetectorKind::Agent => (
                    "agent",
                    cell.model.as_str(),
                    repr_label(cell.representation),
                    reference_label(cell.reference),
                    architecture_label(cell.architecture),
                ),
            };
            match (&row.scores, &row.error) {
                (Some(scores), _) => writeln!(
                    out,
                    "{:<9} {:<14} {:<11} {:<11} {:>6} {:<13} {:>9.3} {:>7.3} {:>7.3} {:>9.3} {:>9.3} {:>7}",
                    detector,
                    model,
                    repr,
                    reference,
                    cell.window,
                    arch,
                    scores.anomaly.precision,
                    scores.anomaly.recall,
                    scores.anomaly.f1,
                    scores.anomaly.accuracy,
                    scores.faults.micro.f1,
                    scores.n_failed
                )
                .unwrap(),
                (None, Some(error)) => writeln!(
                    out,
                    "{:<9} {:<14} {:<11} {:<11} {:>6} {:<13} FAILED: {error}",
                    detector, model, repr, reference, cell.window, arch,
                )
                .unwrap(),
                (None, None) => unreachable!("cell has neither scores nor error"),
            }
        }
        out
    }
}

fn repr_label(mode: ReprMode) -> &'static str {
    match mode {
        ReprMode::RawData => "raw",
        ReprMode::Statistics => "stats",
        ReprMode::Both => "both",
    }
}

fn reference_label(mode: ReferenceMode) -> &'static str {
    match mode {
        ReferenceMode::None => "none",
        ReferenceMode::RawData => "raw",
        ReferenceMode::Statistics => "stats",
        ReferenceMode::Both => "both",
    }
}

fn architecture_label(arch: Architecture) -> &'static str {
    match arch {
        Architecture::Centralized => "centralized",
        Architecture::Decentralized => "decentralized",
    }
}

/// Runs every cell of the grid over the series, continuing past cell
/// failures, and sorts results descending by anomaly F1.
pub fn run_grid(
    grid: &ExperimentGrid,
    series: &TimeSeries,
    provider: &dyn CompletionProvider,
) -> Result<GridReport, EvalError> {
    grid.validate()?;
    let mut rows: Vec<CellResult> = grid
        .cells
        .iter()
        .map(|cell| match run_cell(cell, series, provider) {
            Ok(scores) => CellResult {
                cell: cell.clone(),
                scores: Some(scores),
                error: None,
            },
            Err(error) => CellResult {
                cell: cell.clone(),
                scores: None,
                error: Some(error),
            },
        })
        .collect();
    rows.sort_by(|a, b| {
        let fa = a.scores.as_ref().map(|s| s.anomaly.f1).unwrap_or(-1.0);
        let fb = b.scores.as_ref().map(|s| s.anomaly.f1).unwrap_or(-1.0);
        fb.partial_cmp(&fa).expect("f1 is finite")
    });
    Ok(GridReport { rows })
}

fn run_cell(
    cell: &GridCell,
    series: &TimeSeries,
    provider: &dyn CompletionProvider,
) -> Result<OutcomeScores, String> {
    let outcomes = match cell.detector {
        DetectorKind::Rule => {
            run_rule_pipeline(series, cell.window, 1).map_err(|e| e.to_string())?
        }
        DetectorKind::Agent => {
            let cfg = AgentConfig {
                model_name: cell.model.clone(),
                architecture: cell.architecture,
                representation: Representation::new(cell.representation, cell.reference),
                window_size: cell.window,
                max_retries: 2,
                timeout: Duration::from_secs(60),
            };
            let reference = if cell.reference == ReferenceMode::None {
                None
            } else {
                Some(ReferenceData::from_clean_prefix(series).map_err(|e| e.to_string())?)
            };
            let agent = Agent::new(cfg, provider, reference).map_err(|e| e.to_string())?;
            crate::agents::run_windows(series, &agent, 1, DEFAULT_IN_FLIGHT)
        }
    };
    score_outcomes(series, &outcomes).map_err(|e| e.to_string())
}
