//! Detector output types shared by the rule baseline and the agent pipeline.

use crate::faults::{FaultType, GroundTruth};
use serde::{Deserialize, Serialize};

/// Outcome of the anomaly-detection stage for one window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detection {
    pub anomalous: bool,
    pub key_observations: String,
    /// Non-empty whenever `anomalous` is true.
    pub explanation: String,
    /// The unprocessed detector output (model reply or rule trace).
    pub raw_reply: String,
}

/// Outcome of the fault-classification stage for one window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultCall {
    pub leak: bool,
    pub compressor: bool,
    pub filter: bool,
    pub explanation: String,
    pub raw_reply: String,
}

impl FaultCall {
    /// The all-negative call attributed to windows the pipeline never
    /// classified (stage 1 negative or parse fallback).
    pub fn negative() -> FaultCall {
        FaultCall {
            leak: false,
            compressor: false,
            filter: false,
            explanation: String::new(),
            raw_reply: String::new(),
        }
    }

    pub fn flag(&self, fault: FaultType) -> bool {
        match fault {
            FaultType::RefrigerantLeak => self.leak,
            FaultType::CompressorFault => self.compressor,
            FaultType::FilterBlockage => self.filter,
        }
    }

    pub fn set_flag(&mut self, fault: FaultType, value: bool) {
        match fault {
            FaultType::RefrigerantLeak => self.leak = value,
            FaultType::CompressorFault => self.compressor = value,
            FaultType::FilterBlockage => self.filter = value,
        }
    }

    pub fn matches_truth(&self, truth: &GroundTruth) -> bool {
        self.leak == truth.leak_active
            && self.compressor == truth.comp_active
            && self.filter == truth.filter_active
    }
}

/// Result of diagnosing one window through the two-stage pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnosis {
    pub detection: Detection,
    /// Present only when stage 1 flagged the window.
    pub fault_call: Option<FaultCall>,
    /// Run-log lines: retry notices and parse fallbacks.
    pub notes: Vec<String>,
}

/// Outcome of one evaluation instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WindowOutcome {
    Ok {
        /// Evaluation hour (the window's latest timestamp).
        t: u32,
        diagnosis: Diagnosis,
    },
    /// Transport failure after retries; excluded from metrics and counted.
    Failed { t: u32, error: String },
}

impl WindowOutcome {
    pub fn hour(&self) -> u32 {
        match self {
            WindowOutcome::Ok { t, .. } | WindowOutcome::Failed { t, .. } => *t,
        }
    }
}
