//! Deterministic HVAC simulator with multi-sensor fault injection, plus a
//! fault-diagnosis benchmark harness: a rule-based statistical baseline,
//! model-backed diagnostic agents (centralized and decentralized), a
//! continual-learning feedback loop, and a common scoring protocol.
//!
//! Modules:
//! - [`sim`]: the hour-by-hour physical model (temperatures, pressures,
//!   compressor power, airflow).
//! - [`faults`]: parameterized fault injection with step/ramp/exponential
//!   onsets, sensor drift, and ground-truth labels.
//! - [`dataset`]: scenario execution, labeled time series, sliding windows,
//!   descriptive statistics, text renderings, and file import/export.
//! - [`scenario`]: scenario configuration files and built-in schedules.
//! - [`baseline`]: the rule-based anomaly detector and fault classifier.
//! - [`agents`]: prompt construction, completion providers (HTTP and offline
//!   mocks), reply parsing, and the two-stage diagnosis pipeline.
//! - [`continual`]: the evaluation-feedback-update loop.
//! - [`eval`]: metrics and the experiment grid runner.

pub mod agents;
pub mod baseline;
pub mod channel;
pub mod continual;
pub mod dataset;
pub mod diagnosis;
pub mod error;
pub mod eval;
pub mod faults;
pub mod scenario;
pub mod sim;

pub use channel::Channel;
pub use diagnosis::{Detection, Diagnosis, FaultCall, WindowOutcome};
pub use error::{ConfigError, DataError, EvalError};
