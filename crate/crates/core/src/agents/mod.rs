//! Model-backed diagnosis: prompt construction, provider orchestration,
//! reply parsing, and the two-stage window pipeline.
//!
//! Stage 1 judges whether the window's latest hour is anomalous; stage 2
//! classifies faults and runs only when stage 1 fired. Centralized runs ask
//! one classifier about all three faults; decentralized runs ask one
//! specialized classifier per fault and merge the verdicts.

mod parse;
mod prompts;
mod provider;

pub use parse::{parse_anomaly_reply, parse_fault_reply, ParseError};
pub use prompts::{
    build_anomaly_prompt, build_fault_prompt, fault_pattern_line, PromptPair,
    ANOMALY_QUESTION_TEXT, ANOMALY_SYSTEM_TEXT, ANOMALY_TASK_TEXT, FAULT_QUESTION_HEAD,
    FAULT_QUESTION_TAIL, FAULT_SYSTEM_PREAMBLE, FAULT_TASK_TEXT, FEEDBACK_HEADER,
};
pub use provider::{
    request_key, CompletionProvider, CompletionRequest, HttpProvider, OracleProvider,
    PerturbedOracleProvider, PromptStage, ProviderError, RecordingProvider, TranscriptProvider,
};

use crate::dataset::{
    compute_stats, windows, ReferenceMode, Representation, TimeSeries, WindowStats, WindowView,
};
use crate::diagnosis::{Detection, Diagnosis, FaultCall, WindowOutcome};
use crate::error::ConfigError;
use crate::faults::FaultType;
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

/// How fault classification is organized across agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    /// One agent classifies all fault types in a single prompt.
    Centralized,
    /// One specialized agent per fault type, judged independently.
    Decentralized,
}

/// Settings for one agent pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    pub model_name: String,
    pub architecture: Architecture,
    pub representation: Representation,
    pub window_size: usize,
    pub max_retries: u32,
    pub timeout: Duration,
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.window_size < 2 {
            return Err(ConfigError::invalid("window_size", "must be >= 2"));
        }
        if self.model_name.is_empty() {
            return Err(ConfigError::invalid("model_name", "must not be empty"));
        }
        Ok(())
    }
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            model_name: "gpt-4.1-nano".to_string(),
            architecture: Architecture::Centralized,
            representation: Representation::new(
                crate::dataset::ReprMode::Statistics,
                ReferenceMode::None,
            ),
            window_size: 36,
            max_retries: 2,
            timeout: Duration::from_secs(60),
        }
    }
}

/// A reference segment rendered once and reused for every window of a run.
#[derive(Debug, Clone)]
pub struct ReferenceData {
    records: Vec<crate::dataset::SensorRecord>,
    stats: WindowStats,
}

impl ReferenceData {
    /// Minimum hours of clean data required for a usable reference.
    pub const MIN_HOURS: usize = 48;

    /// Uses the longest label-clean prefix of the series as the reference.
    pub fn from_clean_prefix(series: &TimeSeries) -> Result<ReferenceData, ConfigError> {
        let prefix = series.clean_prefix();
        if prefix.len() < Self::MIN_HOURS {
            return Err(ConfigError::invalid(
                "reference",
                format!(
                    "label-clean prefix is {} hours; at least {} required",
                    prefix.len(),
                    Self::MIN_HOURS
                ),
            ));
        }
        let records = prefix.to_vec();
        let view = WindowView::new(&records);
        let stats = compute_stats(&view);
        Ok(ReferenceData { records, stats })
    }

    pub fn view(&self) -> (WindowView<'_>, &WindowStats) {
        (WindowView::new(&self.records), &self.stats)
    }
}

/// A configured diagnostic agent bound to a provider.
pub struct Agent<'p> {
    cfg: AgentConfig,
    provider: &'p dyn CompletionProvider,
    reference: Option<ReferenceData>,
}

impl<'p> Agent<'p> {
    /// Binds a validated config to a provider. `reference` must be present
    /// exactly when the representation's reference mode selects one.
    pub fn new(
        cfg: AgentConfig,
        provider: &'p dyn CompletionProvider,
        reference: Option<ReferenceData>,
    ) -> Result<Agent<'p>, ConfigError> {
        cfg.validate()?;
        let wants_reference = cfg.representation.reference_mode != ReferenceMode::None;
        if wants_reference && reference.is_none() {
            return Err(ConfigError::missing(
                "reference",
                "representation selects reference data but none was supplied",
            ));
        }
        if !wants_reference && reference.is_some() {
            return Err(ConfigError::invalid(
                "reference",
                "reference data supplied but the representation excludes it",
            ));
        }
        Ok(Agent {
            cfg,
            provider,
            reference,
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.cfg
    }

    /// Builds the stage-1 prompt for a window, including any feedback block.
    pub fn anomaly_prompt(&self, window: &WindowView<'_>, feedback: Option<&str>) -> PromptPair {
        let stats = compute_stats(window);
        let reference = self.reference.as_ref().map(|r| r.view());
        build_anomaly_prompt(
            window,
            &stats,
            self.cfg.representation,
            reference.as_ref().map(|(v, s)| (v, *s)),
            feedback,
        )
    }

    /// Runs only the anomaly stage on one window, returning the detection
    /// and any retry/fallback notes.
    pub fn detect(
        &self,
        window: &WindowView<'_>,
        feedback: Option<&str>,
    ) -> Result<(Detection, Vec<String>), ProviderError> {
        let t = window.latest().t;
        let mut notes = Vec::new();
        let prompt = self.anomaly_prompt(window, feedback);
        let request = CompletionRequest {
            model: self.cfg.model_name.clone(),
            system_text: prompt.system_text,
            user_text: prompt.user_text,
            stage: PromptStage::Anomaly,
            window_end: Some(t),
            fault: None,
        };
        let detection = match self.ask(&request, &mut notes, parse_anomaly_reply)? {
            Some(detection) => detection,
            None => {
                notes.push(format!(
                    "hour {t}: anomaly reply unparseable after {} attempt(s); scored negative",
                    self.cfg.max_retries + 1
                ));
                Detection {
                    anomalous: false,
                    key_observations: String::new(),
                    explanation: "unparseable reply; defaulted to non-anomalous".to_string(),
                    raw_reply: String::new(),
                }
            }
        };
        Ok((detection, notes))
    }

    /// Runs the two-stage pipeline on one window.
    ///
    /// Unparseable replies are retried up to `max_retries` and then scored as
    /// a negative prediction, noted in the diagnosis log. Transport failures
    /// after retries surface as an error.
    pub fn diagnose(
        &self,
        window: &WindowView<'_>,
        feedback: Option<&str>,
    ) -> Result<Diagnosis, ProviderError> {
        let (detection, mut notes) = self.detect(window, feedback)?;

        if !detection.anomalous {
            return Ok(Diagnosis {
                detection,
                fault_call: None,
                notes,
            });
        }

        let stats = compute_stats(window);
        let fault_call = match self.cfg.architecture {
            Architecture::Centralized => self.classify_centralized(window, &stats, &mut notes)?,
            Architecture::Decentralized => {
                self.classify_decentralized(window, &stats, &mut notes)?
            }
        };
        Ok(Diagnosis {
            detection,
            fault_call: Some(fault_call),
            notes,
        })
    }

    fn classify_centralized(
        &self,
        window: &WindowView<'_>,
        stats: &WindowStats,
        notes: &mut Vec<String>,
    ) -> Result<FaultCall, ProviderError> {
        let t = window.latest().t;
        let prompt = build_fault_prompt(window, stats, self.cfg.representation, &FaultType::ALL);
        let request = CompletionRequest {
            model: self.cfg.model_name.clone(),
            system_text: prompt.system_text,
            user_text: prompt.user_text,
            stage: PromptStage::FaultAll,
            window_end: Some(t),
            fault: None,
        };
        match self.ask(&request, notes, |r| parse_fault_reply(r, &FaultType::ALL))? {
            Some(call) => Ok(call),
            None => {
                notes.push(format!(
                    "hour {t}: fault reply unparseable after {} attempt(s); scored all-negative",
                    self.cfg.max_retries + 1
                ));
                Ok(FaultCall::negative())
            }
        }
    }

    fn classify_decentralized(
        &self,
        window: &WindowView<'_>,
        stats: &WindowStats,
        notes: &mut Vec<String>,
    ) -> Result<FaultCall, ProviderError> {
        let t = window.latest().t;
        let mut merged = FaultCall::negative();
        let mut explanations = Vec::new();
        for fault in FaultType::ALL {
            let prompt = build_fault_prompt(window, stats, self.cfg.representation, &[fault]);
            let request = CompletionRequest {
                model: self.cfg.model_name.clone(),
                system_text: prompt.system_text,
                user_text: prompt.user_text,
                stage: PromptStage::FaultSingle,
                window_end: Some(t),
                fault: Some(fault),
            };
            match self.ask(&request, notes, |r| parse_fault_reply(r, &[fault]))? {
                Some(call) => {
                    merged.set_flag(fault, call.flag(fault));
                    explanations.push(format!("{}: {}", fault.label(), call.explanation));
                }
                None => {
                    notes.push(format!(
                        "hour {t}: {} agent reply unparseable after {} attempt(s); scored negative",
                        fault.label(),
                        self.cfg.max_retries + 1
                    ));
                }
            }
        }
        merged.explanation = explanations.join("\n");
        Ok(merged)
    }

    /// Issues one request with retries. `Ok(None)` means every attempt
    /// produced an unparseable reply; transport errors exhaust retries too.
    fn ask<T>(
        &self,
        request: &CompletionRequest,
        notes: &mut Vec<String>,
        parse: impl Fn(&str) -> Result<T, ParseError>,
    ) -> Result<Option<T>, ProviderError> {
        let attempts = self.cfg.max_retries + 1;
        let mut last_transport: Option<ProviderError> = None;
        for attempt in 0..attempts {
            match self.provider.complete(request) {
                Ok(reply) => match parse(&reply) {
                    Ok(value) => return Ok(Some(value)),
                    Err(e) => {
                        notes.push(format!("attempt {}: {e}", attempt + 1));
                        last_transport = None;
                    }
                },
                Err(e) => {
                    notes.push(format!("attempt {}: {e}", attempt + 1));
                    last_transport = Some(e);
                }
            }
        }
        match last_transport {
            Some(e) => Err(e),
            None => Ok(None),
        }
    }
}

/// Default bound on concurrently in-flight provider requests.
pub const DEFAULT_IN_FLIGHT: usize = 4;

/// Diagnoses every window of the series (given window size and stride)
/// through the full two-stage pipeline, running up to `in_flight` windows
/// concurrently. Results keep window order regardless of scheduling.
pub fn run_windows(
    series: &TimeSeries,
    agent: &Agent<'_>,
    stride: usize,
    in_flight: usize,
) -> Vec<WindowOutcome> {
    let views: Vec<WindowView<'_>> = windows(series, agent.config().window_size, stride).collect();
    parallel_map(&views, in_flight, |window| {
        let t = window.latest().t;
        match agent.diagnose(window, None) {
            Ok(diagnosis) => WindowOutcome::Ok { t, diagnosis },
            Err(e) => WindowOutcome::Failed {
                t,
                error: e.to_string(),
            },
        }
    })
}

/// Runs only the anomaly stage over every window, for detection-only runs.
pub fn run_detect_windows(
    series: &TimeSeries,
    agent: &Agent<'_>,
    stride: usize,
    in_flight: usize,
) -> Vec<WindowOutcome> {
    let views: Vec<WindowView<'_>> = windows(series, agent.config().window_size, stride).collect();
    parallel_map(&views, in_flight, |window| {
        let t = window.latest().t;
        match agent.detect(window, None) {
            Ok((detection, notes)) => WindowOutcome::Ok {
                t,
                diagnosis: Diagnosis {
                    detection,
                    fault_call: None,
                    notes,
                },
            },
            Err(e) => WindowOutcome::Failed {
                t,
                error: e.to_string(),
            },
        }
    })
}

fn parallel_map<T, R, F>(items: &[T], in_flight: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let n = items.len();
    if n == 0 {
        return Vec::new();
    }
    if in_flight <= 1 {
        return items.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = (0..n).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..in_flight.min(n) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let result = f(&items[i]);
                *slots[i].lock().expect("result slot poisoned") = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| {
            slot.into_inner()
                .expect("result slot poisoned")
                .expect("every item processed")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{run_scenario, ReprMode};
    use crate::scenario::ten_day_demo;

    /// Provider that logs every request and delegates to an oracle.
    struct LoggingProvider<'a> {
        inner: &'a dyn CompletionProvider,
        log: Mutex<Vec<CompletionRequest>>,
    }

    impl<'a> LoggingProvider<'a> {
        fn new(inner: &'a dyn CompletionProvider) -> Self {
            LoggingProvider {
                inner,
                log: Mutex::new(Vec::new()),
            }
        }
    }

    impl CompletionProvider for LoggingProvider<'_> {
        fn complete(&self, request: &CompletionRequest) -> Result<String, ProviderError> {
            self.log.lock().unwrap().push(request.clone());
            self.inner.complete(request)
        }
    }

    /// Provider that always fails with a transport error.
    struct DeadProvider;

    impl CompletionProvider for DeadProvider {
        fn complete(&self, _request: &CompletionRequest) -> Result<String, ProviderError> {
            Err(ProviderError::Transport("connection refused".into()))
        }
    }

    /// Provider that always returns an unparseable reply.
    struct GibberishProvider;

    impl CompletionProvider for GibberishProvider {
        fn complete(&self, _request: &CompletionRequest) -> Result<String, ProviderError> {
            Ok("the weather seems pleasant".to_string())
        }
    }

    fn demo_series() -> TimeSeries {
        let scenario = ten_day_demo();
        run_scenario(&scenario.sim, &scenario.faults, &scenario.drifts).unwrap()
    }

    fn stats_config() -> AgentConfig {
        AgentConfig {
            window_size: 24,
            ..AgentConfig::default()
        }
    }

    #[test]
    fn oracle_pipeline_reproduces_ground_truth() {
        let series = demo_series();
        let oracle = OracleProvider::from_series(&series);
        let agent = Agent::new(stats_config(), &oracle, None).unwrap();
        for outcome in run_windows(&series, &agent, 1, 1) {
            let WindowOutcome::Ok { t, diagnosis } = outcome else {
                panic!("oracle run must not fail");
            };
            let truth = series.records()[t as usize].truth;
            assert_eq!(diagnosis.detection.anomalous, truth.anomaly, "hour {t}");
            let call = diagnosis.fault_call.unwrap_or_else(FaultCall::negative);
            assert!(call.matches_truth(&truth), "hour {t}");
        }
    }

    #[test]
    fn stage_two_is_gated_on_stage_one() {
        let series = demo_series();
        let oracle = OracleProvider::from_series(&series);
        let logging = LoggingProvider::new(&oracle);
        let agent = Agent::new(stats_config(), &logging, None).unwrap();
        let outcomes = run_windows(&series, &agent, 1, 1);

        let negative_hours: Vec<u32> = outcomes
            .iter()
            .filter_map(|o| match o {
                WindowOutcome::Ok { t, diagnosis } if !diagnosis.detection.anomalous => Some(*t),
                _ => None,
            })
            .collect();
        assert!(!negative_hours.is_empty());

        let log = logging.log.lock().unwrap();
        for request in log.iter() {
            if request.stage != PromptStage::Anomaly {
                let t = request.window_end.unwrap();
                assert!(
                    !negative_hours.contains(&t),
                    "stage 2 ran for non-anomalous hour {t}"
                );
            }
        }
    }

    #[test]
    fn decentralized_issues_one_prompt_per_fault() {
        let series = demo_series();
        let oracle = OracleProvider::from_series(&series);
        let logging = LoggingProvider::new(&oracle);
        let cfg = AgentConfig {
            architecture: Architecture::Decentralized,
            ..stats_config()
        };
        let agent = Agent::new(cfg, &logging, None).unwrap();
        let window = series.window_at(70, 24).unwrap(); // leak interval
        let diagnosis = agent.diagnose(&window, None).unwrap();
        assert!(diagnosis.detection.anomalous);
        let log = logging.log.lock().unwrap();
        let singles: Vec<_> = log
            .iter()
            .filter(|r| r.stage == PromptStage::FaultSingle)
            .collect();
        assert_eq!(singles.len(), 3);
        let mut asked: Vec<FaultType> = singles.iter().map(|r| r.fault.unwrap()).collect();
        asked.sort_by_key(|f| format!("{f:?}"));
        asked.dedup();
        assert_eq!(asked.len(), 3, "each fault asked exactly once");
    }

    #[test]
    fn decentralized_merge_depends_only_on_each_agents_reply() {
        let series = demo_series();
        let cfg = AgentConfig {
            architecture: Architecture::Decentralized,
            ..stats_config()
        };
        let window = series.window_at(70, 24).unwrap(); // leak active, others not
        let truth = series.records()[70].truth;
        assert!(truth.leak_active && !truth.filter_active);

        let oracle = OracleProvider::from_series(&series);
        let agent = Agent::new(cfg.clone(), &oracle, None).unwrap();
        let baseline_call = agent.diagnose(&window, None).unwrap().fault_call.unwrap();

        let perturbed = PerturbedOracleProvider::new(
            OracleProvider::from_series(&series),
            FaultType::FilterBlockage,
            true,
        );
        let agent = Agent::new(cfg, &perturbed, None).unwrap();
        let perturbed_call = agent.diagnose(&window, None).unwrap().fault_call.unwrap();

        assert_eq!(perturbed_call.leak, baseline_call.leak);
        assert_eq!(perturbed_call.compressor, baseline_call.compressor);
        assert_ne!(perturbed_call.filter, baseline_call.filter);
    }

    #[test]
    fn transport_failure_marks_window_failed() {
        let series = demo_series();
        let agent = Agent::new(stats_config(), &DeadProvider, None).unwrap();
        let window = series.window_at(30, 24).unwrap();
        let err = agent.diagnose(&window, None).unwrap_err();
        assert!(err.to_string().contains("connection refused"));

        let outcomes = run_windows(&series, &agent, 24, 1);
        assert!(outcomes
            .iter()
            .all(|o| matches!(o, WindowOutcome::Failed { .. })));
    }

    #[test]
    fn unparseable_replies_score_negative_with_note() {
        let series = demo_series();
        let agent = Agent::new(stats_config(), &GibberishProvider, None).unwrap();
        let window = series.window_at(30, 24).unwrap();
        let diagnosis = agent.diagnose(&window, None).unwrap();
        assert!(!diagnosis.detection.anomalous);
        assert!(diagnosis.notes.iter().any(|n| n.contains("unparseable")));
    }

    #[test]
    fn reference_requirement_is_enforced() {
        let series = demo_series();
        let oracle = OracleProvider::from_series(&series);
        let cfg = AgentConfig {
            representation: Representation::new(ReprMode::Statistics, ReferenceMode::Both),
            ..stats_config()
        };
        assert!(Agent::new(cfg.clone(), &oracle, None).is_err());
        let reference = ReferenceData::from_clean_prefix(&series).unwrap();
        assert!(Agent::new(cfg, &oracle, Some(reference)).is_ok());
    }

    #[test]
    fn parallel_and_sequential_runs_agree() {
        let series = demo_series();
        let oracle = OracleProvider::from_series(&series);
        let agent = Agent::new(stats_config(), &oracle, None).unwrap();
        let sequential = run_windows(&series, &agent, 5, 1);
        let parallel = run_windows(&series, &agent, 5, DEFAULT_IN_FLIGHT);
        assert_eq!(sequential, parallel);
    }
}
