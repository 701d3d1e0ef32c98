//! Evaluation-feedback-update loop over consecutive cycles.
//!
//! Each cycle evaluates every window whose latest hour falls inside it, with
//! the accumulated feedback memory injected into the anomaly prompt; after
//! the cycle, the judged windows join the memory as labeled examples (expert
//! corrections simulated by ground truth), oldest evicted beyond the cap.

use crate::agents::{Agent, FEEDBACK_HEADER};
use crate::dataset::{compute_stats, TimeSeries};
use crate::error::ConfigError;
use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// Default cap on stored feedback examples.
pub const DEFAULT_MEMORY_CAP: usize = 48;

/// One judged window carried forward as an in-context example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackExample {
    /// Cycle in which the window was judged.
    pub cycle: usize,
    /// Statistics-mode summary of the judged window.
    pub window_summary: String,
    /// The model's verdict.
    pub predicted: bool,
    /// The expert-corrected label.
    pub actual: bool,
    pub model_explanation: String,
}

/// One window's prediction inside a cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyclePrediction {
    pub t: u32,
    /// None when the window failed at transport level.
    pub predicted: Option<bool>,
    pub actual: bool,
}

/// Per-cycle outcome of the loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub cycle: usize,
    /// Fraction of evaluated windows predicted correctly; 0 when none.
    pub accuracy: f64,
    pub predictions: Vec<CyclePrediction>,
    pub n_evaluated: usize,
    pub n_failed: usize,
    /// Memory size after this cycle's examples were appended and capped.
    pub feedback_memory_size: usize,
}

/// Renders the memory as a deterministic labeled-examples block, oldest
/// first, newest last. Empty memory renders as an empty block.
pub fn render_feedback(memory: &[FeedbackExample]) -> String {
    let mut out = String::new();
    for (i, example) in memory.iter().enumerate() {
        write!(
            out,
            "Example {} (cycle {}):\n{}Predicted anomaly: {}\nActual anomaly: {}\nModel explanation: {}\n\n",
            i + 1,
            example.cycle,
            example.window_summary,
            if example.predicted { "true" } else { "false" },
            if example.actual { "true" } else { "false" },
            example.model_explanation,
        )
        .unwrap();
    }
    out.trim_end().to_string()
}

/// Drives the loop over the whole series.
///
/// The timeline splits into consecutive `cycle_length`-hour cycles. All
/// windows of one cycle see exactly the memory state left by the previous
/// cycle; `memory_cap = 0` disables feedback entirely, making every prompt
/// identical to a non-continual run.
pub fn run_cycles(
    series: &TimeSeries,
    agent: &Agent<'_>,
    cycle_length: usize,
    memory_cap: usize,
) -> Result<Vec<CycleReport>, ConfigError> {
    let window_size = agent.config().window_size;
    if cycle_length < window_size {
        return Err(ConfigError::invalid(
            "cycle_length",
            format!("must be >= window_size ({window_size})"),
        ));
    }
    if series.len() < 2 * cycle_length {
        return Err(ConfigError::invalid(
            "cycle_length",
            format!(
                "series covers {} hours; at least two cycles ({}) required",
                series.len(),
                2 * cycle_length
            ),
        ));
    }

    let n = series.len();
    let n_cycles = n.div_ceil(cycle_length);
    let mut memory: Vec<FeedbackExample> = Vec::new();
    let mut reports = Vec::with_capacity(n_cycles);

    for cycle in 0..n_cycles {
        let cycle_start = cycle * cycle_length;
        let cycle_end = ((cycle + 1) * cycle_length).min(n);
        let first_instant = cycle_start.max(window_size - 1);

        // Memory is frozen for the whole cycle.
        let feedback_text = if memory.is_empty() {
            None
        } else {
            Some(render_feedback(&memory))
        };
        let feedback = feedback_text.as_deref();

        let mut predictions = Vec::new();
        let mut fresh_examples = Vec::new();
        let mut correct = 0usize;
        let mut evaluated = 0usize;
        let mut failed = 0usize;

        for t in first_instant..cycle_end {
            let window = series
                .window_at(t as u32, window_size)
                .expect("instant lies within the series");
            let actual = window.latest().truth.anomaly;
            match agent.detect(&window, feedback) {
                Ok((detection, _notes)) => {
                    let predicted = detection.anomalous;
                    evaluated += 1;
                    if predicted == actual {
                        correct += 1;
                    }
                    predictions.push(CyclePrediction {
                        t: t as u32,
                        predicted: Some(predicted),
                        actual,
                    });
                    if memory_cap > 0 {
                        let stats = compute_stats(&window);
                        fresh_examples.push(FeedbackExample {
                            cycle,
                            window_summary: crate::dataset::stats_block(&stats),
                            predicted,
                            actual,
                            model_explanation: detection.explanation,
                        });
                    }
                }
                Err(_) => {
                    failed += 1;
                    predictions.push(CyclePrediction {
                        t: t as u32,
                        predicted: None,
                        actual,
                    });
                }
            }
        }

        memory.extend(fresh_examples);
        if memory.len() > memory_cap {
            let excess = memory.len() - memory_cap;
            memory.drain(..excess);
        }

        reports.push(CycleReport {
            cycle,
            accuracy: if evaluated > 0 {
                correct as f64 / evaluated as f64
            } else {
                0.0
            },
            predictions,
            n_evaluated: evaluated,
            n_failed: failed,
            feedback_memory_size: memory.len(),
        });
    }

    Ok(reports)
}

/// Splits a prompt's user text into the base prompt and the feedback block.
/// Returns `None` for the block when no feedback section is present.
pub fn split_feedback_section(user_text: &str) -> (&str, Option<&str>) {
    match user_text.find(FEEDBACK_HEADER) {
        Some(pos) => (
            user_text[..pos].trim_end(),
            Some(user_text[pos..].trim_end()),
        ),
        None => (user_text.trim_end(), None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{AgentConfig, OracleProvider};
    use crate::dataset::run_scenario;
    use crate::scenario::twenty_day_filter_cycles;

    fn twenty_day_series() -> TimeSeries {
        let s = twenty_day_filter_cycles();
        run_scenario(&s.sim, &s.faults, &s.drifts).unwrap()
    }

    fn agent_config() -> AgentConfig {
        AgentConfig {
            window_size: 24,
            ..AgentConfig::default()
        }
    }

    #[test]
    fn twenty_day_run_yields_twenty_cycles() {
        let series = twenty_day_series();
        let oracle = OracleProvider::from_series(&series);
        let agent = Agent::new(agent_config(), &oracle, None).unwrap();
        let reports = run_cycles(&series, &agent, 24, DEFAULT_MEMORY_CAP).unwrap();
        assert_eq!(reports.len(), 20);
        // Cycle 0 only has the single window ending at hour 23.
        assert_eq!(reports[0].n_evaluated, 1);
        assert_eq!(reports[1].n_evaluated, 24);
    }

    #[test]
    fn oracle_agent_scores_perfect_accuracy_and_memory_caps() {
        let series = twenty_day_series();
        let oracle = OracleProvider::from_series(&series);
        let agent = Agent::new(agent_config(), &oracle, None).unwrap();
        let cap = 30;
        let reports = run_cycles(&series, &agent, 24, cap).unwrap();
        let mut total = 0usize;
        for report in &reports {
            assert_eq!(report.accuracy, 1.0, "cycle {}", report.cycle);
            total += report.n_evaluated;
            assert_eq!(report.feedback_memory_size, total.min(cap));
        }
    }

    #[test]
    fn zero_memory_cap_never_accumulates() {
        let series = twenty_day_series();
        let oracle = OracleProvider::from_series(&series);
        let agent = Agent::new(agent_config(), &oracle, None).unwrap();
        let reports = run_cycles(&series, &agent, 24, 0).unwrap();
        assert!(reports.iter().all(|r| r.feedback_memory_size == 0));
    }

    #[test]
    fn render_feedback_is_chronological_and_labeled() {
        assert_eq!(render_feedback(&[]), "");
        let examples = vec![
            FeedbackExample {
                cycle: 0,
                window_summary: "T_amb: ...\n".into(),
                predicted: true,
                actual: false,
                model_explanation: "looked spiky".into(),
            },
            FeedbackExample {
                cycle: 1,
                window_summary: "T_amb: ...\n".into(),
                predicted: false,
                actual: true,
                model_explanation: "looked calm".into(),
            },
        ];
        let block = render_feedback(&examples);
        assert!(block.contains("Predicted anomaly: true"));
        assert!(block.contains("Actual anomaly: false"));
        let first = block.find("Example 1 (cycle 0)").unwrap();
        let second = block.find("Example 2 (cycle 1)").unwrap();
        assert!(first < second);
        // Single example block carries both labels.
        let one = render_feedback(&examples[..1]);
        assert!(one.contains("Predicted anomaly: true") && one.contains("Actual anomaly: false"));
    }

    #[test]
    fn cycle_shorter_than_window_is_rejected() {
        let series = twenty_day_series();
        let oracle = OracleProvider::from_series(&series);
        let agent = Agent::new(agent_config(), &oracle, None).unwrap();
        let err = run_cycles(&series, &agent, 12, 0).unwrap_err();
        assert!(err.to_string().contains("cycle_length"));
    }

    #[test]
    fn series_must_cover_two_cycles() {
        let series = twenty_day_series();
        let oracle = OracleProvider::from_series(&series);
        let agent = Agent::new(agent_config(), &oracle, None).unwrap();
        assert!(run_cycles(&series, &agent, 480, 0).is_err());
    }
}
