//! Rule-based statistical baseline for anomaly detection and fault
//! classification, calibrated from normal-operation data.
//!
//! Anomaly rules flag a window that breaches the calibrated min/max bounds,
//! shows higher variability than normal, or shifts its mean between window
//! halves by more than two normal standard deviations. Fault rules test
//! characteristic combinations of channel means against one-sigma thresholds.

use crate::channel::Channel;
use crate::dataset::{TimeSeries, WindowView};
use crate::diagnosis::{Detection, FaultCall};
use crate::error::DataError;
use crate::faults::FaultType;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Hours at the end of the window whose mean feeds the fault rules.
pub const FAULT_RULE_TAIL_HOURS: usize = 3;

/// Per-channel normal-operation statistics used as rule thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalProfile {
    channels: Vec<(Channel, ChannelProfile)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelProfile {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
}

impl NormalProfile {
    pub fn get(&self, channel: Channel) -> &ChannelProfile {
        &self
            .channels
            .iter()
            .find(|(c, _)| *c == channel)
            .expect("all channels present")
            .1
    }
}

/// Computes per-channel min/max/mean/std over a label-clean reference series.
///
/// Rejects an empty reference or one containing labeled anomalies.
pub fn calibrate(reference: &TimeSeries) -> Result<NormalProfile, DataError> {
    if reference.is_empty() {
        return Err(DataError::Empty);
    }
    if let Some(pos) = reference.records().iter().position(|r| r.truth.anomaly) {
        return Err(DataError::Validation {
            line: pos + 2,
            message: "calibration reference contains labeled anomalies".into(),
        });
    }
    let n = reference.len() as f64;
    let channels = Channel::ALL
        .iter()
        .map(|&ch| {
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            let mut sum = 0.0;
            for r in reference.records() {
                let v = r.channel(ch);
                min = min.min(v);
                max = max.max(v);
                sum += v;
            }
            let mean = sum / n;
            let var = reference
                .records()
                .iter()
                .map(|r| (r.channel(ch) - mean).powi(2))
                .sum::<f64>()
                / n;
            (
                ch,
                ChannelProfile {
                    min,
                    max,
                    mean,
                    std: var.sqrt(),
                },
            )
        })
        .collect();
    Ok(NormalProfile { channels })
}

/// Which anomaly rule a violation cites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnomalyRule {
    BelowMin,
    AboveMax,
    ExcessVariability,
    TrendShift,
}

impl fmt::Display for AnomalyRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnomalyRule::BelowMin => "below-min",
            AnomalyRule::AboveMax => "above-max",
            AnomalyRule::ExcessVariability => "excess-variability",
            AnomalyRule::TrendShift => "trend-shift",
        })
    }
}

/// One violated rule with the observed value and the threshold it broke.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleViolation {
    pub rule: AnomalyRule,
    pub channel: Channel,
    pub observed: f64,
    pub threshold: f64,
}

impl fmt::Display for RuleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: observed {:.4} vs threshold {:.4}",
            self.rule, self.channel, self.observed, self.threshold
        )
    }
}

/// Anomaly verdict plus the full list of violated rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleDetection {
    pub anomalous: bool,
    pub violations: Vec<RuleViolation>,
}

impl RuleDetection {
    pub fn explanation(&self) -> String {
        if self.violations.is_empty() {
            return "no rule violations".to_string();
        }
        self.violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ")
    }

    pub fn into_detection(self) -> Detection {
        let explanation = self.explanation();
        Detection {
            anomalous: self.anomalous,
            key_observations: format!("{} rule violation(s)", self.violations.len()),
            raw_reply: explanation.clone(),
            explanation,
        }
    }
}

/// Flags the window when any channel breaches the calibrated rules.
pub fn detect_anomaly(window: &WindowView<'_>, profile: &NormalProfile) -> RuleDetection {
    assert!(!window.is_empty(), "window must be non-empty");
    let mut violations = Vec::new();
    let records = window.records();
    let half = records.len().div_ceil(2); // first half takes the extra row

    for ch in Channel::ALL {
        let normal = profile.get(ch);
        let values: Vec<f64> = records.iter().map(|r| r.channel(ch)).collect();
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if min < normal.min {
            violations.push(RuleViolation {
                rule: AnomalyRule::BelowMin,
                channel: ch,
                observed: min,
                threshold: normal.min,
            });
        }
        if max > normal.max {
            violations.push(RuleViolation {
                rule: AnomalyRule::AboveMax,
                channel: ch,
                observed: max,
                threshold: normal.max,
            });
        }
        let std = population_std(&values);
        if std > normal.std {
            violations.push(RuleViolation {
                rule: AnomalyRule::ExcessVariability,
                channel: ch,
                observed: std,
                threshold: normal.std,
            });
        }
        let mean_first = mean(&values[..half]);
        let mean_second = mean(&values[half..]);
        let shift = (mean_second - mean_first).abs();
        if shift > 2.0 * normal.std {
            violations.push(RuleViolation {
                rule: AnomalyRule::TrendShift,
                channel: ch,
                observed: shift,
                threshold: 2.0 * normal.std,
            });
        }
    }

    RuleDetection {
        anomalous: !violations.is_empty(),
        violations,
    }
}

/// Direction a conjunct requires relative to the calibrated mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Deviation {
    /// Channel mean must fall below mean - std.
    Low,
    /// Channel mean must rise above mean + std.
    High,
}

/// One evaluated conjunct of a fault rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjunctCheck {
    pub fault: FaultType,
    pub channel: Channel,
    pub required: Deviation,
    pub observed: f64,
    pub threshold: f64,
    pub satisfied: bool,
}

impl fmt::Display for ConjunctCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dir = match self.required {
            Deviation::Low => "<",
            Deviation::High => ">",
        };
        write!(
            f,
            "{} {} {} {:.4} (observed {:.4}): {}",
            self.fault,
            self.channel,
            dir,
            self.threshold,
            self.observed,
            if self.satisfied {
                "satisfied"
            } else {
                "violated"
            }
        )
    }
}

/// Fault verdicts plus every evaluated conjunct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleFaultCall {
    pub leak: bool,
    pub compressor: bool,
    pub filter: bool,
    pub conjuncts: Vec<ConjunctCheck>,
}

impl RuleFaultCall {
    pub fn explanation(&self) -> String {
        self.conjuncts
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join("; ")
    }

    pub fn into_fault_call(self) -> FaultCall {
        let explanation = self.explanation();
        FaultCall {
            leak: self.leak,
            compressor: self.compressor,
            filter: self.filter,
            raw_reply: explanation.clone(),
            explanation,
        }
    }
}

const LEAK_CONJUNCTS: [(Channel, Deviation); 4] = [
    (Channel::PSuct, Deviation::Low),
    (Channel::QCool, Deviation::Low),
    (Channel::PComp, Deviation::High),
    (Channel::TSupply, Deviation::High),
];

const COMPRESSOR_CONJUNCTS: [(Channel, Deviation); 4] = [
    (Channel::PComp, Deviation::Low),
    (Channel::QCool, Deviation::Low),
    (Channel::PSuct, Deviation::High),
    (Channel::PDisc, Deviation::Low),
];

const FILTER_CONJUNCTS: [(Channel, Deviation); 3] = [
    (Channel::QAir, Deviation::Low),
    (Channel::TReturn, Deviation::High),
    (Channel::PComp, Deviation::High),
];

/// Tests the window's recent channel means against the one-sigma fault rules.
///
/// The "recent" level is the mean of the window's last
/// [`FAULT_RULE_TAIL_HOURS`] rows (fewer if the window is shorter).
pub fn classify_fault(window: &WindowView<'_>, profile: &NormalProfile) -> RuleFaultCall {
    assert!(!window.is_empty(), "window must be non-empty");
    let records = window.records();
    let tail_start = records.len().saturating_sub(FAULT_RULE_TAIL_HOURS);
    let tail = &records[tail_start..];

    let mut conjuncts = Vec::new();
    let mut flags = [false; 3];
    for (i, (fault, rule)) in [
        (FaultType::RefrigerantLeak, &LEAK_CONJUNCTS[..]),
        (FaultType::CompressorFault, &COMPRESSOR_CONJUNCTS[..]),
        (FaultType::FilterBlockage, &FILTER_CONJUNCTS[..]),
    ]
    .into_iter()
    .enumerate()
    {
        let mut all = true;
        for &(channel, required) in rule {
            let normal = profile.get(channel);
            let observed = mean(
                &tail
                    .iter()
                    .map(|r| r.channel(channel))
                    .collect::<Vec<f64>>(),
            );
            let (threshold, satisfied) = match required {
                Deviation::Low => (
                    normal.mean - normal.std,
                    observed < normal.mean - normal.std,
                ),
                Deviation::High => (
                    normal.mean + normal.std,
                    observed > normal.mean + normal.std,
                ),
            };
            all &= satisfied;
            conjuncts.push(ConjunctCheck {
                fault,
                channel,
                required,
                observed,
                threshold,
                satisfied,
            });
        }
        flags[i] = all;
    }

    RuleFaultCall {
        leak: flags[0],
        compressor: flags[1],
        filter: flags[2],
        conjuncts,
    }
}

/// Runs the rule baseline over the series with pipeline gating: fault rules
/// are consulted only for windows the anomaly rules flagged.
///
/// Calibration uses the series' longest label-clean prefix.
pub fn run_rule_pipeline(
    series: &TimeSeries,
    window_size: usize,
    stride: usize,
) -> Result<Vec<crate::diagnosis::WindowOutcome>, DataError> {
    let reference = TimeSeries::new(series.clean_prefix().to_vec())?;
    let profile = calibrate(&reference)?;
    Ok(crate::dataset::windows(series, window_size, stride)
        .map(|window| {
            let t = window.latest().t;
            let detection = detect_anomaly(&window, &profile);
            let fault_call = detection
                .anomalous
                .then(|| classify_fault(&window, &profile).into_fault_call());
            crate::diagnosis::WindowOutcome::Ok {
                t,
                diagnosis: crate::diagnosis::Diagnosis {
                    detection: detection.into_detection(),
                    fault_call,
                    notes: Vec::new(),
                },
            }
        })
        .collect())
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn population_std(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / values.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{run_scenario, windows, SensorRecord, TimeSeries};
    use crate::faults::{apply_faults, GroundTruth, ImpactSet};
    use crate::scenario::default_sim_config;
    use crate::sim::{NominalState, SimConfig};

    fn constant_record(t: u32, value: f64) -> SensorRecord {
        let mut r = SensorRecord {
            t,
            t_amb: 0.0,
            t_in: 0.0,
            p_comp: 0.0,
            q_cool: 0.0,
            p_suct: 0.0,
            p_disc: 0.0,
            t_supply: 0.0,
            t_return: 0.0,
            q_air: 0.0,
            truth: GroundTruth::CLEAN,
        };
        for ch in Channel::ALL {
            r.set_channel(ch, value);
        }
        r
    }

    fn clean_series(values: &[f64]) -> TimeSeries {
        TimeSeries::new(
            values
                .iter()
                .enumerate()
                .map(|(i, &v)| constant_record(i as u32, v))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn calibrate_matches_two_pass_oracle_on_four_points() {
        let series = clean_series(&[1.0, 2.0, 3.0, 6.0]);
        let profile = calibrate(&series).unwrap();
        let p = profile.get(Channel::TIn);
        assert_eq!(p.min, 1.0);
        assert_eq!(p.max, 6.0);
        assert!((p.mean - 3.0).abs() < 1e-12);
        // Population variance of [1,2,3,6] around 3: (4+1+0+9)/4 = 3.5.
        assert!((p.std - 3.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn calibrate_on_constant_reference_gives_zero_sigma() {
        let series = clean_series(&[5.0, 5.0, 5.0]);
        let profile = calibrate(&series).unwrap();
        let p = profile.get(Channel::QAir);
        assert_eq!(p.std, 0.0);
        assert_eq!(p.min, p.max);
        assert_eq!(p.mean, 5.0);
    }

    #[test]
    fn calibrate_rejects_empty_and_anomalous_references() {
        assert!(matches!(
            TimeSeries::new(Vec::new()).unwrap_err(),
            DataError::Empty
        ));
        let mut records: Vec<SensorRecord> = (0..4).map(|t| constant_record(t, 1.0)).collect();
        records[2].truth = GroundTruth {
            anomaly: true,
            leak_active: true,
            comp_active: false,
            filter_active: false,
        };
        let series = TimeSeries::new(records).unwrap();
        assert!(matches!(
            calibrate(&series).unwrap_err(),
            DataError::Validation { .. }
        ));
    }

    #[test]
    fn matching_window_is_not_anomalous() {
        let series = clean_series(&[1.0, 2.0, 3.0, 2.0, 1.0, 2.0, 3.0, 2.0]);
        let profile = calibrate(&series).unwrap();
        let window = series.window_at(7, 8).unwrap();
        let det = detect_anomaly(&window, &profile);
        assert!(!det.anomalous, "{}", det.explanation());
    }

    #[test]
    fn bound_breach_cites_the_rule() {
        let series = clean_series(&[1.0, 2.0, 3.0, 2.0]);
        let profile = calibrate(&series).unwrap();
        let mut records: Vec<SensorRecord> = series.records().to_vec();
        records[3].set_channel(Channel::PComp, 99.0);
        let spiked = TimeSeries::new(records).unwrap();
        let window = spiked.window_at(3, 4).unwrap();
        let det = detect_anomaly(&window, &profile);
        assert!(det.anomalous);
        assert!(det
            .violations
            .iter()
            .any(|v| v.rule == AnomalyRule::AboveMax && v.channel == Channel::PComp));
        // Deterministic explanation text.
        let again = detect_anomaly(&window, &profile);
        assert_eq!(det.explanation(), again.explanation());
    }

    #[test]
    fn half_window_mean_shift_fires_trend_rule() {
        // Reference with modest spread so 2*sigma is small.
        let series = clean_series(&[10.0, 10.2, 9.8, 10.0, 10.1, 9.9, 10.0, 10.0]);
        let profile = calibrate(&series).unwrap();
        let sigma = profile.get(Channel::TIn).std;

        // Step window: first half at 10, second half 3 sigma higher.
        let step = 3.0 * sigma;
        let values: Vec<f64> = (0..8)
            .map(|i| if i < 4 { 10.0 } else { 10.0 + step })
            .collect();
        let windowed = clean_series(&values);
        let window = windowed.window_at(7, 8).unwrap();
        let det = detect_anomaly(&window, &profile);
        assert!(det
            .violations
            .iter()
            .any(|v| v.rule == AnomalyRule::TrendShift));
    }

    #[test]
    fn windows_from_calibration_series_never_fire_bound_rules() {
        let cfg = default_sim_config();
        let series = run_scenario(&cfg, &[], &[]).unwrap();
        let profile = calibrate(&series).unwrap();
        for window in windows(&series, 24, 1) {
            let det = detect_anomaly(&window, &profile);
            for v in det.violations {
                assert!(
                    !matches!(v.rule, AnomalyRule::BelowMin | AnomalyRule::AboveMax),
                    "bound rule fired on calibration data: {v}"
                );
            }
        }
    }

    /// Builds a window whose tail is the calibration mean with `impacts` applied.
    fn faulted_mean_window(profile: &NormalProfile, impacts: ImpactSet) -> TimeSeries {
        let mean_state = NominalState {
            t: 0,
            t_amb: profile.get(Channel::TAmb).mean,
            t_in: profile.get(Channel::TIn).mean,
            q_cool: profile.get(Channel::QCool).mean,
            p_comp: profile.get(Channel::PComp).mean,
            p_suct: profile.get(Channel::PSuct).mean,
            p_disc: profile.get(Channel::PDisc).mean,
            t_supply: profile.get(Channel::TSupply).mean,
            t_return: profile.get(Channel::TReturn).mean,
            q_air: profile.get(Channel::QAir).mean,
            cooling_active: true,
        };
        let faulted = apply_faults(&mean_state, impacts);
        let records = (0..6)
            .map(|t| {
                let mut r = constant_record(t, 0.0);
                for ch in Channel::ALL {
                    r.set_channel(
                        ch,
                        match ch {
                            Channel::TAmb => faulted.t_amb,
                            Channel::TIn => faulted.t_in,
                            Channel::PComp => faulted.p_comp,
                            Channel::QCool => faulted.q_cool,
                            Channel::PSuct => faulted.p_suct,
                            Channel::PDisc => faulted.p_disc,
                            Channel::TSupply => faulted.t_supply,
                            Channel::TReturn => faulted.t_return,
                            Channel::QAir => faulted.q_air,
                        },
                    );
                }
                r
            })
            .collect();
        TimeSeries::new(records).unwrap()
    }

    /// Reference with small per-channel spread around realistic running means.
    fn running_reference() -> TimeSeries {
        let base = [
            (Channel::TAmb, 26.0),
            (Channel::TIn, 22.0),
            (Channel::PComp, 4.5),
            (Channel::QCool, 10.0),
            (Channel::PSuct, 3.0),
            (Channel::PDisc, 4.0),
            (Channel::TSupply, 14.0),
            (Channel::TReturn, 24.0),
            (Channel::QAir, 1000.0),
        ];
        let records = (0..8)
            .map(|t| {
                let wiggle = if t % 2 == 0 { 0.01 } else { -0.01 };
                let mut r = constant_record(t, 0.0);
                for (ch, v) in base {
                    r.set_channel(ch, v * (1.0 + wiggle));
                }
                r
            })
            .collect();
        TimeSeries::new(records).unwrap()
    }

    #[test]
    fn severity_one_leak_on_mean_state_classifies_as_leak_only() {
        let profile = calibrate(&running_reference()).unwrap();
        let series = faulted_mean_window(
            &profile,
            ImpactSet {
                leak: 1.0,
                ..Default::default()
            },
        );
        let window = series.window_at(5, 6).unwrap();
        let call = classify_fault(&window, &profile);
        assert!(call.leak, "{}", call.explanation());
        assert!(!call.compressor);
        assert!(!call.filter);
    }

    #[test]
    fn all_channels_at_mean_classify_nothing() {
        let profile = calibrate(&running_reference()).unwrap();
        let series = faulted_mean_window(&profile, ImpactSet::default());
        let window = series.window_at(5, 6).unwrap();
        let call = classify_fault(&window, &profile);
        assert!(!call.leak && !call.compressor && !call.filter);
    }

    #[test]
    fn depressed_airflow_alone_does_not_classify_filter() {
        let profile = calibrate(&running_reference()).unwrap();
        let mut series = faulted_mean_window(&profile, ImpactSet::default());
        let qa = profile.get(Channel::QAir);
        let depressed = qa.mean - 10.0 * (qa.std + 1.0);
        let records: Vec<SensorRecord> = series
            .records()
            .iter()
            .map(|r| {
                let mut r = *r;
                r.set_channel(Channel::QAir, depressed);
                r
            })
            .collect();
        series = TimeSeries::new(records).unwrap();
        let window = series.window_at(5, 6).unwrap();
        let call = classify_fault(&window, &profile);
        assert!(!call.filter, "{}", call.explanation());
    }

    #[test]
    fn classification_is_monotone_in_severity_for_step_leak() {
        // Noise-free scenario pinned hot so cooling stays active.
        let cfg = SimConfig {
            t_mean: 36.0,
            amplitude: 2.0,
            ambient_noise_std: 0.0,
            power_noise_std: 0.0,
            t_target: 20.0,
            t_in_initial: 30.0,
            duration_hours: 120,
            ..default_sim_config()
        };
        let window_size = 12;
        let fires_at = |severity: f64| -> bool {
            let faults = [crate::faults::FaultSpec {
                fault_type: FaultType::RefrigerantLeak,
                severity,
                onset: crate::faults::OnsetProfile::Step { t0: 60 },
                end: 120,
            }];
            let series = run_scenario(&cfg, &faults, &[]).unwrap();
            let reference = TimeSeries::new(series.clean_prefix().to_vec()).unwrap();
            let profile = calibrate(&reference).unwrap();
            let window = series.window_at(80, window_size).unwrap();
            classify_fault(&window, &profile).leak
        };
        let severities = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
        let first = severities.iter().position(|&s| fires_at(s));
        let first = first.expect("rule should fire at some severity");
        for &s in &severities[first..] {
            assert!(fires_at(s), "fired at {} but not at {s}", severities[first]);
        }
    }
}
