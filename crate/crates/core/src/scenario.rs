//! Scenario configuration: simulator coefficients plus fault and drift
//! schedules, loadable from a flat TOML document.
//!
//! Every simulator key is optional and falls back to the documented default;
//! unknown keys are an error. Faults and drifts are repeated `[[fault]]` /
//! `[[drift]]` blocks.

use crate::channel::Channel;
use crate::error::ConfigError;
use crate::faults::{DriftSpec, FaultSpec, FaultType, OnsetProfile};
use crate::sim::SimConfig;
use serde::Deserialize;
use std::path::Path;

/// A complete scenario: physical model plus injected faults and drifts.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub sim: SimConfig,
    pub faults: Vec<FaultSpec>,
    pub drifts: Vec<DriftSpec>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.sim.validate()?;
        for (i, f) in self.faults.iter().enumerate() {
            f.validate()
                .map_err(|m| ConfigError::invalid(&format!("fault[{i}]"), m))?;
        }
        for (i, d) in self.drifts.iter().enumerate() {
            d.validate()
                .map_err(|m| ConfigError::invalid(&format!("drift[{i}]"), m))?;
        }
        Ok(())
    }

    /// Loads and validates a scenario from a TOML file.
    pub fn load(path: &Path) -> Result<ScenarioConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            ConfigError::Parse { message, .. } => ConfigError::Parse {
                path: path.display().to_string(),
                message,
            },
            other => other,
        })
    }

    /// Parses a scenario from TOML text.
    pub fn parse(text: &str) -> Result<ScenarioConfig, ConfigError> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: String::new(),
            message: e.to_string(),
        })?;
        let scenario = file.into_scenario()?;
        scenario.validate()?;
        Ok(scenario)
    }
}

/// Default simulator coefficients.
///
/// Chosen so nominal trajectories land in realistic ranges: compressor power
/// a few kW, cooling output around ten units, airflow 1000 when running and
/// 200 when idle, pressures between two and four units.
pub fn default_sim_config() -> SimConfig {
    SimConfig {
        t_mean: 26.0,
        amplitude: 5.0,
        phase: 9.0,
        ambient_noise_std: 0.5,
        alpha: 0.3,
        beta: 0.4,
        q_nom: 10.0,
        p_nom: 4.5,
        power_noise_std: 0.05,
        p0: 2.0,
        gamma1: 1.0,
        gamma2: 2.0,
        t_target: 22.0,
        deadband: 0.5,
        t_in_initial: 24.0,
        airflow_nominal: 1000.0,
        airflow_idle: 200.0,
        supply_delta: 8.0,
        return_delta: 2.0,
        duration_hours: 240,
        seed: 42,
    }
}

/// A representative 10-day benchmark scenario: three overlapping faults with
/// one of each onset profile. The schedule is a stand-in for dataset designs
/// of this shape, not a reproduction of any particular one.
pub fn ten_day_demo() -> ScenarioConfig {
    ScenarioConfig {
        sim: default_sim_config(),
        faults: vec![
            FaultSpec {
                fault_type: FaultType::RefrigerantLeak,
                severity: 0.9,
                onset: OnsetProfile::Step { t0: 60 },
                end: 96,
            },
            FaultSpec {
                fault_type: FaultType::CompressorFault,
                severity: 0.8,
                onset: OnsetProfile::LinearRamp { t0: 110, t1: 130 },
                end: 150,
            },
            FaultSpec {
                fault_type: FaultType::FilterBlockage,
                severity: 0.85,
                onset: OnsetProfile::Exponential { t0: 140, tau: 8.0 },
                end: 190,
            },
        ],
        drifts: Vec::new(),
    }
}

/// A 20-day continual-learning scenario: filter blockage recurring roughly
/// daily with varied severities and onset profiles, a long fault-free
/// stretch, then one final event near the end.
pub fn twenty_day_filter_cycles() -> ScenarioConfig {
    let mut faults = Vec::new();
    let severities = [
        0.9, 0.7, 1.0, 0.8, 0.6, 0.95, 0.75, 0.85, 0.65, 1.0, 0.8, 0.9,
    ];
    for (k, &severity) in severities.iter().enumerate() {
        let t0 = 24 * k as u32 + 8;
        let onset = match k % 3 {
            0 => OnsetProfile::Step { t0 },
            1 => OnsetProfile::LinearRamp { t0, t1: t0 + 4 },
            _ => OnsetProfile::Exponential { t0, tau: 2.0 },
        };
        faults.push(FaultSpec {
            fault_type: FaultType::FilterBlockage,
            severity,
            onset,
            end: t0 + 10,
        });
    }
    // Fault-free interval, then a final event in the last day.
    faults.push(FaultSpec {
        fault_type: FaultType::FilterBlockage,
        severity: 0.9,
        onset: OnsetProfile::Step { t0: 462 },
        end: 472,
    });
    ScenarioConfig {
        sim: SimConfig {
            duration_hours: 480,
            seed: 7,
            ..default_sim_config()
        },
        faults,
        drifts: Vec::new(),
    }
}

// --- TOML schema ---------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    t_mean: Option<f64>,
    amplitude: Option<f64>,
    phase: Option<f64>,
    ambient_noise_std: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    q_nom: Option<f64>,
    p_nom: Option<f64>,
    power_noise_std: Option<f64>,
    p0: Option<f64>,
    gamma1: Option<f64>,
    gamma2: Option<f64>,
    t_target: Option<f64>,
    deadband: Option<f64>,
    t_in_initial: Option<f64>,
    airflow_nominal: Option<f64>,
    airflow_idle: Option<f64>,
    supply_delta: Option<f64>,
    return_delta: Option<f64>,
    duration_hours: Option<u32>,
    seed: Option<u64>,
    #[serde(default)]
    fault: Vec<FaultBlock>,
    #[serde(default)]
    drift: Vec<DriftBlock>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FaultBlock {
    #[serde(rename = "type")]
    fault_type: String,
    severity: f64,
    profile: String,
    t0: u32,
    t1: Option<u32>,
    tau: Option<f64>,
    end: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DriftBlock {
    channel: String,
    rate: f64,
    start: u32,
}

impl ScenarioFile {
    fn into_scenario(self) -> Result<ScenarioConfig, ConfigError> {
        let d = default_sim_config();
        let sim = SimConfig {
            t_mean: self.t_mean.unwrap_or(d.t_mean),
            amplitude: self.amplitude.unwrap_or(d.amplitude),
            phase: self.phase.unwrap_or(d.phase),
            ambient_noise_std: self.ambient_noise_std.unwrap_or(d.ambient_noise_std),
            alpha: self.alpha.unwrap_or(d.alpha),
            beta: self.beta.unwrap_or(d.beta),
            q_nom: self.q_nom.unwrap_or(d.q_nom),
            p_nom: self.p_nom.unwrap_or(d.p_nom),
            power_noise_std: self.power_noise_std.unwrap_or(d.power_noise_std),
            p0: self.p0.unwrap_or(d.p0),
            gamma1: self.gamma1.unwrap_or(d.gamma1),
            gamma2: self.gamma2.unwrap_or(d.gamma2),
            t_target: self.t_target.unwrap_or(d.t_target),
            deadband: self.deadband.unwrap_or(d.deadband),
            t_in_initial: self.t_in_initial.unwrap_or(d.t_in_initial),
            airflow_nominal: self.airflow_nominal.unwrap_or(d.airflow_nominal),
            airflow_idle: self.airflow_idle.unwrap_or(d.airflow_idle),
            supply_delta: self.supply_delta.unwrap_or(d.supply_delta),
            return_delta: self.return_delta.unwrap_or(d.return_delta),
            duration_hours: self.duration_hours.unwrap_or(d.duration_hours),
            seed: self.seed.unwrap_or(d.seed),
        };
        let faults = self
            .fault
            .into_iter()
            .enumerate()
            .map(|(i, b)| b.into_spec(i))
            .collect::<Result<Vec<_>, _>>()?;
        let drifts = self
            .drift
            .into_iter()
            .enumerate()
            .map(|(i, b)| b.into_spec(i))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ScenarioConfig {
            sim,
            faults,
            drifts,
        })
    }
}

impl FaultBlock {
    fn into_spec(self, index: usize) -> Result<FaultSpec, ConfigError> {
        let field = |name: &str| format!("fault[{index}].{name}");
        let fault_type = match self.fault_type.as_str() {
            "refrigerant_leak" | "leak" => FaultType::RefrigerantLeak,
            "compressor_fault" | "compressor" => FaultType::CompressorFault,
            "filter_blockage" | "filter" => FaultType::FilterBlockage,
            other => {
                return Err(ConfigError::invalid(
                    &field("type"),
                    format!("unknown fault type `{other}` (expected refrigerant_leak, compressor_fault, or filter_blockage)"),
                ))
            }
        };
        let onset = match self.profile.as_str() {
            "step" => OnsetProfile::Step { t0: self.t0 },
            "linear_ramp" | "ramp" => {
                let t1 = self.t1.ok_or_else(|| {
                    ConfigError::missing(&field("t1"), "linear_ramp requires a saturation hour t1")
                })?;
                OnsetProfile::LinearRamp { t0: self.t0, t1 }
            }
            "exponential" => {
                let tau = self.tau.ok_or_else(|| {
                    ConfigError::missing(&field("tau"), "exponential requires a time constant tau")
                })?;
                OnsetProfile::Exponential { t0: self.t0, tau }
            }
            other => return Err(ConfigError::invalid(
                &field("profile"),
                format!(
                    "unknown onset profile `{other}` (expected step, linear_ramp, or exponential)"
                ),
            )),
        };
        Ok(FaultSpec {
            fault_type,
            severity: self.severity,
            onset,
            end: self.end,
        })
    }
}

impl DriftBlock {
    fn into_spec(self, index: usize) -> Result<DriftSpec, ConfigError> {
        let channel: Channel = self
            .channel
            .parse()
            .map_err(|m| ConfigError::invalid(&format!("drift[{index}].channel"), m))?;
        Ok(DriftSpec {
            channel,
            rate: self.rate,
            start: self.start,
        })
    }
}
