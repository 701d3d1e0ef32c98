//! Discrete-time HVAC physical model.
//!
//! Integrates indoor temperature, refrigerant pressures, compressor power,
//! supply/return air temperatures, and airflow hour by hour from a scenario
//! configuration. All randomness flows through one caller-supplied generator;
//! every step consumes exactly two Gaussian draws (ambient first, then power)
//! so a fixed seed yields a bitwise-identical trajectory.

use crate::error::ConfigError;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Physical coefficients, controller setpoints, duration, and RNG seed for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Mean ambient temperature (degC).
    pub t_mean: f64,
    /// Daily ambient oscillation amplitude (degC).
    pub amplitude: f64,
    /// Phase offset of the daily cycle (hours).
    pub phase: f64,
    /// Std dev of the ambient temperature noise (degC).
    pub ambient_noise_std: f64,
    /// Per-step thermal gain coefficient, in (0, 1].
    pub alpha: f64,
    /// Cooling effectiveness (degC per unit of cooling output).
    pub beta: f64,
    /// Nominal cooling capacity (cooling units).
    pub q_nom: f64,
    /// Nominal compressor power (kW).
    pub p_nom: f64,
    /// Std dev of the compressor power noise (kW).
    pub power_noise_std: f64,
    /// Base refrigerant pressure.
    pub p0: f64,
    /// Suction pressure scaling factor.
    pub gamma1: f64,
    /// Discharge pressure scaling factor.
    pub gamma2: f64,
    /// Thermostat setpoint (degC).
    pub t_target: f64,
    /// Thermostat hysteresis half-width (degC).
    pub deadband: f64,
    /// Initial indoor temperature (degC).
    pub t_in_initial: f64,
    /// Airflow rate when the fan runs (flow units).
    pub airflow_nominal: f64,
    /// Airflow rate when idle (flow units).
    pub airflow_idle: f64,
    /// Max supply-air coil temperature drop at full cooling (degC).
    pub supply_delta: f64,
    /// Return-air offset above indoor temperature (degC).
    pub return_delta: f64,
    /// Simulation length in hours.
    pub duration_hours: u32,
    /// RNG seed; identical seeds reproduce identical series.
    pub seed: u64,
}

impl SimConfig {
    /// Checks every field invariant, naming the offending field on failure.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(ConfigError::invalid("alpha", "must be in (0, 1]"));
        }
        if self.beta < 0.0 {
            return Err(ConfigError::invalid("beta", "must be >= 0"));
        }
        if self.q_nom <= 0.0 {
            return Err(ConfigError::invalid("q_nom", "must be > 0"));
        }
        if self.p_nom <= 0.0 {
            return Err(ConfigError::invalid("p_nom", "must be > 0"));
        }
        if self.duration_hours < 1 {
            return Err(ConfigError::invalid("duration_hours", "must be >= 1"));
        }
        if self.ambient_noise_std < 0.0 {
            return Err(ConfigError::invalid("ambient_noise_std", "must be >= 0"));
        }
        if self.power_noise_std < 0.0 {
            return Err(ConfigError::invalid("power_noise_std", "must be >= 0"));
        }
        if self.deadband < 0.0 {
            return Err(ConfigError::invalid("deadband", "must be >= 0"));
        }
        if self.airflow_idle < 0.0 {
            return Err(ConfigError::invalid("airflow_idle", "must be >= 0"));
        }
        if self.airflow_nominal <= self.airflow_idle {
            return Err(ConfigError::invalid(
                "airflow_nominal",
                "must be > airflow_idle",
            ));
        }
        for (field, v) in [
            ("t_mean", self.t_mean),
            ("amplitude", self.amplitude),
            ("phase", self.phase),
            ("t_target", self.t_target),
            ("t_in_initial", self.t_in_initial),
            ("supply_delta", self.supply_delta),
            ("return_delta", self.return_delta),
            ("p0", self.p0),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
        ] {
            if !v.is_finite() {
                return Err(ConfigError::invalid(field, "must be finite"));
            }
        }
        Ok(())
    }
}

/// Pre-fault sensor values for one hour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NominalState {
    /// Hour index.
    pub t: u32,
    pub t_amb: f64,
    pub t_in: f64,
    pub q_cool: f64,
    pub p_comp: f64,
    pub p_suct: f64,
    pub p_disc: f64,
    pub t_supply: f64,
    pub t_return: f64,
    pub q_air: f64,
    pub cooling_active: bool,
}

/// Ambient temperature at hour `t`: a daily sinusoid around the mean plus Gaussian noise.
pub fn ambient_temperature<R: Rng>(cfg: &SimConfig, t: u32, rng: &mut R) -> f64 {
    let cycle = (2.0 * PI * (t as f64 - cfg.phase) / 24.0).sin();
    cfg.t_mean + cfg.amplitude * cycle + gaussian(rng, cfg.ambient_noise_std)
}

/// Bang-bang controller with symmetric hysteresis around the setpoint.
///
/// Turns on above `t_target + deadband`, off below `t_target - deadband`,
/// and holds the previous state inside the band.
pub fn thermostat(cfg: &SimConfig, t_in: f64, previously_active: bool) -> bool {
    if t_in > cfg.t_target + cfg.deadband {
        true
    } else if t_in < cfg.t_target - cfg.deadband {
        false
    } else {
        previously_active
    }
}

/// Builds the state for hour 0 from the configured initial indoor temperature.
///
/// Consumes the same two draws per hour as [`step_nominal`] so the RNG stream
/// stays aligned regardless of where a trajectory starts.
pub fn initial_state<R: Rng>(cfg: &SimConfig, rng: &mut R) -> NominalState {
    let t_amb = ambient_temperature(cfg, 0, rng);
    let power_noise = gaussian(rng, cfg.power_noise_std);
    let cooling_active = thermostat(cfg, cfg.t_in_initial, false);
    derive_state(cfg, 0, t_amb, cfg.t_in_initial, cooling_active, power_noise)
}

/// Advances the model one hour.
///
/// `effective_cooling` is the cooling output that actually reached the zone
/// during hour `prev.t` — the post-fault value when a fault layer is present,
/// otherwise `prev.q_cool`. Indoor temperature responds to it; everything else
/// in the new state follows from the controller decision at the new hour.
pub fn step_nominal<R: Rng>(
    cfg: &SimConfig,
    prev: &NominalState,
    effective_cooling: f64,
    rng: &mut R,
) -> NominalState {
    let t_in = prev.t_in + cfg.alpha * (prev.t_amb - prev.t_in) - cfg.beta * effective_cooling;
    let t = prev.t + 1;
    // Fixed draw order per step: ambient first, then power.
    let t_amb = ambient_temperature(cfg, t, rng);
    let power_noise = gaussian(rng, cfg.power_noise_std);
    let cooling_active = thermostat(cfg, t_in, prev.cooling_active);
    derive_state(cfg, t, t_amb, t_in, cooling_active, power_noise)
}

fn derive_state(
    cfg: &SimConfig,
    t: u32,
    t_amb: f64,
    t_in: f64,
    cooling_active: bool,
    power_noise: f64,
) -> NominalState {
    let q_cool = if cooling_active { cfg.q_nom } else { 0.0 };
    let demand = q_cool / cfg.q_nom;
    NominalState {
        t,
        t_amb,
        t_in,
        q_cool,
        p_comp: if cooling_active {
            cfg.p_nom + power_noise
        } else {
            0.0
        },
        p_suct: cfg.p0 + cfg.gamma1 * demand,
        p_disc: cfg.p0 + cfg.gamma2 * demand,
        t_supply: t_in - cfg.supply_delta * demand,
        t_return: t_in + cfg.return_delta,
        q_air: if cooling_active {
            cfg.airflow_nominal
        } else {
            cfg.airflow_idle
        },
        cooling_active,
    }
}

// A sigma of zero still consumes one draw, keeping the stream layout
// independent of the noise settings.
fn gaussian<R: Rng>(rng: &mut R, sigma: f64) -> f64 {
    let normal = Normal::new(0.0, sigma).expect("noise std must be finite and >= 0");
    normal.sample(rng)
}
