//! Labeled time series, scenario execution, and sliding-window views.

mod io;
mod render;
mod stats;

pub use io::{export, import};
pub use render::{
    raw_table, render, stats_block, ReferenceMode, RenderedBlocks, ReprMode, Representation,
};
pub use stats::{compute_stats, ChannelStats, Trend, WindowStats};

use crate::channel::Channel;
use crate::error::{ConfigError, DataError};
use crate::faults::{
    apply_drift, apply_faults, label, DriftSpec, FaultSpec, GroundTruth, ImpactSet, LABEL_THRESHOLD,
};
use crate::sim::{initial_state, step_nominal, SimConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// One hour of observed sensor readings plus its ground-truth labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorRecord {
    pub t: u32,
    pub t_amb: f64,
    pub t_in: f64,
    pub p_comp: f64,
    pub q_cool: f64,
    pub p_suct: f64,
    pub p_disc: f64,
    pub t_supply: f64,
    pub t_return: f64,
    pub q_air: f64,
    pub truth: GroundTruth,
}

impl SensorRecord {
    pub fn channel(&self, ch: Channel) -> f64 {
        match ch {
            Channel::TAmb => self.t_amb,
            Channel::TIn => self.t_in,
            Channel::PComp => self.p_comp,
            Channel::QCool => self.q_cool,
            Channel::PSuct => self.p_suct,
            Channel::PDisc => self.p_disc,
            Channel::TSupply => self.t_supply,
            Channel::TReturn => self.t_return,
            Channel::QAir => self.q_air,
        }
    }

    pub fn set_channel(&mut self, ch: Channel, value: f64) {
        match ch {
            Channel::TAmb => self.t_amb = value,
            Channel::TIn => self.t_in = value,
            Channel::PComp => self.p_comp = value,
            Channel::QCool => self.q_cool = value,
            Channel::PSuct => self.p_suct = value,
            Channel::PDisc => self.p_disc = value,
            Channel::TSupply => self.t_supply = value,
            Channel::TReturn => self.t_return = value,
            Channel::QAir => self.q_air = value,
        }
    }
}

/// An hourly labeled series; timestamps run 0..N strictly increasing by 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    records: Vec<SensorRecord>,
}

impl TimeSeries {
    /// Wraps records, enforcing the timestamp invariant.
    pub fn new(records: Vec<SensorRecord>) -> Result<Self, DataError> {
        if records.is_empty() {
            return Err(DataError::Empty);
        }
        for (i, r) in records.iter().enumerate() {
            if r.t != i as u32 {
                return Err(DataError::Validation {
                    line: i + 2,
                    message: format!(
                        "timestamps must increase by 1 from 0; found {} at row {i}",
                        r.t
                    ),
                });
            }
        }
        Ok(TimeSeries { records })
    }

    pub fn records(&self) -> &[SensorRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// The window of `window_size` hours ending at hour `end` (inclusive).
    pub fn window_at(&self, end: u32, window_size: usize) -> Option<WindowView<'_>> {
        let end = end as usize;
        if end >= self.records.len() || end + 1 < window_size || window_size == 0 {
            return None;
        }
        Some(WindowView {
            records: &self.records[end + 1 - window_size..=end],
        })
    }

    /// Longest label-clean prefix, for calibration and reference rendering.
    pub fn clean_prefix(&self) -> &[SensorRecord] {
        let end = self
            .records
            .iter()
            .position(|r| r.truth.anomaly)
            .unwrap_or(self.records.len());
        &self.records[..end]
    }
}

/// A read-only slice of history ending at the evaluation hour.
#[derive(Debug, Clone, Copy)]
pub struct WindowView<'a> {
    records: &'a [SensorRecord],
}

impl<'a> WindowView<'a> {
    /// Wraps a contiguous slice of records as a window.
    pub fn new(records: &'a [SensorRecord]) -> Self {
        assert!(!records.is_empty(), "window must be non-empty");
        WindowView { records }
    }

    pub fn records(&self) -> &'a [SensorRecord] {
        self.records
    }

    /// The record at the evaluation hour (the window's final element).
    pub fn latest(&self) -> &'a SensorRecord {
        self.records.last().expect("window is non-empty")
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Sliding views of `window_size` hours, one per evaluation instant from
/// `window_size - 1` to the end of the series, stepping by `stride`.
///
/// A series shorter than the window yields nothing.
pub fn windows(
    series: &TimeSeries,
    window_size: usize,
    stride: usize,
) -> impl Iterator<Item = WindowView<'_>> {
    assert!(window_size >= 2, "window_size must be >= 2");
    assert!(stride >= 1, "stride must be >= 1");
    let n = series.len();
    let starts = if n >= window_size {
        (0..=n - window_size).step_by(stride).collect::<Vec<_>>()
    } else {
        Vec::new()
    };
    starts
        .into_iter()
        .map(move |s| WindowView::new(&series.records()[s..s + window_size]))
}

/// Runs one scenario end to end: integrates the physical model hour by hour,
/// applies faults and sensor drifts, and attaches ground-truth labels.
///
/// Fault effects feed back into the thermal model through the degraded
/// cooling output; drift is measurement-level only and never sets a label.
pub fn run_scenario(
    cfg: &SimConfig,
    faults: &[FaultSpec],
    drifts: &[DriftSpec],
) -> Result<TimeSeries, ConfigError> {
    cfg.validate()?;
    for (i, f) in faults.iter().enumerate() {
        f.validate()
            .map_err(|m| ConfigError::invalid(&format!("fault[{i}]"), m))?;
    }
    for (i, d) in drifts.iter().enumerate() {
        d.validate()
            .map_err(|m| ConfigError::invalid(&format!("drift[{i}]"), m))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = initial_state(cfg, &mut rng);
    let mut records = Vec::with_capacity(cfg.duration_hours as usize);

    for t in 0..cfg.duration_hours {
        let impacts = ImpactSet::at(faults, t);
        let observed = apply_faults(&state, impacts);
        let truth = label(impacts, LABEL_THRESHOLD);

        let mut record = SensorRecord {
            t,
            t_amb: observed.t_amb,
            t_in: observed.t_in,
            p_comp: observed.p_comp,
            q_cool: observed.q_cool,
            p_suct: observed.p_suct,
            p_disc: observed.p_disc,
            t_supply: observed.t_supply,
            t_return: observed.t_return,
            q_air: observed.q_air,
            truth,
        };
        for drift in drifts {
            let current = record.channel(drift.channel);
            record.set_channel(drift.channel, apply_drift(current, drift.channel, drift, t));
        }
        records.push(record);

        if t + 1 < cfg.duration_hours {
            // Indoor temperature responds to the cooling that actually
            // reached the zone, i.e. the post-fault (pre-drift) output.
            state = step_nominal(cfg, &state, observed.q_cool, &mut rng);
        }
    }

    Ok(TimeSeries { records })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::scenario::{default_sim_config, ten_day_demo};

    /// Builds a series whose every channel carries `values`, for stats tests.
    pub(crate) fn series_from_channel_values(values: &[f64]) -> TimeSeries {
        let records = values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let mut r = SensorRecord {
                    t: i as u32,
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
                    r.set_channel(ch, v);
                }
                r
            })
            .collect();
        TimeSeries::new(records).unwrap()
    }

    #[test]
    fn scenario_is_deterministic_per_seed() {
        let scenario = ten_day_demo();
        let a = run_scenario(&scenario.sim, &scenario.faults, &scenario.drifts).unwrap();
        let b = run_scenario(&scenario.sim, &scenario.faults, &scenario.drifts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fault_free_scenario_labels_every_row_clean() {
        let cfg = default_sim_config();
        let series = run_scenario(&cfg, &[], &[]).unwrap();
        assert_eq!(series.len(), cfg.duration_hours as usize);
        assert!(series.records().iter().all(|r| !r.truth.anomaly));
    }

    #[test]
    fn anomaly_flag_is_the_or_of_fault_flags_on_every_row() {
        let scenario = ten_day_demo();
        let series = run_scenario(&scenario.sim, &scenario.faults, &scenario.drifts).unwrap();
        for r in series.records() {
            assert_eq!(
                r.truth.anomaly,
                r.truth.leak_active || r.truth.comp_active || r.truth.filter_active,
                "row {}",
                r.t
            );
        }
    }

    #[test]
    fn ten_day_demo_produces_240_labeled_rows() {
        let scenario = ten_day_demo();
        let series = run_scenario(&scenario.sim, &scenario.faults, &scenario.drifts).unwrap();
        assert_eq!(series.len(), 240);
        assert!(series.records().iter().any(|r| r.truth.leak_active));
        assert!(series.records().iter().any(|r| r.truth.comp_active));
        assert!(series.records().iter().any(|r| r.truth.filter_active));
        // Overlap between at least two faults somewhere in the schedule.
        assert!(series.records().iter().any(|r| {
            (r.truth.leak_active as u8 + r.truth.comp_active as u8 + r.truth.filter_active as u8)
                >= 2
        }));
    }

    #[test]
    fn window_counts_match_stride_protocol() {
        let cfg = SimConfig {
            duration_hours: 240,
            ..default_sim_config()
        };
        let series = run_scenario(&cfg, &[], &[]).unwrap();
        assert_eq!(windows(&series, 36, 1).count(), 205);
        assert_eq!(windows(&series, 24, 1).count(), 217);
        let short = TimeSeries::new(series.records()[..10].to_vec()).unwrap();
        assert_eq!(windows(&short, 24, 1).count(), 0);
    }

    #[test]
    fn window_latest_advances_by_stride() {
        let cfg = SimConfig {
            duration_hours: 60,
            ..default_sim_config()
        };
        let series = run_scenario(&cfg, &[], &[]).unwrap();
        let ends: Vec<u32> = windows(&series, 12, 3).map(|w| w.latest().t).collect();
        assert_eq!(ends.first(), Some(&11));
        for pair in ends.windows(2) {
            assert_eq!(pair[1] - pair[0], 3);
        }
    }

    #[test]
    fn clean_prefix_stops_at_first_anomaly() {
        let scenario = ten_day_demo();
        let series = run_scenario(&scenario.sim, &scenario.faults, &scenario.drifts).unwrap();
        let prefix = series.clean_prefix();
        assert!(!prefix.is_empty());
        assert!(prefix.iter().all(|r| !r.truth.anomaly));
        assert!(series.records()[prefix.len()].truth.anomaly);
    }

    #[test]
    fn invalid_config_names_offending_field() {
        let mut cfg = default_sim_config();
        cfg.q_nom = 0.0;
        let err = run_scenario(&cfg, &[], &[]).unwrap_err();
        assert!(err.to_string().contains("q_nom"));
    }
}
