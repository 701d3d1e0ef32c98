//! Parameterized fault injection and ground-truth labeling.
//!
//! A fault's impact at hour `t` is its severity scaled by an onset profile.
//! Impacts rewrite the nominal sensor values through per-fault multiplicative
//! and additive effects; an optional additive drift can then skew individual
//! sensor readings without affecting labels.

use crate::channel::Channel;
use crate::sim::NominalState;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Default impact threshold above which an hour is labeled anomalous.
///
/// Ramp and exponential onsets start at zero impact; labeling only strictly
/// positive impacts avoids marking physically invisible instants.
pub const LABEL_THRESHOLD: f64 = 0.01;

/// How a fault's impact grows after onset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OnsetProfile {
    /// Full impact immediately at `t0`.
    Step { t0: u32 },
    /// Linear rise from zero at `t0` to full impact at `t1`.
    LinearRamp { t0: u32, t1: u32 },
    /// Exponential approach to full impact with time constant `tau` (hours).
    Exponential { t0: u32, tau: f64 },
}

impl OnsetProfile {
    pub fn onset_hour(&self) -> u32 {
        match *self {
            OnsetProfile::Step { t0 }
            | OnsetProfile::LinearRamp { t0, .. }
            | OnsetProfile::Exponential { t0, .. } => t0,
        }
    }

    /// Normalized onset function f(t) in [0, 1] for t >= t0.
    fn shape(&self, t: u32) -> f64 {
        match *self {
            OnsetProfile::Step { .. } => 1.0,
            OnsetProfile::LinearRamp { t0, t1 } => {
                let span = (t1 - t0) as f64;
                ((t - t0) as f64 / span).min(1.0)
            }
            OnsetProfile::Exponential { t0, tau } => 1.0 - (-((t - t0) as f64) / tau).exp(),
        }
    }
}

/// The three modeled fault classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultType {
    RefrigerantLeak,
    CompressorFault,
    FilterBlockage,
}

impl FaultType {
    pub const ALL: [FaultType; 3] = [
        FaultType::RefrigerantLeak,
        FaultType::CompressorFault,
        FaultType::FilterBlockage,
    ];

    /// Human-readable name matching the diagnostic prompt wording.
    pub fn label(&self) -> &'static str {
        match self {
            FaultType::RefrigerantLeak => "Refrigerant leak",
            FaultType::CompressorFault => "Compressor failure",
            FaultType::FilterBlockage => "Blocked filter",
        }
    }
}

impl fmt::Display for FaultType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One injected fault: type, severity in [0, 1], onset profile, and end hour (exclusive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultSpec {
    pub fault_type: FaultType,
    pub severity: f64,
    pub onset: OnsetProfile,
    pub end: u32,
}

impl FaultSpec {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.severity) {
            return Err(format!("severity must be in [0, 1], got {}", self.severity));
        }
        if self.end <= self.onset.onset_hour() {
            return Err(format!(
                "end ({}) must be after onset t0 ({})",
                self.end,
                self.onset.onset_hour()
            ));
        }
        match self.onset {
            OnsetProfile::LinearRamp { t0, t1 } if t1 <= t0 => {
                Err(format!("ramp saturation t1 ({t1}) must be after t0 ({t0})"))
            }
            OnsetProfile::Exponential { tau, .. } if !tau.is_finite() || tau <= 0.0 => {
                Err(format!("exponential tau must be > 0, got {tau}"))
            }
            _ => Ok(()),
        }
    }
}

/// Additive linear drift on one sensor channel, starting at `start`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftSpec {
    pub channel: Channel,
    /// Channel units per hour.
    pub rate: f64,
    pub start: u32,
}

impl DriftSpec {
    pub fn validate(&self) -> Result<(), String> {
        if !self.rate.is_finite() {
            return Err(format!("drift rate must be finite, got {}", self.rate));
        }
        Ok(())
    }
}

/// Per-hour ground-truth labels. `anomaly` is the OR of the three fault flags;
/// drift never sets it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub anomaly: bool,
    pub leak_active: bool,
    pub comp_active: bool,
    pub filter_active: bool,
}

impl GroundTruth {
    pub const CLEAN: GroundTruth = GroundTruth {
        anomaly: false,
        leak_active: false,
        comp_active: false,
        filter_active: false,
    };

    pub fn fault_flag(&self, fault: FaultType) -> bool {
        match fault {
            FaultType::RefrigerantLeak => self.leak_active,
            FaultType::CompressorFault => self.comp_active,
            FaultType::FilterBlockage => self.filter_active,
        }
    }
}

/// Active impact F(t) of each fault class at one hour.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ImpactSet {
    pub leak: f64,
    pub comp: f64,
    pub filter: f64,
}

impl ImpactSet {
    /// Folds all fault specs down to one impact per class at hour `t`.
    ///
    /// Overlapping specs of the same class combine by maximum, which keeps
    /// every impact within [0, severity].
    pub fn at(specs: &[FaultSpec], t: u32) -> ImpactSet {
        let mut set = ImpactSet::default();
        for spec in specs {
            let f = fault_impact(spec, t);
            let slot = match spec.fault_type {
                FaultType::RefrigerantLeak => &mut set.leak,
                FaultType::CompressorFault => &mut set.comp,
                FaultType::FilterBlockage => &mut set.filter,
            };
            *slot = slot.max(f);
        }
        set
    }
}

/// Time-varying impact F(t) = S * f(t), zero outside [t0, end).
pub fn fault_impact(spec: &FaultSpec, t: u32) -> f64 {
    if t < spec.onset.onset_hour() || t >= spec.end {
        return 0.0;
    }
    spec.severity * spec.onset.shape(t)
}

/// Applies active fault impacts to a nominal state, in fixed order
/// leak -> compressor -> filter, then floors the pressure/flow channels at
/// zero. Temperature channels are left unfloored.
pub fn apply_faults(nominal: &NominalState, impacts: ImpactSet) -> NominalState {
    let mut s = *nominal;
    let f = impacts.leak;
    if f > 0.0 {
        s.q_cool *= 1.0 - 0.5 * f;
        s.p_suct *= 1.0 - 0.3 * f;
        s.p_comp *= 1.0 + 0.2 * f;
        s.t_supply += 3.0 * f;
    }
    let f = impacts.comp;
    if f > 0.0 {
        s.p_comp *= 1.0 - 0.7 * f;
        s.q_cool *= 1.0 - 0.9 * f;
        s.p_suct *= 1.0 + 0.2 * f;
        s.p_disc *= 1.0 - 0.5 * f;
    }
    let f = impacts.filter;
    if f > 0.0 {
        s.q_air *= 1.0 - 0.4 * f;
        s.t_return += 2.0 * f;
        s.p_comp *= 1.0 + 0.15 * f;
    }
    s.q_cool = s.q_cool.max(0.0);
    s.p_comp = s.p_comp.max(0.0);
    s.p_suct = s.p_suct.max(0.0);
    s.p_disc = s.p_disc.max(0.0);
    s.q_air = s.q_air.max(0.0);
    s
}

/// Adds accumulated drift to a reading when the channel matches.
pub fn apply_drift(value: f64, channel: Channel, spec: &DriftSpec, t: u32) -> f64 {
    if spec.channel != channel {
        return value;
    }
    value + spec.rate * (t.saturating_sub(spec.start)) as f64
}

/// Labels one hour from its impacts: a fault flag fires when its impact
/// strictly exceeds the threshold; `anomaly` is the OR of the flags.
pub fn label(impacts: ImpactSet, threshold: f64) -> GroundTruth {
    debug_assert!(threshold >= 0.0);
    let leak_active = impacts.leak > threshold;
    let comp_active = impacts.comp > threshold;
    let filter_active = impacts.filter > threshold;
    GroundTruth {
        anomaly: leak_active || comp_active || filter_active,
        leak_active,
        comp_active,
        filter_active,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn nominal() -> NominalState {
        NominalState {
            t: 0,
            t_amb: 30.0,
            t_in: 22.0,
            q_cool: 10.0,
            p_comp: 4.0,
            p_suct: 3.0,
            p_disc: 4.0,
            t_supply: 14.0,
            t_return: 24.0,
            q_air: 1000.0,
            cooling_active: true,
        }
    }

    #[test]
    fn step_impact_is_severity_inside_interval() {
        let spec = FaultSpec {
            fault_type: FaultType::RefrigerantLeak,
            severity: 0.8,
            onset: OnsetProfile::Step { t0: 10 },
            end: 20,
        };
        assert_eq!(fault_impact(&spec, 9), 0.0);
        assert_eq!(fault_impact(&spec, 10), 0.8);
        assert_eq!(fault_impact(&spec, 19), 0.8);
        assert_eq!(fault_impact(&spec, 20), 0.0);
    }

    #[test]
    fn ramp_impact_is_linear_to_saturation() {
        let spec = FaultSpec {
            fault_type: FaultType::CompressorFault,
            severity: 1.0,
            onset: OnsetProfile::LinearRamp { t0: 10, t1: 20 },
            end: 40,
        };
        assert_eq!(fault_impact(&spec, 10), 0.0);
        assert!((fault_impact(&spec, 15) - 0.5).abs() < 1e-15);
        assert_eq!(fault_impact(&spec, 20), 1.0);
        assert_eq!(fault_impact(&spec, 30), 1.0);
    }

    #[test]
    fn exponential_impact_starts_at_zero() {
        let spec = FaultSpec {
            fault_type: FaultType::FilterBlockage,
            severity: 1.0,
            onset: OnsetProfile::Exponential { t0: 5, tau: 5.0 },
            end: 100,
        };
        assert_eq!(fault_impact(&spec, 5), 0.0);
        let one_tau = fault_impact(&spec, 10);
        assert!((one_tau - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn leak_at_full_severity_halves_cooling() {
        let out = apply_faults(
            &nominal(),
            ImpactSet {
                leak: 1.0,
                ..Default::default()
            },
        );
        assert!((out.q_cool - 5.0).abs() < 1e-12);
        assert!((out.p_suct - 3.0 * 0.7).abs() < 1e-12);
        assert!((out.p_comp - 4.0 * 1.2).abs() < 1e-12);
        assert!((out.t_supply - 17.0).abs() < 1e-12);
    }

    #[test]
    fn compressor_fault_at_full_severity() {
        let out = apply_faults(
            &nominal(),
            ImpactSet {
                comp: 1.0,
                ..Default::default()
            },
        );
        assert!((out.p_comp - 4.0 * 0.3).abs() < 1e-12);
        assert!((out.q_cool - 1.0).abs() < 1e-12);
        assert!((out.p_suct - 3.6).abs() < 1e-12);
        assert!((out.p_disc - 2.0).abs() < 1e-12);
    }

    #[test]
    fn leak_and_compressor_compose_multiplicatively() {
        let out = apply_faults(
            &nominal(),
            ImpactSet {
                leak: 1.0,
                comp: 1.0,
                filter: 0.0,
            },
        );
        // 10 * 0.5 * 0.1
        assert!((out.q_cool - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_impacts_are_identity() {
        let n = nominal();
        assert_eq!(apply_faults(&n, ImpactSet::default()), n);
    }

    #[test]
    fn drift_accumulates_linearly_after_start() {
        let spec = DriftSpec {
            channel: Channel::TAmb,
            rate: 0.1,
            start: 5,
        };
        assert_eq!(apply_drift(20.0, Channel::TAmb, &spec, 5), 20.0);
        assert!((apply_drift(20.0, Channel::TAmb, &spec, 15) - 21.0).abs() < 1e-12);
        assert_eq!(apply_drift(20.0, Channel::TIn, &spec, 15), 20.0);
        let zero = DriftSpec { rate: 0.0, ..spec };
        assert_eq!(apply_drift(20.0, Channel::TAmb, &zero, 50), 20.0);
    }

    #[test]
    fn label_fires_only_above_threshold() {
        let clean = label(ImpactSet::default(), LABEL_THRESHOLD);
        assert_eq!(clean, GroundTruth::CLEAN);

        let leak = label(
            ImpactSet {
                leak: 0.5,
                ..Default::default()
            },
            LABEL_THRESHOLD,
        );
        assert!(leak.anomaly && leak.leak_active);
        assert!(!leak.comp_active && !leak.filter_active);

        // Exponential onset at exactly t0 has zero impact and must not label.
        let spec = FaultSpec {
            fault_type: FaultType::RefrigerantLeak,
            severity: 1.0,
            onset: OnsetProfile::Exponential { t0: 7, tau: 3.0 },
            end: 50,
        };
        let at_onset = label(
            ImpactSet {
                leak: fault_impact(&spec, 7),
                ..Default::default()
            },
            LABEL_THRESHOLD,
        );
        assert!(!at_onset.anomaly);
    }

    #[test]
    fn overlapping_same_type_specs_take_max_impact() {
        let specs = [
            FaultSpec {
                fault_type: FaultType::FilterBlockage,
                severity: 0.4,
                onset: OnsetProfile::Step { t0: 0 },
                end: 100,
            },
            FaultSpec {
                fault_type: FaultType::FilterBlockage,
                severity: 0.9,
                onset: OnsetProfile::Step { t0: 10 },
                end: 20,
            },
        ];
        assert_eq!(ImpactSet::at(&specs, 5).filter, 0.4);
        assert_eq!(ImpactSet::at(&specs, 15).filter, 0.9);
        assert_eq!(ImpactSet::at(&specs, 25).filter, 0.4);
    }

    #[test]
    fn spec_validation_rejects_bad_parameters() {
        let bad_severity = FaultSpec {
            fault_type: FaultType::RefrigerantLeak,
            severity: 1.2,
            onset: OnsetProfile::Step { t0: 0 },
            end: 10,
        };
        assert!(bad_severity.validate().is_err());

        let bad_ramp = FaultSpec {
            fault_type: FaultType::RefrigerantLeak,
            severity: 0.5,
            onset: OnsetProfile::LinearRamp { t0: 10, t1: 10 },
            end: 20,
        };
        assert!(bad_ramp.validate().is_err());

        let bad_end = FaultSpec {
            fault_type: FaultType::RefrigerantLeak,
            severity: 0.5,
            onset: OnsetProfile::Step { t0: 10 },
            end: 10,
        };
        assert!(bad_end.validate().is_err());
    }

    /// Direct-formula oracle for the composed fault effects, coded
    /// independently of the sequential application in `apply_faults`.
    fn composition_oracle(n: &NominalState, leak: f64, comp: f64, filter: f64) -> NominalState {
        let mut out = *n;
        out.q_cool = (n.q_cool * (1.0 - 0.5 * leak) * (1.0 - 0.9 * comp)).max(0.0);
        out.p_suct = (n.p_suct * (1.0 - 0.3 * leak) * (1.0 + 0.2 * comp)).max(0.0);
        out.p_comp =
            (n.p_comp * (1.0 + 0.2 * leak) * (1.0 - 0.7 * comp) * (1.0 + 0.15 * filter)).max(0.0);
        out.p_disc = (n.p_disc * (1.0 - 0.5 * comp)).max(0.0);
        out.t_supply = n.t_supply + 3.0 * leak;
        out.t_return = n.t_return + 2.0 * filter;
        out.q_air = (n.q_air * (1.0 - 0.4 * filter)).max(0.0);
        out
    }

    #[test]
    fn composition_matches_direct_formula_oracle_on_random_tuples() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1234);
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
        for case in 0..1000 {
            let impacts = ImpactSet {
                leak: if rng.gen_bool(0.8) { rng.gen() } else { 0.0 },
                comp: if rng.gen_bool(0.8) { rng.gen() } else { 0.0 },
                filter: if rng.gen_bool(0.8) { rng.gen() } else { 0.0 },
            };
            let n = NominalState {
                t: case,
                t_amb: rng.gen_range(-10.0..45.0),
                t_in: rng.gen_range(10.0..35.0),
                q_cool: rng.gen_range(0.0..20.0),
                // Occasionally negative, as power noise can produce, so the
                // zero floor is exercised on both sides.
                p_comp: rng.gen_range(-1.0..8.0),
                p_suct: rng.gen_range(0.0..5.0),
                p_disc: rng.gen_range(0.0..6.0),
                t_supply: rng.gen_range(5.0..30.0),
                t_return: rng.gen_range(10.0..35.0),
                q_air: rng.gen_range(0.0..1200.0),
                cooling_active: rng.gen_bool(0.5),
            };
            let actual = apply_faults(&n, impacts);
            let expected = composition_oracle(&n, impacts.leak, impacts.comp, impacts.filter);
            for ch in Channel::ALL {
                let (a, e) = match ch {
                    Channel::TAmb => (actual.t_amb, expected.t_amb),
                    Channel::TIn => (actual.t_in, expected.t_in),
                    Channel::PComp => (actual.p_comp, expected.p_comp),
                    Channel::QCool => (actual.q_cool, expected.q_cool),
                    Channel::PSuct => (actual.p_suct, expected.p_suct),
                    Channel::PDisc => (actual.p_disc, expected.p_disc),
                    Channel::TSupply => (actual.t_supply, expected.t_supply),
                    Channel::TReturn => (actual.t_return, expected.t_return),
                    Channel::QAir => (actual.q_air, expected.q_air),
                };
                assert!(rel(a, e) <= 1e-12, "case {case} channel {ch}: {a} vs {e}");
            }
        }
    }

    proptest! {
        // Impact never decreases over the active interval for any profile.
        #[test]
        fn impact_is_nondecreasing(
            severity in 0.0f64..=1.0,
            t0 in 0u32..50,
            span in 1u32..80,
            tau in 0.1f64..40.0,
            profile_kind in 0usize..3,
        ) {
            let end = t0 + span + 1;
            let onset = match profile_kind {
                0 => OnsetProfile::Step { t0 },
                1 => OnsetProfile::LinearRamp { t0, t1: t0 + span },
                _ => OnsetProfile::Exponential { t0, tau },
            };
            let spec = FaultSpec { fault_type: FaultType::RefrigerantLeak, severity, onset, end };
            let mut prev = 0.0f64;
            for t in t0..end {
                let f = fault_impact(&spec, t);
                prop_assert!(f >= prev - 1e-15);
                prop_assert!(f <= severity + 1e-15);
                prev = f;
            }
        }

        // Impact scales linearly in severity.
        #[test]
        fn impact_scales_linearly_in_severity(
            severity in 0.0f64..=1.0,
            t in 0u32..100,
            tau in 0.1f64..40.0,
        ) {
            let unit = FaultSpec {
                fault_type: FaultType::RefrigerantLeak,
                severity: 1.0,
                onset: OnsetProfile::Exponential { t0: 10, tau },
                end: 90,
            };
            let scaled = FaultSpec { severity, ..unit };
            let expected = severity * fault_impact(&unit, t);
            prop_assert!((fault_impact(&scaled, t) - expected).abs() <= 1e-12);
        }
    }
}
