//! Per-channel descriptive statistics over a window.

use crate::channel::Channel;
use crate::dataset::WindowView;
use serde::{Deserialize, Serialize};
use std::fmt;

/// General direction of a channel over the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Rising,
    Falling,
    Stable,
}

impl fmt::Display for Trend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Trend::Rising => "rising",
            Trend::Falling => "falling",
            Trend::Stable => "stable",
        })
    }
}

/// The eight descriptors computed for one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Population standard deviation (divide by N).
    pub std: f64,
    pub median: f64,
    pub p25: f64,
    pub p75: f64,
    pub trend: Trend,
}

/// Statistics for every channel of one window, in fixed channel order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowStats {
    channels: Vec<(Channel, ChannelStats)>,
}

impl WindowStats {
    pub fn get(&self, channel: Channel) -> &ChannelStats {
        &self
            .channels
            .iter()
            .find(|(c, _)| *c == channel)
            .expect("all channels present")
            .1
    }

    pub fn iter(&self) -> impl Iterator<Item = (Channel, &ChannelStats)> {
        self.channels.iter().map(|(c, s)| (*c, s))
    }
}

/// Relative slope threshold below which a channel counts as stable.
const TREND_SLOPE_TOLERANCE: f64 = 1e-6;

/// Computes the eight descriptors for every channel of the window.
///
/// Percentiles interpolate linearly between closest ranks; the trend is the
/// sign of the least-squares slope, with slopes below a scale-aware tolerance
/// classed stable.
pub fn compute_stats(window: &WindowView<'_>) -> WindowStats {
    assert!(!window.is_empty(), "window must be non-empty");
    let channels = Channel::ALL
        .iter()
        .map(|&ch| {
            let values: Vec<f64> = window.records().iter().map(|r| r.channel(ch)).collect();
            (ch, channel_stats(&values))
        })
        .collect();
    WindowStats { channels }
}

fn channel_stats(values: &[f64]) -> ChannelStats {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    let std = variance.sqrt();

    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("sensor values are finite"));

    ChannelStats {
        min: sorted[0],
        max: sorted[n - 1],
        mean,
        std,
        median: percentile(&sorted, 0.5),
        p25: percentile(&sorted, 0.25),
        p75: percentile(&sorted, 0.75),
        trend: trend(values, std),
    }
}

/// Linear interpolation between closest ranks on a pre-sorted slice.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let rank = p * (n - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (rank - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

fn trend(values: &[f64], std: f64) -> Trend {
    let slope = least_squares_slope(values);
    if slope.abs() <= TREND_SLOPE_TOLERANCE * (std + 1e-12) {
        Trend::Stable
    } else if slope > 0.0 {
        Trend::Rising
    } else {
        Trend::Falling
    }
}

fn least_squares_slope(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 2 {
        return 0.0;
    }
    let x_mean = (n - 1.0) / 2.0;
    let y_mean = values.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, y) in values.iter().enumerate() {
        let dx = i as f64 - x_mean;
        num += dx * (y - y_mean);
        den += dx * dx;
    }
    num / den
}
