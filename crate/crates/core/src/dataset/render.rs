//! Text renderings of windows for prompts: raw tables and statistics lines.

use crate::channel::Channel;
use crate::dataset::{WindowStats, WindowView};
use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// Input format handed to a detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReprMode {
    RawData,
    Statistics,
    Both,
}

impl ReprMode {
    pub fn includes_raw(&self) -> bool {
        matches!(self, ReprMode::RawData | ReprMode::Both)
    }

    pub fn includes_stats(&self) -> bool {
        matches!(self, ReprMode::Statistics | ReprMode::Both)
    }
}

/// Format of the normal-operation reference segment, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMode {
    None,
    RawData,
    Statistics,
    Both,
}

impl ReferenceMode {
    pub fn includes_raw(&self) -> bool {
        matches!(self, ReferenceMode::RawData | ReferenceMode::Both)
    }

    pub fn includes_stats(&self) -> bool {
        matches!(self, ReferenceMode::Statistics | ReferenceMode::Both)
    }
}

/// Which representations a detector receives for the window and the reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Representation {
    pub mode: ReprMode,
    pub reference_mode: ReferenceMode,
}

impl Representation {
    pub fn new(mode: ReprMode, reference_mode: ReferenceMode) -> Self {
        Representation {
            mode,
            reference_mode,
        }
    }
}

/// The four text blocks a prompt can embed. Blocks excluded by the
/// representation are empty strings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RenderedBlocks {
    pub sensor_data: String,
    pub statistics: String,
    pub reference_data: String,
    pub reference_statistics: String,
}

/// Renders the window (and optional reference) into the blocks selected by
/// the representation. Values print at two decimals in fixed channel order.
pub fn render(
    window: &WindowView<'_>,
    stats: &WindowStats,
    repr: Representation,
    reference: Option<(&WindowView<'_>, &WindowStats)>,
) -> RenderedBlocks {
    debug_assert_eq!(
        reference.is_some(),
        repr.reference_mode != ReferenceMode::None,
        "reference data must be supplied exactly when reference_mode selects it"
    );

    let mut blocks = RenderedBlocks::default();
    if repr.mode.includes_raw() {
        blocks.sensor_data = raw_table(window);
    }
    if repr.mode.includes_stats() {
        blocks.statistics = stats_block(stats);
    }
    if let Some((ref_window, ref_stats)) = reference {
        if repr.reference_mode.includes_raw() {
            blocks.reference_data = raw_table(ref_window);
        }
        if repr.reference_mode.includes_stats() {
            blocks.reference_statistics = stats_block(ref_stats);
        }
    }
    blocks
}

/// Timestamp-by-sensor table, one row per hour.
pub fn raw_table(window: &WindowView<'_>) -> String {
    let mut out = String::from("t");
    for ch in Channel::ALL {
        out.push(',');
        out.push_str(ch.name());
    }
    out.push('\n');
    for record in window.records() {
        write!(out, "{}", record.t).unwrap();
        for ch in Channel::ALL {
            write!(out, ",{:.2}", record.channel(ch)).unwrap();
        }
        out.push('\n');
    }
    out
}

/// One line per channel listing the eight descriptors.
pub fn stats_block(stats: &WindowStats) -> String {
    let mut out = String::new();
    for (ch, s) in stats.iter() {
        writeln!(
            out,
            "{}: min={:.2} max={:.2} mean={:.2} std={:.2} median={:.2} p25={:.2} p75={:.2} trend={}",
            ch.name(),
            s.min,
            s.max,
            s.mean,
            s.std,
            s.median,
            s.p25,
            s.p75,
            s.trend
        )
        .unwrap();
    }
    out
}
