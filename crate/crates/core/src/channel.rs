//! The nine monitored sensor channels.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// One of the nine sensor channels emitted every hour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Channel {
    TAmb,
    TIn,
    PComp,
    QCool,
    PSuct,
    PDisc,
    TSupply,
    TReturn,
    QAir,
}

impl Channel {
    /// All channels in fixed rendering/export order.
    pub const ALL: [Channel; 9] = [
        Channel::TAmb,
        Channel::TIn,
        Channel::PComp,
        Channel::QCool,
        Channel::PSuct,
        Channel::PDisc,
        Channel::TSupply,
        Channel::TReturn,
        Channel::QAir,
    ];

    /// Column name used in data files and rendered tables.
    pub fn name(&self) -> &'static str {
        match self {
            Channel::TAmb => "T_amb",
            Channel::TIn => "T_in",
            Channel::PComp => "P_comp",
            Channel::QCool => "Q_cool",
            Channel::PSuct => "P_suct",
            Channel::PDisc => "P_disc",
            Channel::TSupply => "T_supply",
            Channel::TReturn => "T_return",
            Channel::QAir => "Q_air",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Channel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Channel::ALL
            .iter()
            .copied()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown channel `{s}` (expected one of T_amb, T_in, P_comp, Q_cool, P_suct, P_disc, T_supply, T_return, Q_air)"))
    }
}
