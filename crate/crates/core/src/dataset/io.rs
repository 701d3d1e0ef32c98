//! Comma-separated data file import/export.
//!
//! Layout: header `t,<nine channels>,anomaly,leak,comp,filter`, one row per
//! hour, booleans as 0/1, floats written with full round-trip precision.

use crate::channel::Channel;
use crate::dataset::{SensorRecord, TimeSeries};
use crate::error::DataError;
use crate::faults::GroundTruth;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

const TRUTH_COLUMNS: [&str; 4] = ["anomaly", "leak", "comp", "filter"];

fn expected_header() -> String {
    let mut h = String::from("t");
    for ch in Channel::ALL {
        h.push(',');
        h.push_str(ch.name());
    }
    for col in TRUTH_COLUMNS {
        h.push(',');
        h.push_str(col);
    }
    h
}

/// Writes the series to `path`, overwriting any existing file.
pub fn export(series: &TimeSeries, path: &Path) -> Result<(), DataError> {
    let mut out = expected_header();
    out.push('\n');
    for r in series.records() {
        write!(out, "{}", r.t).unwrap();
        for ch in Channel::ALL {
            write!(out, ",{}", r.channel(ch)).unwrap();
        }
        write!(
            out,
            ",{},{},{},{}",
            r.truth.anomaly as u8,
            r.truth.leak_active as u8,
            r.truth.comp_active as u8,
            r.truth.filter_active as u8
        )
        .unwrap();
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads a series back, validating the header, every field, and the
/// timestamp/label invariants. Errors carry 1-based line numbers.
pub fn import(path: &Path) -> Result<TimeSeries, DataError> {
    let text = fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut lines = text.lines().enumerate();

    let (_, header) = lines.next().ok_or(DataError::Empty)?;
    if header.trim_end() != expected_header() {
        return Err(DataError::Parse {
            line: 1,
            message: format!(
                "header mismatch: expected `{}`, found `{}`",
                expected_header(),
                header
            ),
        });
    }

    let mut records = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1; // 1-based
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 14 {
            return Err(DataError::Parse {
                line,
                message: format!("expected 14 columns, found {}", fields.len()),
            });
        }
        let t: u32 = fields[0].trim().parse().map_err(|_| DataError::Parse {
            line,
            message: format!("invalid timestamp `{}`", fields[0]),
        })?;
        let mut values = [0.0f64; 9];
        for (i, v) in values.iter_mut().enumerate() {
            *v = fields[1 + i].trim().parse().map_err(|_| DataError::Parse {
                line,
                message: format!(
                    "invalid value `{}` in column {}",
                    fields[1 + i],
                    Channel::ALL[i].name()
                ),
            })?;
        }
        let mut flags = [false; 4];
        for (i, f) in flags.iter_mut().enumerate() {
            *f = match fields[10 + i].trim() {
                "0" => false,
                "1" => true,
                other => {
                    return Err(DataError::Parse {
                        line,
                        message: format!(
                            "invalid boolean `{other}` in column {} (expected 0 or 1)",
                            TRUTH_COLUMNS[i]
                        ),
                    })
                }
            };
        }
        let truth = GroundTruth {
            anomaly: flags[0],
            leak_active: flags[1],
            comp_active: flags[2],
            filter_active: flags[3],
        };
        if truth.anomaly != (truth.leak_active || truth.comp_active || truth.filter_active) {
            return Err(DataError::Validation {
                line,
                message: "anomaly flag must equal the OR of the fault flags".into(),
            });
        }
        let mut record = SensorRecord {
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
            truth,
        };
        for (i, ch) in Channel::ALL.iter().enumerate() {
            record.set_channel(*ch, values[i]);
        }
        records.push(record);
    }

    if records.is_empty() {
        return Err(DataError::Empty);
    }
    for (i, r) in records.iter().enumerate() {
        if r.t != i as u32 {
            return Err(DataError::Validation {
                line: i + 2,
                message: format!(
                    "timestamps must increase by 1 from 0; found {} at data row {}",
                    r.t, i
                ),
            });
        }
    }
    TimeSeries::new(records)
}
