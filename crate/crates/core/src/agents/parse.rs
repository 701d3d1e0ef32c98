//! Lenient parsing of free-form model replies into structured verdicts.
//!
//! Replies are prose, so extraction is layered: explicit labeled verdicts
//! first, then yes/no tokens near the relevant noun, then bare true/false.
//! A reply that yields no verdict is an error the orchestrator may retry.

use crate::diagnosis::{Detection, FaultCall};
use crate::faults::FaultType;
use regex::Regex;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("reply contains no anomaly verdict")]
    NoAnomalyVerdict,

    #[error("reply contains no verdict for {0}")]
    MissingFaultVerdict(FaultType),
}

fn labeled_verdict_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"(?i)anomal(?:y|ies|ous)?(?:\s+is)?(?:\s+(?:present|detected))?\s*[:\-–*]+\s*\**\s*(yes|no|true|false)\b",
        )
        .expect("static regex compiles")
    })
}

fn yes_no_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\b(yes|no)\b").expect("static regex compiles"))
}

fn true_false_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\b(true|false)\b").expect("static regex compiles"))
}

fn token_is_positive(token: &str) -> bool {
    matches!(
        token.to_ascii_lowercase().as_str(),
        "yes" | "true" | "present" | "detected"
    )
}

/// Extracts the anomaly verdict and the observation/explanation sections.
pub fn parse_anomaly_reply(reply: &str) -> Result<Detection, ParseError> {
    let anomalous = extract_anomaly_verdict(reply).ok_or(ParseError::NoAnomalyVerdict)?;
    let key_observations = section(reply, &["key observation", "observation"]).unwrap_or_default();
    let explanation = section(reply, &["explanation"])
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| reply.trim().to_string());
    Ok(Detection {
        anomalous,
        key_observations,
        explanation,
        raw_reply: reply.to_string(),
    })
}

fn extract_anomaly_verdict(reply: &str) -> Option<bool> {
    // Layer 1: an explicitly labeled verdict ("anomaly is present: yes",
    // "Predicted anomaly: True").
    if let Some(caps) = labeled_verdict_re().captures(reply) {
        return Some(token_is_positive(&caps[1]));
    }
    // Layer 2: a standalone yes/no within a short span of an anomaly mention.
    let lower = reply.to_ascii_lowercase();
    if let Some(pos) = lower.find("anomal") {
        let start = ceil_char_boundary(&lower, pos.saturating_sub(60));
        let end = ceil_char_boundary(&lower, (pos + 60).min(lower.len()));
        let neighborhood = &lower[start..end];
        let mut best: Option<(usize, bool)> = None;
        for caps in yes_no_re().captures_iter(neighborhood) {
            let m = caps.get(1).expect("group 1 present");
            let distance = (m.start() as isize - (pos - start) as isize).unsigned_abs();
            if best.is_none_or(|(d, _)| distance < d) {
                best = Some((distance, token_is_positive(m.as_str())));
            }
        }
        if let Some((_, verdict)) = best {
            return Some(verdict);
        }
    }
    // Layer 3: a bare true/false anywhere.
    true_false_re()
        .captures(reply)
        .map(|caps| token_is_positive(&caps[1]))
}

/// Pulls the text under a heading until the next heading or blank line group.
fn section(reply: &str, headings: &[&str]) -> Option<String> {
    let lower = reply.to_ascii_lowercase();
    for heading in headings {
        if let Some(pos) = lower.find(heading) {
            let after = &reply[pos + heading.len()..];
            let after = after.trim_start_matches(['s', 'S']);
            let after = after.trim_start_matches([':', '-', '*', ' ']);
            let stop = [
                "predicted anomaly",
                "explanation",
                "ground truth",
                "key observation",
            ]
            .iter()
            .filter_map(|h| after.to_ascii_lowercase().find(h))
            .min()
            .unwrap_or(after.len());
            let text = after[..stop].trim().to_string();
            if !text.is_empty() {
                return Some(text);
            }
        }
    }
    None
}

/// Name patterns accepted for each fault type.
fn fault_name_patterns(fault: FaultType) -> &'static [&'static str] {
    match fault {
        FaultType::RefrigerantLeak => &["refrigerant leak", "leak"],
        FaultType::CompressorFault => &["compressor failure", "compressor fault", "compressor"],
        FaultType::FilterBlockage => &["blocked filter", "filter blockage", "filter"],
    }
}

fn verdict_token_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"(?i)\b(not\s+present|not\s+detected|absent|true|false|yes|no|present|detected)\b",
        )
        .expect("static regex compiles")
    })
}

/// Extracts one verdict per expected fault; faults not asked about stay false.
///
/// For each fault the scan tries, in order: a verdict token shortly after a
/// name mention, one shortly before it, and finally (when exactly one fault
/// is expected) a bare verdict anywhere in the reply.
pub fn parse_fault_reply(reply: &str, expected: &[FaultType]) -> Result<FaultCall, ParseError> {
    let mut call = FaultCall::negative();
    for &fault in expected {
        let verdict = extract_fault_verdict(reply, fault).or_else(|| {
            if expected.len() == 1 {
                bare_verdict(reply)
            } else {
                None
            }
        });
        match verdict {
            Some(v) => call.set_flag(fault, v),
            None => return Err(ParseError::MissingFaultVerdict(fault)),
        }
    }
    call.explanation = section(reply, &["explanation"])
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| reply.trim().to_string());
    call.raw_reply = reply.to_string();
    Ok(call)
}

fn extract_fault_verdict(reply: &str, fault: FaultType) -> Option<bool> {
    let lower = reply.to_ascii_lowercase();
    for pattern in fault_name_patterns(fault) {
        let mut search_from = 0;
        while let Some(rel) = lower[search_from..].find(pattern) {
            let pos = search_from + rel;
            let name_end = pos + pattern.len();
            // Forward: the first verdict token within a short span after the
            // name, cut off at the next mention of a different fault so a
            // neighboring verdict is never claimed.
            let mut fwd_end = ceil_char_boundary(reply, (name_end + 60).min(reply.len()));
            for other in FaultType::ALL.iter().filter(|&&f| f != fault) {
                for other_pattern in fault_name_patterns(*other) {
                    if let Some(cut) = lower[name_end..fwd_end].find(other_pattern) {
                        fwd_end = name_end + cut;
                    }
                }
            }
            if let Some(caps) = verdict_token_re().captures(&reply[name_end..fwd_end]) {
                let token = caps.get(1).expect("group 1 present").as_str();
                return Some(verdict_token_positive(token));
            }
            // Backward: a token just before the name ("false for refrigerant leak").
            let back_start = ceil_char_boundary(reply, pos.saturating_sub(30));
            let before = &reply[back_start..pos];
            if let Some(caps) = verdict_token_re().captures_iter(before).last() {
                let token = caps.get(1).expect("group 1 present").as_str();
                return Some(verdict_token_positive(token));
            }
            search_from = name_end;
        }
    }
    None
}

fn verdict_token_positive(token: &str) -> bool {
    let t = token.to_ascii_lowercase();
    !(t.starts_with("not") || t == "absent" || t == "false" || t == "no")
}

fn bare_verdict(reply: &str) -> Option<bool> {
    verdict_token_re()
        .captures(reply)
        .map(|caps| verdict_token_positive(caps.get(1).expect("group 1 present").as_str()))
}

fn ceil_char_boundary(s: &str, mut idx: usize) -> usize {
    while idx < s.len() && !s.is_char_boundary(idx) {
        idx += 1;
    }
    idx.min(s.len())
}
