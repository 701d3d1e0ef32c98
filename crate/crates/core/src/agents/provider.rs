//! Completion providers: HTTP transport, offline mocks, and transcript
//! record/replay.

use crate::diagnosis::FaultCall;
use crate::faults::{FaultType, GroundTruth};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;
use thiserror::Error;

/// Which pipeline stage issued a request. Mocks use this (with the window
/// hour) to answer from ground truth; the HTTP transport ignores it and sends
/// only the model name and messages over the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptStage {
    Anomaly,
    /// Centralized classification: one prompt covering all three faults.
    FaultAll,
    /// Decentralized classification: one prompt for a single fault.
    FaultSingle,
}

/// One completion request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub model: String,
    pub system_text: String,
    pub user_text: String,
    pub stage: PromptStage,
    /// Evaluation hour of the window under judgment (replay metadata).
    pub window_end: Option<u32>,
    /// The single fault a decentralized prompt asks about.
    pub fault: Option<FaultType>,
}

/// Transport and protocol failures. Parse failures of otherwise-delivered
/// replies are not provider errors.
#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("transport error: {0}")]
    Transport(String),

    #[error("provider returned HTTP {status}: {body}")]
    Http { status: u16, body: String },

    #[error("malformed provider response: {0}")]
    MalformedResponse(String),

    #[error("no transcript entry for request {key}")]
    TranscriptMiss { key: String },

    #[error("provider is not configured: {0}")]
    NotConfigured(String),
}

/// A chat-completion backend. Implementations are stateless per call;
/// retries belong to the orchestrator.
pub trait CompletionProvider: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<String, ProviderError>;
}

/// Stable content hash identifying a request in transcript files.
pub fn request_key(request: &CompletionRequest) -> String {
    let mut hasher = Sha256::new();
    hasher.update(request.model.as_bytes());
    hasher.update([0]);
    hasher.update(request.system_text.as_bytes());
    hasher.update([0]);
    hasher.update(request.user_text.as_bytes());
    hex_encode(&hasher.finalize())
}

fn hex_encode(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

// --- HTTP ------------------------------------------------------------------

/// POSTs `{model, messages}` to a fixed endpoint with bearer-token auth and
/// reads the first choice's message content.
pub struct HttpProvider {
    client: reqwest::blocking::Client,
    endpoint: String,
    token: String,
}

impl HttpProvider {
    /// Environment variable holding the bearer token.
    pub const TOKEN_ENV: &'static str = "PHM_PROVIDER_TOKEN";
    /// Environment variable holding the endpoint URL.
    pub const URL_ENV: &'static str = "PHM_PROVIDER_URL";

    pub fn new(endpoint: String, token: String, timeout: Duration) -> Result<Self, ProviderError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| ProviderError::NotConfigured(e.to_string()))?;
        Ok(HttpProvider {
            client,
            endpoint,
            token,
        })
    }

    /// Builds a provider from `PHM_PROVIDER_URL` and `PHM_PROVIDER_TOKEN`.
    pub fn from_env(timeout: Duration) -> Result<Self, ProviderError> {
        let endpoint = std::env::var(Self::URL_ENV)
            .map_err(|_| ProviderError::NotConfigured(format!("{} is not set", Self::URL_ENV)))?;
        let token = std::env::var(Self::TOKEN_ENV)
            .map_err(|_| ProviderError::NotConfigured(format!("{} is not set", Self::TOKEN_ENV)))?;
        Self::new(endpoint, token, timeout)
    }

    fn request_body(request: &CompletionRequest) -> serde_json::Value {
        serde_json::json!({
            "model": request.model,
            "messages": [
                { "role": "system", "content": request.system_text },
                { "role": "user", "content": request.user_text },
            ],
        })
    }

    fn extract_reply(body: &serde_json::Value) -> Result<String, ProviderError> {
        body.get("choices")
            .and_then(|c| c.get(0))
            .and_then(|c| c.get("message"))
            .and_then(|m| m.get("content"))
            .and_then(|c| c.as_str())
            .map(str::to_string)
            .ok_or_else(|| {
                ProviderError::MalformedResponse("missing choices[0].message.content".to_string())
            })
    }
}

impl CompletionProvider for HttpProvider {
    fn complete(&self, request: &CompletionRequest) -> Result<String, ProviderError> {
        let response = self
            .client
            .post(&self.endpoint)
            .bearer_auth(&self.token)
            .json(&Self::request_body(request))
            .send()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            let body = response.text().unwrap_or_default();
            return Err(ProviderError::Http {
                status: status.as_u16(),
                body: body.chars().take(400).collect(),
            });
        }
        let body: serde_json::Value = response
            .json()
            .map_err(|e| ProviderError::MalformedResponse(e.to_string()))?;
        Self::extract_reply(&body)
    }
}

// --- Oracle mock -------------------------------------------------------------

/// Answers every request from the ground-truth labels of the series under
/// evaluation. Replies are phrased so the standard parsers accept them.
pub struct OracleProvider {
    truths: Vec<GroundTruth>,
}

impl OracleProvider {
    pub fn new(truths: Vec<GroundTruth>) -> Self {
        OracleProvider { truths }
    }

    pub fn from_series(series: &crate::dataset::TimeSeries) -> Self {
        Self::new(series.records().iter().map(|r| r.truth).collect())
    }

    fn truth_at(&self, request: &CompletionRequest) -> Result<&GroundTruth, ProviderError> {
        let t = request.window_end.ok_or_else(|| {
            ProviderError::Transport("oracle mock requires the window hour on the request".into())
        })? as usize;
        self.truths.get(t).ok_or_else(|| {
            ProviderError::Transport(format!("oracle mock has no labels for hour {t}"))
        })
    }

    fn anomaly_reply(truth: &GroundTruth) -> String {
        format!(
            "Key observations: oracle replay of the labeled data.\n\
             Predicted anomaly: {}\n\
             Explanation: verdict mirrors the recorded label.",
            if truth.anomaly { "True" } else { "False" }
        )
    }

    fn fault_reply(truth: &GroundTruth, faults: &[FaultType]) -> String {
        let mut out = String::new();
        for fault in faults {
            out.push_str(&format!(
                "{}: {}\n",
                fault.label(),
                if truth.fault_flag(*fault) {
                    "true"
                } else {
                    "false"
                }
            ));
        }
        out.push_str("Explanation: verdicts mirror the recorded labels.");
        out
    }
}

impl CompletionProvider for OracleProvider {
    fn complete(&self, request: &CompletionRequest) -> Result<String, ProviderError> {
        let truth = self.truth_at(request)?;
        Ok(match request.stage {
            PromptStage::Anomaly => Self::anomaly_reply(truth),
            PromptStage::FaultAll => Self::fault_reply(truth, &FaultType::ALL),
            PromptStage::FaultSingle => {
                let fault = request.fault.ok_or_else(|| {
                    ProviderError::Transport(
                        "single-fault request is missing its fault type".into(),
                    )
                })?;
                Self::fault_reply(truth, &[fault])
            }
        })
    }
}

/// An oracle whose verdict for one fault type is forced, used to probe
/// decentralized per-agent independence.
pub struct PerturbedOracleProvider {
    inner: OracleProvider,
    perturbed_fault: FaultType,
    forced_value: bool,
}

impl PerturbedOracleProvider {
    pub fn new(inner: OracleProvider, fault: FaultType, forced_value: bool) -> Self {
        PerturbedOracleProvider {
            inner,
            perturbed_fault: fault,
            forced_value,
        }
    }
}

impl CompletionProvider for PerturbedOracleProvider {
    fn complete(&self, request: &CompletionRequest) -> Result<String, ProviderError> {
        if request.stage == PromptStage::FaultSingle && request.fault == Some(self.perturbed_fault)
        {
            return Ok(format!(
                "{}: {}\nExplanation: forced verdict.",
                self.perturbed_fault.label(),
                if self.forced_value { "true" } else { "false" }
            ));
        }
        if request.stage == PromptStage::FaultAll {
            let truth = self.inner.truth_at(request)?;
            let mut call = FaultCall::negative();
            for fault in FaultType::ALL {
                call.set_flag(fault, truth.fault_flag(fault));
            }
            call.set_flag(self.perturbed_fault, self.forced_value);
            let mut out = String::new();
            for fault in FaultType::ALL {
                out.push_str(&format!(
                    "{}: {}\n",
                    fault.label(),
                    if call.flag(fault) { "true" } else { "false" }
                ));
            }
            return Ok(out);
        }
        self.inner.complete(request)
    }
}

// --- Transcript record/replay ----------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct TranscriptEntry {
    key: String,
    model: String,
    stage: PromptStage,
    window_end: Option<u32>,
    fault: Option<FaultType>,
    system_text: String,
    user_text: String,
    reply: String,
}

/// Replays replies recorded in a JSONL transcript, keyed by content hash.
pub struct TranscriptProvider {
    replies: HashMap<String, String>,
}

impl TranscriptProvider {
    pub fn load(path: &Path) -> Result<Self, ProviderError> {
        let file = std::fs::File::open(path)
            .map_err(|e| ProviderError::NotConfigured(format!("{}: {e}", path.display())))?;
        let mut replies = HashMap::new();
        for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| ProviderError::Transport(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: TranscriptEntry = serde_json::from_str(&line).map_err(|e| {
                ProviderError::NotConfigured(format!("bad transcript line {}: {e}", i + 1))
            })?;
            replies.insert(entry.key, entry.reply);
        }
        Ok(TranscriptProvider { replies })
    }
}

impl CompletionProvider for TranscriptProvider {
    fn complete(&self, request: &CompletionRequest) -> Result<String, ProviderError> {
        let key = request_key(request);
        self.replies
            .get(&key)
            .cloned()
            .ok_or(ProviderError::TranscriptMiss { key })
    }
}

/// Wraps a provider and appends every exchange to a JSONL transcript.
pub struct RecordingProvider<'a> {
    inner: &'a dyn CompletionProvider,
    sink: Mutex<std::fs::File>,
}

impl<'a> RecordingProvider<'a> {
    pub fn create(inner: &'a dyn CompletionProvider, path: &Path) -> Result<Self, ProviderError> {
        let file = std::fs::File::create(path)
            .map_err(|e| ProviderError::NotConfigured(format!("{}: {e}", path.display())))?;
        Ok(RecordingProvider {
            inner,
            sink: Mutex::new(file),
        })
    }
}

impl CompletionProvider for RecordingProvider<'_> {
    fn complete(&self, request: &CompletionRequest) -> Result<String, ProviderError> {
        let reply = self.inner.complete(request)?;
        let entry = TranscriptEntry {
            key: request_key(request),
            model: request.model.clone(),
            stage: request.stage,
            window_end: request.window_end,
            fault: request.fault,
            system_text: request.system_text.clone(),
            user_text: request.user_text.clone(),
            reply: reply.clone(),
        };
        let line =
            serde_json::to_string(&entry).map_err(|e| ProviderError::Transport(e.to_string()))?;
        let mut sink = self.sink.lock().expect("transcript sink poisoned");
        writeln!(sink, "{line}").map_err(|e| ProviderError::Transport(e.to_string()))?;
        Ok(reply)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(stage: PromptStage, window_end: u32) -> CompletionRequest {
        CompletionRequest {
            model: "test-model".into(),
            system_text: "system".into(),
            user_text: "user".into(),
            stage,
            window_end: Some(window_end),
            fault: None,
        }
    }

    fn truths() -> Vec<GroundTruth> {
        vec![
            GroundTruth::CLEAN,
            GroundTruth {
                anomaly: true,
                leak_active: true,
                comp_active: false,
                filter_active: false,
            },
        ]
    }

    #[test]
    fn http_request_body_has_wire_shape() {
        let req = request(PromptStage::Anomaly, 0);
        let body = HttpProvider::request_body(&req);
        assert_eq!(body["model"], "test-model");
        assert_eq!(body["messages"][0]["role"], "system");
        assert_eq!(body["messages"][1]["role"], "user");
        assert_eq!(body["messages"][1]["content"], "user");
        // Replay metadata never crosses the wire.
        assert!(body.get("stage").is_none());
        assert!(body.get("window_end").is_none());
    }

    #[test]
    fn http_reply_extraction_reads_first_choice() {
        let body = serde_json::json!({
            "choices": [ { "message": { "content": "hello" } } ]
        });
        assert_eq!(HttpProvider::extract_reply(&body).unwrap(), "hello");
        let bad = serde_json::json!({ "choices": [] });
        assert!(HttpProvider::extract_reply(&bad).is_err());
    }

    #[test]
    fn oracle_reflects_ground_truth() {
        let oracle = OracleProvider::new(truths());
        let clean = oracle.complete(&request(PromptStage::Anomaly, 0)).unwrap();
        assert!(clean.contains("Predicted anomaly: False"));
        let leaky = oracle.complete(&request(PromptStage::Anomaly, 1)).unwrap();
        assert!(leaky.contains("Predicted anomaly: True"));
        let faults = oracle.complete(&request(PromptStage::FaultAll, 1)).unwrap();
        assert!(faults.contains("Refrigerant leak: true"));
        assert!(faults.contains("Compressor failure: false"));
    }

    #[test]
    fn oracle_without_window_hour_errors() {
        let oracle = OracleProvider::new(truths());
        let mut req = request(PromptStage::Anomaly, 0);
        req.window_end = None;
        assert!(oracle.complete(&req).is_err());
    }

    #[test]
    fn transcript_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("transcript.jsonl");
        let oracle = OracleProvider::new(truths());
        let recorder = RecordingProvider::create(&oracle, &path).unwrap();
        let req = request(PromptStage::Anomaly, 1);
        let live = recorder.complete(&req).unwrap();
        drop(recorder);

        let replay = TranscriptProvider::load(&path).unwrap();
        assert_eq!(replay.complete(&req).unwrap(), live);

        let mut miss = request(PromptStage::Anomaly, 0);
        miss.user_text = "different prompt".into();
        assert!(matches!(
            replay.complete(&miss),
            Err(ProviderError::TranscriptMiss { .. })
        ));
    }
}
