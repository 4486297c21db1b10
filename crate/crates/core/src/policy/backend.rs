//! Reasoner/actor backends: a generic chat-style HTTP endpoint for real
//! models, plus deterministic in-process mocks for offline runs and tests.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::collections::BTreeMap;
use std::time::Duration;

pub const ENV_BASE_URL: &str = "GUIDE_LLM_BASE_URL";
pub const ENV_MODEL: &str = "GUIDE_LLM_MODEL";
pub const ENV_API_KEY: &str = "GUIDE_LLM_API_KEY";

/// Structured output the actor stage must produce: per-axis throttle plus
/// burn duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActorCall {
    pub fx: f64,
    pub fy: f64,
    pub fz: f64,
    pub duration: f64,
}

/// Free-text completion backend for the reasoning stage.
pub trait ReasonerBackend: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String>;
}

/// Tool-call backend for the actor stage.
pub trait ActorBackend: Send + Sync {
    fn call(&self, prompt: &str) -> Result<ActorCall>;
}

/// FNV-1a hash of a prompt; stable across runs, used to key canned mock
/// responses.
pub fn prompt_hash(text: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in text.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

// ── HTTP backend ────────────────────────────────────────────────────

/// Chat-completions client speaking the common `/chat/completions` JSON
/// shape. The actor call declares a `set_thrust` tool and requires the
/// response to contain a matching tool call.
pub struct HttpBackend {
    base_url: String,
    model: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(base_url: String, model: String, api_key: Option<String>, timeout: Duration) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| Error::Backend(format!("failed to build HTTP client: {e}")))?;
        Ok(Self { base_url: base_url.trim_end_matches('/').to_string(), model, api_key, client })
    }

    /// Configuration from `GUIDE_LLM_BASE_URL`, `GUIDE_LLM_MODEL` and
    /// `GUIDE_LLM_API_KEY`.
    pub fn from_env() -> Result<Self> {
        let base_url = std::env::var(ENV_BASE_URL)
            .map_err(|_| Error::Backend(format!("{ENV_BASE_URL} is not set")))?;
        let model = std::env::var(ENV_MODEL)
            .map_err(|_| Error::Backend(format!("{ENV_MODEL} is not set")))?;
        let api_key = std::env::var(ENV_API_KEY).ok();
        Self::new(base_url, model, api_key, Duration::from_secs(30))
    }

    fn post(&self, body: serde_json::Value) -> Result<serde_json::Value> {
        let mut req = self.client.post(format!("{}/chat/completions", self.base_url)).json(&body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| Error::Backend(format!("request failed: {e}")))?;
        if !resp.status().is_success() {
            return Err(Error::Backend(format!("backend returned HTTP {}", resp.status())));
        }
        resp.json().map_err(|e| Error::Backend(format!("malformed backend response: {e}")))
    }
}

impl ReasonerBackend for HttpBackend {
    fn complete(&self, prompt: &str) -> Result<String> {
        let body = json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        });
        let resp = self.post(body)?;
        resp["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| Error::Backend("response missing message content".into()))
    }
}

impl ActorBackend for HttpBackend {
    fn call(&self, prompt: &str) -> Result<ActorCall> {
        let body = json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "tools": [{
                "type": "function",
                "function": {
                    "name": "set_thrust",
                    "description": "Set per-axis throttle in [-1, 1] and burn duration in seconds.",
                    "parameters": {
                        "type": "object",
                        "properties": {
                            "fx": {"type": "number"},
                            "fy": {"type": "number"},
                            "fz": {"type": "number"},
                            "duration": {"type": "number"}
                        },
                        "required": ["fx", "fy", "fz", "duration"]
                    }
                }
            }],
            "tool_choice": {"type": "function", "function": {"name": "set_thrust"}},
        });
        let resp = self.post(body)?;
        let arguments = resp["choices"][0]["message"]["tool_calls"][0]["function"]["arguments"]
            .as_str()
            .ok_or_else(|| Error::Backend("response missing tool call arguments".into()))?;
        serde_json::from_str(arguments)
            .map_err(|e| Error::Backend(format!("malformed tool arguments: {e}")))
    }
}

// ── Mocks ───────────────────────────────────────────────────────────

/// Deterministic reasoner: canned responses by prompt hash, keyword-based
/// default otherwise.
#[derive(Debug, Clone, Default)]
pub struct MockReasoner {
    canned: BTreeMap<u64, String>,
}

impl MockReasoner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_canned(mut self, prompt: &str, intent: &str) -> Self {
        self.canned.insert(prompt_hash(prompt), intent.to_string());
        self
    }
}

impl ReasonerBackend for MockReasoner {
    fn complete(&self, prompt: &str) -> Result<String> {
        if let Some(intent) = self.canned.get(&prompt_hash(prompt)) {
            return Ok(intent.clone());
        }
        // Keyword policy mirroring the instructions the bullets carry.
        let intent = if prompt.contains("[guard_avoidance]") {
            "evade laterally away from the guard"
        } else if prompt.contains("[approach]") {
            "brake with backward throttle to kill closing speed"
        } else {
            "full forward toward the lady"
        };
        Ok(intent.to_string())
    }
}

/// Deterministic actor: maps intent keywords to a structured command.
#[derive(Debug, Clone, Default)]
pub struct MockActor {
    pub duration: f64,
}

impl MockActor {
    pub fn new(duration: f64) -> Self {
        Self { duration }
    }
}

impl ActorBackend for MockActor {
    fn call(&self, prompt: &str) -> Result<ActorCall> {
        let lower = prompt.to_ascii_lowercase();
        let (fx, fy, fz) = if lower.contains("zero thrust") || lower.contains("hold pattern") {
            (0.0, 0.0, 0.0)
        } else if lower.contains("evade") || lower.contains("lateral") {
            (0.0, 0.0, 1.0)
        } else if lower.contains("brake") || lower.contains("backward") {
            (0.0, -1.0, 0.0)
        } else if lower.contains("full forward") {
            (1.0, 0.0, 0.0)
        } else {
            (0.0, 0.0, 0.0)
        };
        Ok(ActorCall { fx, fy, fz, duration: self.duration })
    }
}

/// Backend that always fails; exercises the degraded-step paths.
#[derive(Debug, Clone, Copy, Default)]
pub struct FailingBackend;

impl ReasonerBackend for FailingBackend {
    fn complete(&self, _prompt: &str) -> Result<String> {
        Err(Error::Backend("simulated timeout".into()))
    }
}

impl ActorBackend for FailingBackend {
    fn call(&self, _prompt: &str) -> Result<ActorCall> {
        Err(Error::Backend("simulated timeout".into()))
    }
}

/// Actor returning a fixed raw call; used to test clamping of out-of-range
/// backend output.
#[derive(Debug, Clone, Copy)]
pub struct FixedActor(pub ActorCall);

impl ActorBackend for FixedActor {
    fn call(&self, _prompt: &str) -> Result<ActorCall> {
        Ok(self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prompt_hash_is_stable() {
        assert_eq!(prompt_hash(""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(prompt_hash("abc"), prompt_hash("abc"));
        assert_ne!(prompt_hash("abc"), prompt_hash("abd"));
    }

    #[test]
    fn canned_reasoner_overrides_keywords() {
        let mock = MockReasoner::new().with_canned("p", "tailored intent");
        assert_eq!(mock.complete("p").unwrap(), "tailored intent");
        assert_eq!(mock.complete("q").unwrap(), "full forward toward the lady");
    }

    #[test]
    fn mock_actor_keyword_mapping() {
        let actor = MockActor::new(1.0);
        let call = actor.call("full forward toward the lady").unwrap();
        assert_eq!((call.fx, call.fy, call.fz), (1.0, 0.0, 0.0));
        let call = actor.call("hold pattern: zero thrust").unwrap();
        assert_eq!((call.fx, call.fy, call.fz), (0.0, 0.0, 0.0));
    }
}
