//! Action selection: the two-call LLM agent (with mock backends for
//! offline use), the deterministic scripted playbook follower, and the two
//! scripted baselines (LQR, prograde alignment).

pub mod agent;
pub mod backend;
pub mod lqr;
pub mod prompt;
pub mod scripted;

pub use agent::{act, reason, Intent, LlmAgent, DEFAULT_TOKEN_BUDGET, FALLBACK_INTENT};
pub use backend::{
    ActorBackend, ActorCall, FailingBackend, HttpBackend, MockActor, MockReasoner, ReasonerBackend,
};
pub use lqr::LqrController;
pub use prompt::{assemble_prompt, render_observation, PromptContext, DEFAULT_BASELINE};
pub use scripted::{prograde_action, scripted_follower_action};

use crate::dynamics::{Observation, ScenarioConfig, ThrustCommand};
use crate::error::{Error, Result};
use crate::playbook::{Bullet, DerivedFeatures};
use serde::{Deserialize, Serialize};

/// The comparable policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    /// LLM agent pinned to the empty version-0 playbook.
    LlmStatic,
    /// LLM agent conditioned on the evolving playbook.
    LlmPlaybook,
    Lqr,
    Prograde,
    /// Deterministic playbook interpreter.
    ScriptedFollower,
}

impl PolicyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyKind::LlmStatic => "llm_static",
            PolicyKind::LlmPlaybook => "llm_playbook",
            PolicyKind::Lqr => "lqr",
            PolicyKind::Prograde => "prograde",
            PolicyKind::ScriptedFollower => "scripted_follower",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "llm_static" => Ok(PolicyKind::LlmStatic),
            "llm_playbook" => Ok(PolicyKind::LlmPlaybook),
            "lqr" => Ok(PolicyKind::Lqr),
            "prograde" => Ok(PolicyKind::Prograde),
            "scripted_follower" | "scripted" => Ok(PolicyKind::ScriptedFollower),
            other => Err(Error::Validation(format!("unknown policy `{other}`"))),
        }
    }

    /// Whether episodes run with this policy consult the evolving playbook.
    /// `llm_static` is by definition the empty version-0 playbook.
    pub fn uses_playbook(&self) -> bool {
        matches!(self, PolicyKind::LlmPlaybook | PolicyKind::ScriptedFollower)
    }

    pub fn needs_backend(&self) -> bool {
        matches!(self, PolicyKind::LlmStatic | PolicyKind::LlmPlaybook)
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What one control step produced.
#[derive(Debug, Clone)]
pub struct PolicyStep {
    pub command: ThrustCommand,
    pub intent: Option<Intent>,
    pub degraded: bool,
}

/// Runtime policy object; stateless between steps apart from the
/// precomputed LQR gain.
pub enum Policy {
    Prograde,
    Lqr(LqrController),
    ScriptedFollower,
    Llm { agent: LlmAgent, kind: PolicyKind },
}

impl Policy {
    pub fn kind(&self) -> PolicyKind {
        match self {
            Policy::Prograde => PolicyKind::Prograde,
            Policy::Lqr(_) => PolicyKind::Lqr,
            Policy::ScriptedFollower => PolicyKind::ScriptedFollower,
            Policy::Llm { kind, .. } => *kind,
        }
    }

    /// Build a policy for a scenario. LLM kinds read the backend from the
    /// `GUIDE_LLM_*` environment variables.
    pub fn build(kind: PolicyKind, scenario: &ScenarioConfig) -> Result<Policy> {
        match kind {
            PolicyKind::Prograde => Ok(Policy::Prograde),
            PolicyKind::ScriptedFollower => Ok(Policy::ScriptedFollower),
            PolicyKind::Lqr => Ok(Policy::Lqr(LqrController::for_mean_motion(scenario.chief_mean_motion)?)),
            PolicyKind::LlmStatic | PolicyKind::LlmPlaybook => {
                let backend = HttpBackend::from_env()?;
                let actor = HttpBackend::from_env()?;
                Ok(Policy::Llm {
                    agent: LlmAgent::new(Box::new(backend), Box::new(actor), DEFAULT_BASELINE.to_string()),
                    kind,
                })
            }
        }
    }

    /// Build an LLM policy with explicit (e.g. mock) backends.
    pub fn llm_with_backends(
        kind: PolicyKind,
        reasoner: Box<dyn ReasonerBackend>,
        actor: Box<dyn ActorBackend>,
        baseline: &str,
    ) -> Policy {
        Policy::Llm { agent: LlmAgent::new(reasoner, actor, baseline.to_string()), kind }
    }

    /// Select the thrust command for one control step.
    /// `bandit_max_accel` feeds the LQR acceleration-to-throttle conversion.
    pub fn decide(
        &self,
        obs: &Observation,
        features: &DerivedFeatures,
        active: &[Bullet],
        control_period: f64,
        remaining_time: f64,
        bandit_max_accel: f64,
    ) -> PolicyStep {
        let period = control_period.min(remaining_time.max(f64::MIN_POSITIVE));
        match self {
            Policy::Prograde => PolicyStep {
                command: prograde_action(obs, period),
                intent: None,
                degraded: false,
            },
            Policy::Lqr(ctl) => PolicyStep {
                command: ctl.action(obs, bandit_max_accel, period),
                intent: None,
                degraded: false,
            },
            Policy::ScriptedFollower => PolicyStep {
                command: scripted_follower_action(obs, features, active, period),
                intent: None,
                degraded: false,
            },
            Policy::Llm { agent, .. } => {
                let ctx = assemble_prompt(&agent.baseline, active, obs, features);
                let (command, intent, degraded) = agent.decide(&ctx, period, remaining_time);
                PolicyStep { command, intent: Some(intent), degraded }
            }
        }
    }
}
