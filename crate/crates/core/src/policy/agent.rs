//! Two-call decision agent: a bounded reasoning call produces a
//! short-horizon intent, then an actor call maps state + intent to the
//! structured thrust command. Backend failures never abort an episode;
//! they degrade the step to a safe fallback.

use super::backend::{ActorBackend, ReasonerBackend};
use super::prompt::PromptContext;
use crate::dynamics::ThrustCommand;
use crate::math::Vec3;
use serde::{Deserialize, Serialize};

/// Intent returned when the reasoner backend fails.
pub const FALLBACK_INTENT: &str = "hold pattern: zero thrust";

/// Default reasoner token budget.
pub const DEFAULT_TOKEN_BUDGET: usize = 256;

/// Short-horizon maneuver intent from the reasoning stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intent {
    pub text: String,
    pub token_budget_used: usize,
}

/// Whitespace-token truncation to the configured budget.
fn truncate_to_budget(text: &str, budget: usize) -> Intent {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let used = tokens.len().min(budget);
    Intent { text: tokens[..used].join(" "), token_budget_used: used }
}

/// Reasoning call. On backend failure returns the fallback intent and
/// flags the step as degraded.
pub fn reason(ctx: &PromptContext, backend: &dyn ReasonerBackend, token_budget: usize) -> (Intent, bool) {
    match backend.complete(&ctx.full_text()) {
        Ok(text) => (truncate_to_budget(&text, token_budget), false),
        Err(_) => (truncate_to_budget(FALLBACK_INTENT, token_budget), true),
    }
}

/// Actor call. Always yields a command satisfying the thrust invariants:
/// invalid backend output degrades to zero thrust, out-of-range components
/// are clamped (and flagged).
pub fn act(
    observation_rendering: &str,
    intent: &Intent,
    backend: &dyn ActorBackend,
    control_period: f64,
    remaining_time: f64,
) -> (ThrustCommand, bool) {
    let max_duration = control_period.min(remaining_time.max(f64::MIN_POSITIVE));
    let fallback = ThrustCommand::coast(max_duration);
    let prompt = format!("{observation_rendering}\nintent: {}", intent.text);
    match backend.call(&prompt) {
        Ok(call) => {
            let raw = Vec3::new(call.fx, call.fy, call.fz);
            if !raw.is_finite() || !call.duration.is_finite() || call.duration <= 0.0 {
                return (fallback, true);
            }
            let (cmd, clamped) =
                ThrustCommand::new(raw, call.duration.min(max_duration)).clamped();
            (cmd, clamped)
        }
        Err(_) => (fallback, true),
    }
}

/// The playbook-conditioned LLM policy: one reasoner + one actor backend
/// plus the fixed per-experiment baseline text.
pub struct LlmAgent {
    pub reasoner: Box<dyn ReasonerBackend>,
    pub actor: Box<dyn ActorBackend>,
    pub baseline: String,
    pub token_budget: usize,
}

impl LlmAgent {
    pub fn new(reasoner: Box<dyn ReasonerBackend>, actor: Box<dyn ActorBackend>, baseline: String) -> Self {
        Self { reasoner, actor, baseline, token_budget: DEFAULT_TOKEN_BUDGET }
    }

    /// One full control step: reason then act.
    pub fn decide(
        &self,
        ctx: &PromptContext,
        control_period: f64,
        remaining_time: f64,
    ) -> (ThrustCommand, Intent, bool) {
        let (intent, reason_degraded) = reason(ctx, self.reasoner.as_ref(), self.token_budget);
        let (command, act_degraded) =
            act(&ctx.observation_rendering, &intent, self.actor.as_ref(), control_period, remaining_time);
        (command, intent, reason_degraded || act_degraded)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::backend::{ActorCall, FailingBackend, FixedActor, MockActor, MockReasoner};

    fn ctx() -> PromptContext {
        PromptContext {
            baseline_text: "base".into(),
            active_bullet_texts: vec![],
            observation_rendering: "obs".into(),
        }
    }

    #[test]
    fn canned_mock_returns_exact_intent() {
        let c = ctx();
        let backend = MockReasoner::new().with_canned(&c.full_text(), "the canned intent");
        let (intent, degraded) = reason(&c, &backend, 64);
        assert_eq!(intent.text, "the canned intent");
        assert!(!degraded);
    }

    #[test]
    fn reasoner_failure_falls_back_and_flags() {
        let (intent, degraded) = reason(&ctx(), &FailingBackend, 64);
        assert_eq!(intent.text, FALLBACK_INTENT);
        assert!(degraded);
    }

    #[test]
    fn intent_is_truncated_to_budget() {
        let long = vec!["word"; 200].join(" ");
        let c = ctx();
        let backend = MockReasoner::new().with_canned(&c.full_text(), &long);
        let (intent, _) = reason(&c, &backend, 64);
        assert_eq!(intent.token_budget_used, 64);
        assert_eq!(intent.text.split_whitespace().count(), 64);
    }

    #[test]
    fn actor_clamps_out_of_range_components() {
        let intent = Intent { text: "x".into(), token_budget_used: 1 };
        let backend = FixedActor(ActorCall { fx: 1.7, fy: -0.5, fz: 0.0, duration: 1.0 });
        let (cmd, degraded) = act("obs", &intent, &backend, 1.0, 100.0);
        assert_eq!(cmd.throttle.x, 1.0);
        assert_eq!(cmd.throttle.y, -0.5);
        assert!(degraded);
    }

    #[test]
    fn actor_failure_means_zero_thrust() {
        let intent = Intent { text: "x".into(), token_budget_used: 1 };
        let (cmd, degraded) = act("obs", &intent, &FailingBackend, 1.0, 100.0);
        assert_eq!(cmd.throttle, Vec3::ZERO);
        assert!(degraded);
        assert!(cmd.duration > 0.0);

        // Non-positive duration from the backend is equally degraded.
        let backend = FixedActor(ActorCall { fx: 0.2, fy: 0.0, fz: 0.0, duration: 0.0 });
        let (cmd, degraded) = act("obs", &intent, &backend, 1.0, 100.0);
        assert_eq!(cmd.throttle, Vec3::ZERO);
        assert!(degraded);
    }

    #[test]
    fn full_step_with_mocks_is_fast_and_valid() {
        let agent = LlmAgent::new(
            Box::new(MockReasoner::new()),
            Box::new(MockActor::new(1.0)),
            "base".into(),
        );
        let start = std::time::Instant::now();
        let (cmd, intent, degraded) = agent.decide(&ctx(), 1.0, 240.0);
        assert!(start.elapsed().as_secs_f64() < 1.0, "step must fit the control period");
        assert!(!degraded);
        assert_eq!(cmd.throttle.x, 1.0);
        assert!(intent.text.contains("full forward"));
    }
}
