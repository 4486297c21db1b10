//! Reflection: turn a selected episode's telemetry window and reasoning
//! trace into behavioral-correction proposals.
//!
//! The default reflector is a deterministic rule miner that recognizes the
//! two recurring failure modes — pursuing into a closing guard, and
//! overshooting the lady at speed — and proposes condition-guarded rules
//! for them. A frontier-LLM reflector implements the same interface.

use crate::dynamics::TrajectoryRecord;
use crate::episode::{detect_overshoot, TraceRecord};
use crate::error::{Error, Result};
use crate::playbook::{BulletKind, ConditionBlock, RangeBound, StateSnapshot};
use crate::policy::ReasonerBackend;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeLabel {
    Failure,
    Success,
}

/// What the reflector sees: a contiguous telemetry window centered on the
/// episode's most informative moment, with the matching trace slice.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReflectionInput {
    pub episode_id: String,
    pub telemetry_window: Vec<TrajectoryRecord>,
    pub reasoning_excerpt: Vec<TraceRecord>,
    pub outcome_label: OutcomeLabel,
}

/// Content of a proposed rule, before the curator assigns ids and merges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BulletDraft {
    pub section: String,
    pub kind: BulletKind,
    pub text: String,
    pub conditions: ConditionBlock,
    pub evidence: String,
    pub states: Vec<StateSnapshot>,
}

/// Free-text correction plus the structured rule it suggests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub correction: String,
    pub draft: BulletDraft,
}

pub trait ReflectorBackend: Send + Sync {
    fn reflect(&self, input: &ReflectionInput) -> Result<Vec<Proposal>>;
}

/// Deterministic reflector mining rules from the telemetry window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeuristicMiner {
    /// `time.min` attached to every mined rule, s.
    pub warmup_time: f64,
    /// Guard thresholds round to this granularity, m.
    pub guard_round_to: f64,
    /// Bandit-guard distance that counts as a proximity violation, m.
    pub violation_distance: f64,
    /// Minimum closing speed for an overshoot finding, m/s.
    pub overshoot_speed_threshold: f64,
}

impl Default for HeuristicMiner {
    fn default() -> Self {
        Self {
            warmup_time: 5.0,
            guard_round_to: 10.0,
            violation_distance: 50.0,
            overshoot_speed_threshold: 10.0,
        }
    }
}

fn round_to(value: f64, granularity: f64) -> f64 {
    (value / granularity).round() * granularity
}

fn snapshot(record: &TrajectoryRecord, closing_speed: f64) -> StateSnapshot {
    StateSnapshot {
        t: record.t,
        d_lady: record.lady_distance(),
        v: closing_speed,
        d_guard: record.guard_distance(),
    }
}

impl HeuristicMiner {
    /// Guard-proximity finding: locate the minimum guard distance, walk
    /// back to where the closing run began, and propose a lateral-evasion
    /// rule triggered at (roughly) that range.
    fn mine_guard_rule(&self, input: &ReflectionInput) -> Option<Proposal> {
        let window = &input.telemetry_window;
        let distances: Vec<f64> = window.iter().map(|r| r.guard_distance()).collect();
        let (min_idx, min_d) = distances
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.total_cmp(b))
            .map(|(i, v)| (i, *v))?;
        if min_d >= self.violation_distance {
            return None;
        }
        // Start of the monotone closing run that ended at the minimum.
        let mut onset = min_idx;
        while onset > 0 && distances[onset - 1] > distances[onset] {
            onset -= 1;
        }
        let onset_distance = distances[onset];
        let threshold = round_to(onset_distance, self.guard_round_to).max(self.guard_round_to);

        let conditions = ConditionBlock {
            time: Some(RangeBound::min(self.warmup_time)),
            guard_distance: Some(RangeBound::max(threshold)),
            guard_approaching: Some(true),
            ..ConditionBlock::default()
        };
        let text = format!(
            "When a guard is closing inside ~{threshold:.0} m, stop all forward pursuit and \
             apply continuous lateral/vertical evasive thrust until the guard distance opens \
             back above this threshold."
        );
        let evidence = format!(
            "Guard closed from ~{onset_distance:.1} m at t={:.1} s to {min_d:.1} m at t={:.1} s \
             while pursuit throttle was maintained, causing a proximity violation.",
            window[onset].t, window[min_idx].t
        );
        let dt = (window[min_idx].t - window[onset].t).max(1e-9);
        let closing_speed = (onset_distance - min_d) / dt;
        Some(Proposal {
            correction: format!(
                "Suspend pursuit and evade laterally whenever a guard closes inside \
                 ~{threshold:.0} m."
            ),
            draft: BulletDraft {
                section: "guard_avoidance".into(),
                kind: BulletKind::Constraint,
                text,
                conditions,
                evidence,
                states: vec![snapshot(&window[onset], closing_speed), snapshot(&window[min_idx], closing_speed)],
            },
        })
    }

    /// Overshoot finding: a fast lady flyby followed by divergence turns
    /// into a braking rule near the flyby distance and speed.
    fn mine_approach_rule(&self, input: &ReflectionInput) -> Option<Proposal> {
        let window = &input.telemetry_window;
        let (idx, min_d, closing_speed) = detect_overshoot(window, self.overshoot_speed_threshold)?;
        let speed_limit = (0.8 * closing_speed).round().max(1.0);
        let trigger_distance = round_to(1.6 * min_d, self.guard_round_to).max(self.guard_round_to);
        let conditions = ConditionBlock {
            time: Some(RangeBound::min(self.warmup_time)),
            target_distance: Some(RangeBound::max(trigger_distance)),
            velocity: Some(RangeBound::min(speed_limit)),
            approaching: Some(true),
            ..ConditionBlock::default()
        };
        let text = format!(
            "When within ~{trigger_distance:.0} m of the lady and still closing faster than \
             ~{speed_limit:.0} m/s, switch to backward or zero forward throttle until the \
             closing speed drops below {speed_limit:.0} m/s to avoid overshoot."
        );
        let evidence = format!(
            "Bandit passed {min_d:.1} m from the lady at {closing_speed:.1} m/s with no braking, \
             resulting in overshoot."
        );
        Some(Proposal {
            correction: format!(
                "Brake inside ~{trigger_distance:.0} m when closing faster than \
                 ~{speed_limit:.0} m/s."
            ),
            draft: BulletDraft {
                section: "approach".into(),
                kind: BulletKind::Constraint,
                text,
                conditions,
                evidence,
                states: vec![snapshot(&window[idx], closing_speed)],
            },
        })
    }
}

impl ReflectorBackend for HeuristicMiner {
    fn reflect(&self, input: &ReflectionInput) -> Result<Vec<Proposal>> {
        if input.telemetry_window.is_empty() {
            return Err(Error::Validation("reflection window must be non-empty".into()));
        }
        let mut proposals = Vec::new();
        if let Some(p) = self.mine_guard_rule(input) {
            proposals.push(p);
        }
        if let Some(p) = self.mine_approach_rule(input) {
            proposals.push(p);
        }
        Ok(proposals)
    }
}

/// Frontier-LLM reflector: forwards the window and trace, expects a JSON
/// array of proposals back.
pub struct LlmReflector {
    backend: Box<dyn ReasonerBackend>,
}

impl LlmReflector {
    pub fn new(backend: Box<dyn ReasonerBackend>) -> Self {
        Self { backend }
    }
}

impl ReflectorBackend for LlmReflector {
    fn reflect(&self, input: &ReflectionInput) -> Result<Vec<Proposal>> {
        let prompt = format!(
            "You review one spacecraft-interception episode ({}). Analyze the telemetry \
             window and reasoning trace below and propose corrections as a JSON array of \
             objects {{\"correction\", \"draft\": {{\"section\", \"kind\", \"text\", \
             \"conditions\", \"evidence\", \"states\"}}}}. Sections: guard_avoidance, \
             approach. Conditions use keys time/guard_distance/target_distance/velocity \
             (ranges with min/max) plus guard_approaching/approaching booleans.\n\n\
             telemetry: {}\ntrace: {}\n",
            match input.outcome_label {
                OutcomeLabel::Failure => "failure",
                OutcomeLabel::Success => "success",
            },
            serde_json::to_string(&input.telemetry_window)?,
            serde_json::to_string(&input.reasoning_excerpt)?,
        );
        let raw = self.backend.complete(&prompt)?;
        // Tolerate prose around the JSON array.
        let start = raw.find('[').ok_or_else(|| Error::Backend("no JSON array in reflector output".into()))?;
        let end = raw.rfind(']').ok_or_else(|| Error::Backend("unterminated JSON array".into()))?;
        serde_json::from_str(&raw[start..=end])
            .map_err(|e| Error::Backend(format!("malformed reflector proposals: {e}")))
    }
}
