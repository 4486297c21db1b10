//! Deterministic prompt assembly: fixed baseline text, active bullet texts
//! in playbook order, and a fixed-precision rendering of the observation.

use crate::dynamics::Observation;
use crate::math::Vec3;
use crate::playbook::{Bullet, DerivedFeatures};
use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// Baseline instructions used when an experiment does not override them.
/// Held constant across every version within an experiment.
pub const DEFAULT_BASELINE: &str = "You pilot the Bandit spacecraft in a rotating Hill frame. \
Objective: close to within capture range of the Lady while keeping clear of every Guard. \
Thrusting along the Lady direction closes range; lateral and vertical thrust opens separation \
from a closing Guard. Reply with a short maneuver intent for the next control period.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptContext {
    pub baseline_text: String,
    /// Section-tagged bullet texts, in playbook order.
    pub active_bullet_texts: Vec<String>,
    pub observation_rendering: String,
}

impl PromptContext {
    /// Single string handed to the reasoner backend.
    pub fn full_text(&self) -> String {
        let mut out = self.baseline_text.clone();
        if !self.active_bullet_texts.is_empty() {
            out.push_str("\n\nActive playbook rules:\n");
            for text in &self.active_bullet_texts {
                out.push_str("- ");
                out.push_str(text);
                out.push('\n');
            }
        }
        out.push_str("\n\n");
        out.push_str(&self.observation_rendering);
        out
    }
}

fn render_vec(label: &str, v: Vec3, out: &mut String) {
    let _ = writeln!(out, "{label}: [{:.3}, {:.3}, {:.3}]", v.x, v.y, v.z);
}

/// Render the numeric fields of the observation and derived features with
/// fixed 3-decimal precision, so identical states produce identical prompts.
pub fn render_observation(obs: &Observation, f: &DerivedFeatures) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "t: {:.3} s", obs.t);
    let _ = writeln!(
        out,
        "bandit mass: total {:.3} kg, propellant {:.3} kg",
        obs.bandit.total_mass, obs.bandit.prop_mass
    );
    render_vec("bandit position (m)", obs.bandit.position, &mut out);
    render_vec("bandit velocity (m/s)", obs.bandit.velocity, &mut out);
    render_vec("lady position (m)", obs.lady.position, &mut out);
    render_vec("lady velocity (m/s)", obs.lady.velocity, &mut out);
    for (i, g) in obs.guards.iter().enumerate() {
        render_vec(&format!("guard[{i}] position (m)"), g.position, &mut out);
        render_vec(&format!("guard[{i}] velocity (m/s)"), g.velocity, &mut out);
    }
    let _ = writeln!(
        out,
        "derived: lady distance {:.3} m, guard distance {:.3} m, closing speed {:.3} m/s, \
         approaching {}, guard_approaching {}",
        f.target_distance, f.guard_distance, f.velocity, f.approaching, f.guard_approaching
    );
    out
}

/// Assemble the prompt context for one control step.
pub fn assemble_prompt(
    baseline: &str,
    active: &[Bullet],
    obs: &Observation,
    f: &DerivedFeatures,
) -> PromptContext {
    PromptContext {
        baseline_text: baseline.to_string(),
        active_bullet_texts: active.iter().map(|b| format!("[{}] {}", b.section, b.text)).collect(),
        observation_rendering: render_observation(obs, f),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::SpacecraftState;
    use crate::playbook::{derive_features, BulletKind, ConditionBlock};

    fn obs() -> Observation {
        let craft = |p: Vec3| SpacecraftState::new(p, Vec3::ZERO, 1000.0, 200.0);
        Observation {
            t: 12.0,
            bandit: craft(Vec3::ZERO),
            lady: craft(Vec3::new(0.0, 500.0, 0.0)),
            guards: vec![craft(Vec3::new(0.0, 300.0, 0.0))],
        }
    }

    fn bullet(text: &str) -> Bullet {
        Bullet {
            id: "approach-00001".into(),
            section: "approach".into(),
            kind: BulletKind::Rule,
            text: text.into(),
            conditions: ConditionBlock::default(),
            states: vec![],
            evidence: String::new(),
            episode_history: vec![],
            occurrence_count: 0,
        }
    }

    #[test]
    fn empty_active_list_is_baseline_plus_observation() {
        let o = obs();
        let f = derive_features(&o, None);
        let ctx = assemble_prompt("base", &[], &o, &f);
        assert!(ctx.active_bullet_texts.is_empty());
        let full = ctx.full_text();
        assert!(full.starts_with("base"));
        assert!(full.contains("lady distance 500.000 m"));
        assert!(!full.contains("Active playbook rules"));
    }

    #[test]
    fn bullet_text_appears_between_baseline_and_observation() {
        let o = obs();
        let f = derive_features(&o, None);
        let b = bullet("Brake before the final approach.");
        let ctx = assemble_prompt("base", std::slice::from_ref(&b), &o, &f);
        let full = ctx.full_text();
        let bullet_at = full.find("[approach] Brake before the final approach.").unwrap();
        let obs_at = full.find("t: 12.000 s").unwrap();
        assert!(bullet_at > full.find("base").unwrap());
        assert!(bullet_at < obs_at);
    }

    #[test]
    fn assembly_is_deterministic() {
        let o = obs();
        let f = derive_features(&o, None);
        let b = bullet("x");
        let a = assemble_prompt("base", std::slice::from_ref(&b), &o, &f);
        let c = assemble_prompt("base", std::slice::from_ref(&b), &o, &f);
        assert_eq!(a.full_text(), c.full_text());
    }
}
