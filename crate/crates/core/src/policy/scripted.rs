//! Deterministic playbook follower: a priority interpreter over active
//! bullet sections that stands in for the LLM pair, so the evolution loop
//! runs offline and reproducibly.

use crate::dynamics::{Observation, ThrustCommand};
use crate::math::Vec3;
use crate::playbook::{Bullet, DerivedFeatures};

/// Scale a direction so its largest component is ±1 (full throttle on the
/// dominant axis).
fn max_norm_throttle(direction: Vec3) -> Vec3 {
    let m = direction.max_norm();
    if m <= f64::EPSILON {
        Vec3::ZERO
    } else {
        direction / m
    }
}

/// Unit lateral (y/z-plane) vector perpendicular to the bandit-guard line.
/// The sign follows the existing lateral separation rate so successive
/// dodges reinforce rather than cancel.
fn lateral_escape(obs: &Observation, guard_index: usize) -> Vec3 {
    let guard = &obs.guards[guard_index];
    let d = guard.position - obs.bandit.position;
    let planar = (d.y * d.y + d.z * d.z).sqrt();
    if planar <= f64::EPSILON {
        // Guard along the x axis: any lateral direction is perpendicular.
        return Vec3::new(0.0, 1.0, 0.0);
    }
    let perp = Vec3::new(0.0, -d.z / planar, d.y / planar);
    let rel_vel = obs.bandit.velocity - guard.velocity;
    if perp.dot(rel_vel) < 0.0 {
        -perp
    } else {
        perp
    }
}

/// Index of the nearest guard.
fn nearest_guard(obs: &Observation) -> usize {
    obs.guards
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            (a.position - obs.bandit.position)
                .norm()
                .total_cmp(&(b.position - obs.bandit.position).norm())
        })
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Priority interpreter over the active bullets:
/// 1. any `guard_avoidance` bullet: zero longitudinal throttle, unit
///    lateral thrust perpendicular to the bandit-guard line;
/// 2. else any `approach` bullet: reverse throttle along the lady line;
/// 3. else: full throttle along the bandit-to-lady direction.
pub fn scripted_follower_action(
    obs: &Observation,
    _features: &DerivedFeatures,
    active: &[Bullet],
    control_period: f64,
) -> ThrustCommand {
    let throttle = if active.iter().any(|b| b.section == "guard_avoidance") {
        lateral_escape(obs, nearest_guard(obs))
    } else if active.iter().any(|b| b.section == "approach") {
        -max_norm_throttle(obs.lady.position - obs.bandit.position)
    } else {
        max_norm_throttle(obs.lady.position - obs.bandit.position)
    };
    ThrustCommand::new(throttle, control_period)
}

/// Open-loop interception heuristic: full throttle straight at the lady,
/// ignoring guards. Co-located craft get zero thrust.
pub fn prograde_action(obs: &Observation, control_period: f64) -> ThrustCommand {
    ThrustCommand::new(max_norm_throttle(obs.lady.position - obs.bandit.position), control_period)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::SpacecraftState;
    use crate::playbook::{derive_features, BulletKind, ConditionBlock};

    fn craft(pos: Vec3) -> SpacecraftState {
        SpacecraftState::new(pos, Vec3::ZERO, 1000.0, 200.0)
    }

    fn obs(lady: Vec3, guard: Vec3) -> Observation {
        Observation { t: 0.0, bandit: craft(Vec3::ZERO), lady: craft(lady), guards: vec![craft(guard)] }
    }

    fn bullet(section: &str) -> Bullet {
        Bullet {
            id: format!("{}-00001", section.replace('_', "-")),
            section: section.into(),
            kind: BulletKind::Constraint,
            text: "t".into(),
            conditions: ConditionBlock::default(),
            states: vec![],
            evidence: String::new(),
            episode_history: vec![],
            occurrence_count: 0,
        }
    }

    #[test]
    fn default_pursuit_follows_the_lady_axis() {
        let o = obs(Vec3::new(500.0, 0.0, 0.0), Vec3::new(0.0, 300.0, 0.0));
        let f = derive_features(&o, None);
        let cmd = scripted_follower_action(&o, &f, &[], 1.0);
        assert_eq!(cmd.throttle, Vec3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn guard_avoidance_is_lateral_and_perpendicular() {
        let o = obs(Vec3::new(0.0, 500.0, 0.0), Vec3::new(120.0, 260.0, 40.0));
        let f = derive_features(&o, None);
        let cmd = scripted_follower_action(&o, &f, &[bullet("guard_avoidance")], 1.0);
        assert_eq!(cmd.throttle.x, 0.0);
        let lateral = (cmd.throttle.y * cmd.throttle.y + cmd.throttle.z * cmd.throttle.z).sqrt();
        assert!((lateral - 1.0).abs() < 1e-9);
        let guard_dir = (o.guards[0].position - o.bandit.position).normalized();
        assert!(cmd.throttle.dot(guard_dir).abs() < 1e-9);
    }

    #[test]
    fn approach_bullet_reverses_along_the_lady_line() {
        let o = obs(Vec3::new(0.0, 100.0, 0.0), Vec3::new(0.0, 300.0, 0.0));
        let mut fast = derive_features(&o, None);
        fast.velocity = 20.0;
        fast.approaching = true;
        let cmd = scripted_follower_action(&o, &fast, &[bullet("approach")], 1.0);
        // Closing speed is positive; braking thrust opposes the lady line.
        let lady_dir = (o.lady.position - o.bandit.position).normalized();
        assert!(cmd.throttle.dot(lady_dir) < 0.0);
        assert_eq!(cmd.throttle, Vec3::new(0.0, -1.0, 0.0));
    }

    #[test]
    fn guard_avoidance_takes_priority_over_approach() {
        let o = obs(Vec3::new(0.0, 100.0, 0.0), Vec3::new(0.0, 50.0, 0.0));
        let f = derive_features(&o, None);
        let cmd = scripted_follower_action(&o, &f, &[bullet("approach"), bullet("guard_avoidance")], 1.0);
        assert_eq!(cmd.throttle.x, 0.0);
        assert!(cmd.throttle.y.abs() < 1e-9, "dodge must be perpendicular to the guard line");
    }

    #[test]
    fn prograde_examples() {
        let o = obs(Vec3::new(500.0, 0.0, 0.0), Vec3::new(0.0, 300.0, 0.0));
        assert_eq!(prograde_action(&o, 1.0).throttle, Vec3::new(1.0, 0.0, 0.0));

        let half = 500.0 / 2.0_f64.sqrt();
        let o = obs(Vec3::new(half, half, 0.0), Vec3::new(0.0, 300.0, 0.0));
        let t = prograde_action(&o, 1.0).throttle;
        assert!((t.x - t.y).abs() < 1e-12, "components along an equal diagonal match");
        assert!((t.max_norm() - 1.0).abs() < 1e-12);

        let o = obs(Vec3::ZERO, Vec3::new(0.0, 300.0, 0.0));
        assert_eq!(prograde_action(&o, 1.0).throttle, Vec3::ZERO);
    }

    #[test]
    fn follower_is_a_pure_function() {
        let o = obs(Vec3::new(10.0, 490.0, -20.0), Vec3::new(50.0, 250.0, 10.0));
        let f = derive_features(&o, None);
        let active = [bullet("guard_avoidance")];
        let a = scripted_follower_action(&o, &f, &active, 1.0);
        let b = scripted_follower_action(&o, &f, &active, 1.0);
        assert_eq!(a, b);
    }
}
