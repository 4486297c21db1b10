//! Guard control laws: saturated PD pursuit, blocking-point defense, and
//! the seeded stochastic switch between the two.

use super::Observation;
use crate::math::Vec3;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Behavioral regime assigned to one guard.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GuardPolicy {
    /// Chase the Bandit directly.
    Pursuit,
    /// Hold a blocking point on the Lady-Bandit segment.
    Defense,
    /// Per-decision-epoch Bernoulli switch between pursuit and defense.
    Stochastic { pursuit_probability: f64 },
}

/// Gains and geometry shared by all guard laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuardParams {
    /// Pursuit proportional gain on relative position, 1/s².
    pub gain_p: f64,
    /// Pursuit derivative gain on relative velocity, 1/s.
    pub gain_d: f64,
    /// Defense (blocking) proportional gain, 1/s².
    pub defense_gain_p: f64,
    /// Defense (blocking) derivative gain, 1/s.
    pub defense_gain_d: f64,
    /// Blocking point sits this fraction of the way from Lady to Bandit.
    pub blocking_fraction: f64,
    /// Standoff floor on the blocking offset magnitude, m. Keeps the post
    /// from collapsing onto the lady during a close approach.
    pub blocking_min_offset: f64,
    /// Cap on the blocking offset magnitude, m.
    pub blocking_max_offset: f64,
    /// Acceleration authority, m/s².
    pub max_accel: f64,
}

impl Default for GuardParams {
    fn default() -> Self {
        Self {
            gain_p: 2e-3,
            gain_d: 6e-2,
            defense_gain_p: 8e-3,
            defense_gain_d: 1.2e-1,
            blocking_fraction: 0.25,
            blocking_min_offset: 40.0,
            blocking_max_offset: 150.0,
            max_accel: 0.25,
        }
    }
}

/// Saturated PD law steering the guard onto the Bandit.
pub fn pursuit_accel(obs: &Observation, guard_index: usize, p: &GuardParams) -> Vec3 {
    let guard = &obs.guards[guard_index];
    let err_pos = obs.bandit.position - guard.position;
    let err_vel = obs.bandit.velocity - guard.velocity;
    (err_pos * p.gain_p + err_vel * p.gain_d).clamp_norm(p.max_accel)
}

/// Blocking point on the Lady-Bandit segment: `lady + f·(bandit - lady)`,
/// with the offset magnitude clamped into
/// `[blocking_min_offset, blocking_max_offset]`.
pub fn blocking_point(obs: &Observation, p: &GuardParams) -> Vec3 {
    let toward_bandit = obs.bandit.position - obs.lady.position;
    let nominal = toward_bandit.norm() * p.blocking_fraction;
    let standoff = nominal.clamp(p.blocking_min_offset, p.blocking_max_offset);
    obs.lady.position + toward_bandit.normalized() * standoff
}

/// Saturated PD law holding the guard at the blocking point, feeding forward
/// the point's own velocity.
pub fn defense_accel(obs: &Observation, guard_index: usize, p: &GuardParams) -> Vec3 {
    let guard = &obs.guards[guard_index];
    let target_pos = blocking_point(obs, p);
    let target_vel =
        obs.lady.velocity + (obs.bandit.velocity - obs.lady.velocity) * p.blocking_fraction;
    let err_pos = target_pos - guard.position;
    let err_vel = target_vel - guard.velocity;
    (err_pos * p.defense_gain_p + err_vel * p.defense_gain_d).clamp_norm(p.max_accel)
}

/// Evaluate one guard's policy for the current decision epoch. Stochastic
/// guards consume exactly one draw from `rng` per call.
pub fn guard_action(
    policy: GuardPolicy,
    obs: &Observation,
    guard_index: usize,
    params: &GuardParams,
    rng: &mut impl Rng,
) -> Vec3 {
    match policy {
        GuardPolicy::Pursuit => pursuit_accel(obs, guard_index, params),
        GuardPolicy::Defense => defense_accel(obs, guard_index, params),
        GuardPolicy::Stochastic { pursuit_probability } => {
            if rng.random_bool(pursuit_probability.clamp(0.0, 1.0)) {
                pursuit_accel(obs, guard_index, params)
            } else {
                defense_accel(obs, guard_index, params)
            }
        }
    }
}
