//! Closed-loop episode execution: policy in, trajectory + reasoning trace +
//! scored record out.

use crate::dynamics::{CommandRecord, Episode, ScenarioConfig, ScenarioId, TrajectoryRecord};
use crate::error::Result;
use crate::playbook::{derive_features, DerivedFeatures, Playbook, PlaybookRun};
use crate::policy::{Policy, PolicyKind};
use crate::scoring;
use crate::store::RunPaths;
use serde::{Deserialize, Serialize};

pub const FLAG_GUARD_PROXIMITY: &str = "guard-proximity";
pub const FLAG_OVERSHOOT: &str = "overshoot";

/// Closing speed above which a lady flyby counts as an overshoot, m/s.
pub const OVERSHOOT_SPEED_THRESHOLD: f64 = 10.0;

/// One reasoning-trace line: the observation digest, active bullets,
/// intent and command of a single control step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    /// Time at the start of the step, s.
    pub t: f64,
    pub features: DerivedFeatures,
    pub active_bullet_ids: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intent: Option<String>,
    pub command: CommandRecord,
    pub degraded: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rejected: Option<String>,
}

/// Scored summary of one episode; the unit the evolution loop consumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode_id: String,
    pub scenario_id: ScenarioId,
    pub policy: PolicyKind,
    pub playbook_version: u32,
    pub seed: u64,
    /// Composite score; lower is better.
    pub score: f64,
    pub d_min_lb: f64,
    pub d_min_bg: f64,
    pub trajectory_path: String,
    pub trace_path: String,
    pub violation_flags: Vec<String>,
}

/// Full in-memory outcome; persisted pieces reference the store paths.
#[derive(Debug, Clone)]
pub struct EpisodeOutcome {
    pub record: EpisodeRecord,
    pub trajectory: Vec<TrajectoryRecord>,
    pub trace: Vec<TraceRecord>,
    /// Working playbook copy with this episode's occurrence counts.
    pub playbook: Playbook,
}

/// Violation flags recomputable from a trajectory alone.
pub fn violation_flags(trajectory: &[TrajectoryRecord], guard_violation_distance: f64) -> Vec<String> {
    let mut flags = Vec::new();
    let d_min_bg = trajectory.iter().map(|r| r.guard_distance()).fold(f64::INFINITY, f64::min);
    if d_min_bg < guard_violation_distance {
        flags.push(FLAG_GUARD_PROXIMITY.to_string());
    }
    if detect_overshoot(trajectory, OVERSHOOT_SPEED_THRESHOLD).is_some() {
        flags.push(FLAG_OVERSHOOT.to_string());
    }
    flags
}

/// Detect a lady flyby: an interior local minimum of the lady distance
/// reached at high closing speed, followed by clear divergence. Returns
/// `(sample index, distance at minimum, closing speed into it)`.
pub fn detect_overshoot(
    trajectory: &[TrajectoryRecord],
    speed_threshold: f64,
) -> Option<(usize, f64, f64)> {
    if trajectory.len() < 3 {
        return None;
    }
    let d: Vec<f64> = trajectory.iter().map(|r| r.lady_distance()).collect();
    let (min_idx, min_d) = d
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.total_cmp(b))
        .map(|(i, v)| (i, *v))?;
    if min_idx == 0 || min_idx + 1 >= d.len() {
        return None;
    }
    let dt = trajectory[min_idx].t - trajectory[min_idx - 1].t;
    if dt <= 0.0 {
        return None;
    }
    let closing_speed = (d[min_idx - 1] - d[min_idx]) / dt;
    let diverged = d[d.len() - 1] > 1.5 * min_d + 10.0;
    if closing_speed > speed_threshold && diverged {
        Some((min_idx, min_d, closing_speed))
    } else {
        None
    }
}

/// Run one complete episode of `policy` on `config`, using `playbook` when
/// the policy consults the playbook (llm_static always sees the empty v0).
pub fn run_episode(
    config: &ScenarioConfig,
    policy: &Policy,
    playbook: &Playbook,
    episode_id: &str,
) -> Result<EpisodeOutcome> {
    let effective = if policy.kind().uses_playbook() { playbook.clone() } else { Playbook::empty() };
    let playbook_version = playbook.version;
    let mut run = PlaybookRun::new(effective);

    let mut episode = Episode::new(config.clone())?;
    let mut trace = Vec::with_capacity(config.steps_per_episode());
    let mut step_index = 0usize;

    while !episode.is_done() {
        let features = derive_features(episode.observation(), episode.previous_observation());
        let active = run.active_bullets(&features);
        let t = episode.observation().t;
        let decision = policy.decide(
            episode.observation(),
            &features,
            &active,
            config.control_period,
            episode.remaining_time(),
            config.bandit_max_accel,
        );
        let outcome = episode.step(decision.command)?;
        trace.push(TraceRecord {
            step: step_index,
            t,
            features,
            active_bullet_ids: active.iter().map(|b| b.id.clone()).collect(),
            intent: decision.intent.map(|i| i.text),
            command: CommandRecord {
                throttle: decision.command.throttle,
                duration: decision.command.duration,
            },
            degraded: decision.degraded,
            rejected: outcome.rejected,
        });
        step_index += 1;
    }

    let trajectory = episode.into_trajectory();
    let (d_min_lb, d_min_bg, breakdown) = scoring::episode_metrics(&trajectory)?;
    let record = EpisodeRecord {
        episode_id: episode_id.to_string(),
        scenario_id: config.scenario_id,
        policy: policy.kind(),
        playbook_version,
        seed: config.rng_seed,
        score: breakdown.total,
        d_min_lb,
        d_min_bg,
        trajectory_path: String::new(),
        trace_path: String::new(),
        violation_flags: violation_flags(&trajectory, config.guard_violation_distance),
    };
    Ok(EpisodeOutcome { record, trajectory, trace, playbook: run.playbook().clone() })
}

/// Persist an episode's artifacts and fill in the record's relative paths.
pub fn persist_episode(paths: &RunPaths, outcome: &mut EpisodeOutcome) -> Result<()> {
    let id = outcome.record.episode_id.clone();
    let traj_path = paths.trajectory(&id);
    let trace_path = paths.trace(&id);
    crate::store::write_jsonl(&traj_path, &outcome.trajectory)?;
    crate::store::write_jsonl(&trace_path, &outcome.trace)?;
    outcome.record.trajectory_path = paths.relative(&traj_path);
    outcome.record.trace_path = paths.relative(&trace_path);
    crate::store::write_json(&paths.record(&id), &outcome.record)?;
    Ok(())
}
