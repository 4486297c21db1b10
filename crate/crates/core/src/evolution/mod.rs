//! Cross-episode improvement: ε-biased reflection sampling, reflect +
//! curate, and UCB1 selection among playbook versions. Versions are
//! append-only; every artifact is persisted before the in-memory state
//! advances.

pub mod curate;
pub mod reflect;
pub mod ucb;

pub use curate::curate;
pub use reflect::{
    BulletDraft, HeuristicMiner, LlmReflector, OutcomeLabel, Proposal, ReflectionInput,
    ReflectorBackend,
};
pub use ucb::{ucb_scores, ucb_select, VersionStats};

use crate::dynamics::{ScenarioConfig, TrajectoryRecord};
use crate::episode::{persist_episode, run_episode, EpisodeRecord, TraceRecord};
use crate::error::{Error, Result};
use crate::playbook::Playbook;
use crate::policy::Policy;
use crate::store::{derive_seed, read_json, write_json, RunPaths};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Tunables of the evolution loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    /// Probability of reflecting on a successful episode.
    pub epsilon: f64,
    /// UCB exploration constant.
    pub ucb_c: f64,
    /// Episodes per round on the selected version.
    pub batch_size: usize,
    /// Stop creating versions beyond this count.
    pub max_versions: u32,
    /// Round budget.
    pub max_rounds: u32,
    /// Telemetry window length handed to the reflector, in control steps.
    pub window_steps: usize,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.2,
            ucb_c: std::f64::consts::SQRT_2,
            batch_size: 5,
            max_versions: 6,
            max_rounds: 12,
            window_steps: 30,
        }
    }
}

/// ε-biased reflection sampling: with probability ε pick the batch's best
/// (lowest-score) episode, otherwise its worst. Ties break to the first.
pub fn select_reflection_episode<'a>(
    batch: &'a [EpisodeRecord],
    epsilon: f64,
    rng: &mut impl Rng,
) -> Result<&'a EpisodeRecord> {
    if batch.is_empty() {
        return Err(Error::Validation("reflection batch is empty".into()));
    }
    let pick_best = rng.random_bool(epsilon.clamp(0.0, 1.0));
    let chosen = if pick_best {
        batch.iter().min_by(|a, b| a.score.total_cmp(&b.score))
    } else {
        batch.iter().max_by(|a, b| a.score.total_cmp(&b.score))
    };
    Ok(chosen.expect("non-empty batch"))
}

/// Failure/success labeling: any violation flag, or a score above the
/// running median, counts as failure.
pub fn label_outcome(record: &EpisodeRecord, all_scores: &[f64]) -> OutcomeLabel {
    if !record.violation_flags.is_empty() {
        return OutcomeLabel::Failure;
    }
    if all_scores.is_empty() {
        return OutcomeLabel::Success;
    }
    let mut sorted = all_scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    if record.score > median {
        OutcomeLabel::Failure
    } else {
        OutcomeLabel::Success
    }
}

/// Contiguous telemetry window (and matching trace slice) centered on the
/// minimum guard distance for failures, or the minimum lady distance for
/// successes.
pub fn reflection_window(
    trajectory: &[TrajectoryRecord],
    trace: &[TraceRecord],
    label: OutcomeLabel,
    window_steps: usize,
) -> (Vec<TrajectoryRecord>, Vec<TraceRecord>) {
    let center = match label {
        OutcomeLabel::Failure => trajectory
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.guard_distance().total_cmp(&b.guard_distance()))
            .map(|(i, _)| i)
            .unwrap_or(0),
        OutcomeLabel::Success => trajectory
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.lady_distance().total_cmp(&b.lady_distance()))
            .map(|(i, _)| i)
            .unwrap_or(0),
    };
    let half = window_steps / 2;
    let start = center.saturating_sub(half);
    let end = (start + window_steps).min(trajectory.len());
    let start = end.saturating_sub(window_steps);
    let window = trajectory[start..end].to_vec();
    let trace_end = end.min(trace.len());
    let trace_start = start.min(trace_end);
    (window, trace[trace_start..trace_end].to_vec())
}

/// Serialized evolution progress (`stats.json`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatsFile {
    pub rounds_completed: u32,
    pub episode_counter: u64,
    pub versions: Vec<StatsVersionEntry>,
    /// Record files, relative to the run directory.
    pub episode_records: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatsVersionEntry {
    pub version: u32,
    pub n: usize,
    pub mean_score: f64,
    pub std_score: f64,
    pub score_history: Vec<f64>,
}

/// In-memory evolution state; mirrors the version store on disk.
pub struct EvolutionState {
    pub versions: Vec<Playbook>,
    pub stats: Vec<VersionStats>,
    pub records: Vec<EpisodeRecord>,
    pub rounds_completed: u32,
    pub episode_counter: u64,
}

impl EvolutionState {
    /// Fresh state: the empty version 0, persisted immediately.
    pub fn create(paths: &RunPaths) -> Result<Self> {
        let v0 = Playbook::empty();
        write_json(&paths.playbook(0), &v0)?;
        let state = Self {
            versions: vec![v0],
            stats: vec![VersionStats::new(0)],
            records: Vec::new(),
            rounds_completed: 0,
            episode_counter: 0,
        };
        state.persist(paths)?;
        Ok(state)
    }

    /// Resume from a persisted version store without re-running episodes.
    pub fn load(paths: &RunPaths) -> Result<Self> {
        let stats_file: StatsFile = read_json(&paths.stats())?;
        let mut versions = Vec::new();
        let mut stats = Vec::new();
        for entry in &stats_file.versions {
            let playbook_text = std::fs::read_to_string(paths.playbook(entry.version))?;
            let playbook = Playbook::from_json(&playbook_text)?;
            if playbook.version != entry.version {
                return Err(Error::Integrity(format!(
                    "playbook file v{} claims version {}",
                    entry.version, playbook.version
                )));
            }
            versions.push(playbook);
            stats.push(VersionStats {
                version: entry.version,
                score_history: entry.score_history.clone(),
            });
        }
        let mut records = Vec::new();
        for rel in &stats_file.episode_records {
            records.push(read_json(&paths.root().join(rel))?);
        }
        Ok(Self {
            versions,
            stats,
            records,
            rounds_completed: stats_file.rounds_completed,
            episode_counter: stats_file.episode_counter,
        })
    }

    pub fn exists(paths: &RunPaths) -> bool {
        paths.stats().exists()
    }

    pub fn persist(&self, paths: &RunPaths) -> Result<()> {
        let file = StatsFile {
            rounds_completed: self.rounds_completed,
            episode_counter: self.episode_counter,
            versions: self
                .stats
                .iter()
                .map(|s| StatsVersionEntry {
                    version: s.version,
                    n: s.n(),
                    mean_score: s.mean_score(),
                    std_score: s.std_score(),
                    score_history: s.score_history.clone(),
                })
                .collect(),
            episode_records: self
                .records
                .iter()
                .map(|r| format!("episodes/{}.record.json", r.episode_id))
                .collect(),
        };
        write_json(&paths.stats(), &file)
    }
}

/// What one evolution round did.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundSummary {
    pub round: u32,
    pub evaluated_version: u32,
    pub batch_episode_ids: Vec<String>,
    pub reflected_episode_id: String,
    pub outcome_label: OutcomeLabel,
    pub proposals: usize,
    pub new_version: Option<u32>,
}

/// One evolution round: UCB-select a version, run a batch on it, reflect on
/// one episode, curate, and (capacity permitting) spawn the next version.
#[allow(clippy::too_many_arguments)]
pub fn evolve_round(
    state: &mut EvolutionState,
    scenario: &ScenarioConfig,
    policy: &Policy,
    reflector: &dyn ReflectorBackend,
    config: &EvolutionConfig,
    paths: &RunPaths,
    master_seed: u64,
) -> Result<RoundSummary> {
    if state.versions.is_empty() {
        return Err(Error::Validation("evolution state has no versions".into()));
    }
    let round = state.rounds_completed;
    let version = ucb_select(&state.stats, config.ucb_c)?;
    let playbook = state.versions[version as usize].clone();

    // Run and persist the batch before any state advances.
    let mut batch = Vec::with_capacity(config.batch_size);
    let mut batch_outcomes = Vec::with_capacity(config.batch_size);
    for _ in 0..config.batch_size {
        let episode_id = format!(
            "{}-v{}-e{:04}",
            scenario.scenario_id, version, state.episode_counter
        );
        let mut cfg = scenario.clone();
        cfg.rng_seed = derive_seed(master_seed, state.episode_counter);
        let mut outcome = run_episode(&cfg, policy, &playbook, &episode_id)?;
        persist_episode(paths, &mut outcome)?;
        batch.push(outcome.record.clone());
        batch_outcomes.push(outcome);
        state.episode_counter += 1;
    }
    state.stats[version as usize]
        .score_history
        .extend(batch.iter().map(|r| r.score));
    state.records.extend(batch.iter().cloned());

    // ε-biased choice of the reflection episode; the draw is derived from
    // the master seed and round index so resume stays deterministic.
    let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(master_seed, 0x5eed_0000 + round as u64));
    let selected = select_reflection_episode(&batch, config.epsilon, &mut rng)?.clone();
    let outcome = batch_outcomes
        .iter()
        .find(|o| o.record.episode_id == selected.episode_id)
        .expect("selected episode is in the batch");

    let all_scores: Vec<f64> = state.records.iter().map(|r| r.score).collect();
    let label = label_outcome(&selected, &all_scores);
    let (window, excerpt) =
        reflection_window(&outcome.trajectory, &outcome.trace, label, config.window_steps);
    let input = ReflectionInput {
        episode_id: selected.episode_id.clone(),
        telemetry_window: window,
        reasoning_excerpt: excerpt,
        outcome_label: label,
    };

    // A reflector failure skips the round rather than corrupting state.
    let proposals = reflector.reflect(&input).unwrap_or_default();
    let ops = if proposals.is_empty() {
        Vec::new()
    } else {
        curate(&proposals, &playbook, &selected.episode_id)?
    };

    let mut new_version = None;
    if !ops.is_empty() && (state.versions.len() as u32) < config.max_versions {
        let mut next = playbook.apply_ops(&ops)?;
        // Store numbering is global; lineage keeps the evaluated version
        // as parent.
        next.version = state.versions.len() as u32;
        next.parent_version = Some(version);
        write_json(&paths.playbook(next.version), &next)?;
        state.stats.push(VersionStats::new(next.version));
        new_version = Some(next.version);
        state.versions.push(next);
    }

    state.rounds_completed += 1;
    state.persist(paths)?;

    Ok(RoundSummary {
        round,
        evaluated_version: version,
        batch_episode_ids: batch.into_iter().map(|r| r.episode_id).collect(),
        reflected_episode_id: selected.episode_id,
        outcome_label: label,
        proposals: proposals.len(),
        new_version,
    })
}
