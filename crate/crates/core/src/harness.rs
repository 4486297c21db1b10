//! Experiment orchestration behind the CLI: policy-comparison runs,
//! evolution experiments, replay auditing, and report regeneration.

use crate::dynamics::ScenarioConfig;
use crate::episode::{persist_episode, run_episode, EpisodeRecord, TraceRecord};
use crate::error::{Error, Result};
use crate::evolution::{
    evolve_round, EvolutionConfig, EvolutionState, HeuristicMiner, ReflectorBackend, RoundSummary,
};
use crate::playbook::Playbook;
use crate::policy::{Policy, PolicyKind};
use crate::report;
use crate::scoring::{self, aggregate_version_stats};
use crate::store::{derive_seed, now_unix_s, read_json, read_jsonl, write_json, RunManifest, RunPaths};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// Configuration for `run` and `evolve`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    /// Policies compared by `run`.
    pub policies: Vec<PolicyKind>,
    /// Episodes per policy.
    pub episodes: usize,
    pub master_seed: u64,
    pub evolution: EvolutionConfig,
    /// Policy executing episodes inside the evolution loop.
    pub evolution_policy: PolicyKind,
    pub out_dir: PathBuf,
    pub force: bool,
}

impl ExperimentConfig {
    pub fn new(scenario: ScenarioConfig, out_dir: PathBuf) -> Self {
        Self {
            scenario,
            policies: vec![PolicyKind::Prograde],
            episodes: 20,
            master_seed: 7,
            evolution: EvolutionConfig::default(),
            evolution_policy: PolicyKind::ScriptedFollower,
            out_dir,
            force: false,
        }
    }

    fn run_paths(&self) -> RunPaths {
        RunPaths::new(self.out_dir.join(self.scenario.scenario_id.as_str()))
    }
}

fn start_manifest(paths: &RunPaths, config: &ExperimentConfig, force: bool) -> Result<RunManifest> {
    if force && paths.manifest().exists() {
        fs::remove_dir_all(paths.root())?;
    }
    paths.ensure_writable(force)?;
    let manifest = RunManifest::new(serde_json::to_value(config)?);
    write_json(&paths.manifest(), &manifest)?;
    Ok(manifest)
}

fn finish_manifest(paths: &RunPaths, manifest: &mut RunManifest) -> Result<()> {
    manifest.updated_unix_s = now_unix_s();
    let mut files = BTreeSet::new();
    collect_files(paths.root(), paths.root(), &mut files)?;
    manifest.files = files.into_iter().collect();
    write_json(&paths.manifest(), manifest)
}

fn collect_files(root: &Path, dir: &Path, out: &mut BTreeSet<String>) -> Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_files(root, &path, out)?;
        } else {
            out.insert(path.strip_prefix(root).unwrap_or(&path).to_string_lossy().into_owned());
        }
    }
    Ok(())
}

/// Run `episodes` seeded episodes of one policy/playbook pair, persisting
/// artifacts when `paths` is given. Episode seeds depend only on the master
/// seed and episode index, so different policies see paired initial
/// conditions.
pub fn evaluate_policy(
    scenario: &ScenarioConfig,
    policy: &Policy,
    playbook: &Playbook,
    episodes: usize,
    master_seed: u64,
    label: &str,
    paths: Option<&RunPaths>,
) -> Result<Vec<EpisodeRecord>> {
    let mut records = Vec::with_capacity(episodes);
    for i in 0..episodes {
        let episode_id = format!("{}-{label}-e{i:04}", scenario.scenario_id);
        let mut cfg = scenario.clone();
        cfg.rng_seed = derive_seed(master_seed, i as u64);
        let mut outcome = run_episode(&cfg, policy, playbook, &episode_id)?;
        if let Some(paths) = paths {
            persist_episode(paths, &mut outcome)?;
        }
        records.push(outcome.record);
    }
    Ok(records)
}

/// Output of a `run` invocation.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<EpisodeRecord>,
    pub report_text: String,
    pub run_dir: PathBuf,
}

/// Compare the configured policies on one scenario.
pub fn cmd_run(config: &ExperimentConfig) -> Result<RunOutput> {
    config.scenario.validate()?;
    if config.policies.is_empty() {
        return Err(Error::Validation("no policies requested".into()));
    }
    if config.episodes == 0 {
        return Err(Error::Validation("episodes must be positive".into()));
    }
    let paths = config.run_paths();
    let mut manifest = start_manifest(&paths, config, config.force)?;

    let mut records = Vec::new();
    for kind in &config.policies {
        let policy = Policy::build(*kind, &config.scenario)?;
        let batch = evaluate_policy(
            &config.scenario,
            &policy,
            &Playbook::empty(),
            config.episodes,
            config.master_seed,
            kind.as_str(),
            Some(&paths),
        )?;
        manifest
            .episodes
            .extend(batch.iter().map(|r| format!("episodes/{}.record.json", r.episode_id)));
        records.extend(batch);
    }

    let rows = report::policy_rows(&records);
    let report_text = report::render_policy_table(config.scenario.scenario_id.as_str(), &rows);
    fs::write(paths.report_txt(), &report_text)?;
    fs::write(paths.report_csv(), report::policy_table_csv(&rows))?;
    finish_manifest(&paths, &mut manifest)?;

    Ok(RunOutput { records, report_text, run_dir: paths.root().to_path_buf() })
}

/// Output of an `evolve` invocation.
#[derive(Debug, Clone)]
pub struct EvolveOutput {
    pub rounds: Vec<RoundSummary>,
    pub records: Vec<EpisodeRecord>,
    pub version_count: usize,
    pub report_text: String,
    pub run_dir: PathBuf,
}

/// Run (or resume) an evolution experiment with the default heuristic
/// miner as reflector.
pub fn cmd_evolve(config: &ExperimentConfig) -> Result<EvolveOutput> {
    cmd_evolve_with_reflector(config, &HeuristicMiner::default())
}

pub fn cmd_evolve_with_reflector(
    config: &ExperimentConfig,
    reflector: &dyn ReflectorBackend,
) -> Result<EvolveOutput> {
    config.scenario.validate()?;
    let paths = config.run_paths();
    let policy = Policy::build(config.evolution_policy, &config.scenario)?;

    let resuming = !config.force && EvolutionState::exists(&paths);
    let mut manifest;
    let mut state;
    if resuming {
        manifest = read_json(&paths.manifest())?;
        state = EvolutionState::load(&paths)?;
    } else {
        manifest = start_manifest(&paths, config, config.force)?;
        state = EvolutionState::create(&paths)?;
    }

    let mut rounds = Vec::new();
    while state.rounds_completed < config.evolution.max_rounds {
        let summary = evolve_round(
            &mut state,
            &config.scenario,
            &policy,
            reflector,
            &config.evolution,
            &paths,
            config.master_seed,
        )?;
        rounds.push(summary);
    }

    manifest.episodes = state
        .records
        .iter()
        .map(|r| format!("episodes/{}.record.json", r.episode_id))
        .collect();

    let rows = aggregate_version_stats(&state.records);
    let report_text = report::render_version_table(config.scenario.scenario_id.as_str(), &rows);
    fs::write(paths.report_txt(), &report_text)?;
    fs::write(paths.report_csv(), report::version_table_csv(&rows))?;
    fs::write(paths.plot_csv(), report::version_plot_csv(&rows))?;
    finish_manifest(&paths, &mut manifest)?;

    Ok(EvolveOutput {
        rounds,
        records: state.records,
        version_count: state.versions.len(),
        report_text,
        run_dir: paths.root().to_path_buf(),
    })
}

/// Replay verification report: recomputed metrics plus the bullet
/// activation timeline.
#[derive(Debug, Clone)]
pub struct ReplayOutput {
    pub report_text: String,
}

/// Recompute an episode's metrics from its trajectory and diff against the
/// stored record; integrity failures are errors carrying the diff.
pub fn cmd_replay(record_path: &Path) -> Result<ReplayOutput> {
    let record: EpisodeRecord = read_json(record_path)?;
    // Records live at <run>/episodes/<id>.record.json; stored paths are
    // relative to <run>.
    let run_dir = record_path
        .parent()
        .and_then(Path::parent)
        .ok_or_else(|| Error::Validation("record path has no run directory".into()))?;
    let trajectory: Vec<crate::dynamics::TrajectoryRecord> =
        read_jsonl(&run_dir.join(&record.trajectory_path))?;
    let (d_min_lb, d_min_bg, breakdown) = scoring::episode_metrics(&trajectory)?;

    let mut diffs = Vec::new();
    if breakdown.total != record.score {
        diffs.push(format!("score: stored {} recomputed {}", record.score, breakdown.total));
    }
    if d_min_lb != record.d_min_lb {
        diffs.push(format!("d_min_lb: stored {} recomputed {d_min_lb}", record.d_min_lb));
    }
    if d_min_bg != record.d_min_bg {
        diffs.push(format!("d_min_bg: stored {} recomputed {d_min_bg}", record.d_min_bg));
    }
    if !diffs.is_empty() {
        return Err(Error::Integrity(format!(
            "episode {} fails replay:\n  {}",
            record.episode_id,
            diffs.join("\n  ")
        )));
    }

    let mut text = String::new();
    let _ = writeln!(
        text,
        "episode {} verified: score {} (d_lady {:.3} m, d_guard {:.3} m)",
        record.episode_id,
        report::sci3(record.score),
        d_min_lb,
        d_min_bg
    );
    let trace: Vec<TraceRecord> = read_jsonl(&run_dir.join(&record.trace_path))?;
    let mut seen = BTreeSet::new();
    let mut timeline = Vec::new();
    for step in &trace {
        for id in &step.active_bullet_ids {
            if seen.insert(id.clone()) {
                timeline.push((id.clone(), step.t));
            }
        }
    }
    if timeline.is_empty() {
        let _ = writeln!(text, "no bullets activated");
    } else {
        let _ = writeln!(text, "bullet activation timeline:");
        for (id, t) in timeline {
            let _ = writeln!(text, "  {id} first active at t={t:.1} s");
        }
    }
    Ok(ReplayOutput { report_text: text })
}

/// Rebuild report files for an existing run directory from its persisted
/// records. Evolution runs (those with stats.json) get the per-version
/// table; plain runs get the policy table.
pub fn cmd_report(run_dir: &Path) -> Result<String> {
    let paths = RunPaths::new(run_dir);
    let manifest: RunManifest = read_json(&paths.manifest())?;
    let mut records: Vec<EpisodeRecord> = Vec::new();
    for rel in &manifest.episodes {
        records.push(read_json(&paths.root().join(rel))?);
    }
    if records.is_empty() {
        return Err(Error::Validation("run directory holds no episode records".into()));
    }
    let scenario = records[0].scenario_id.as_str();
    let report_text = if paths.stats().exists() {
        let rows = aggregate_version_stats(&records);
        fs::write(paths.report_csv(), report::version_table_csv(&rows))?;
        fs::write(paths.plot_csv(), report::version_plot_csv(&rows))?;
        report::render_version_table(scenario, &rows)
    } else {
        let rows = report::policy_rows(&records);
        fs::write(paths.report_csv(), report::policy_table_csv(&rows))?;
        report::render_policy_table(scenario, &rows)
    };
    fs::write(paths.report_txt(), &report_text)?;
    Ok(report_text)
}
