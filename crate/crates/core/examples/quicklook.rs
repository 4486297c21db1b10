//! Quick end-to-end look at all four scenarios: scripted-policy comparison
//! plus one evolution run each, printed as the report tables.
//!
//! Run with: cargo run --example quicklook --release

use guide_core::dynamics::{ScenarioConfig, ScenarioId};
use guide_core::evolution::EvolutionConfig;
use guide_core::harness::{cmd_evolve, cmd_run, evaluate_policy, ExperimentConfig};
use guide_core::playbook::Playbook;
use guide_core::policy::{Policy, PolicyKind};
use guide_core::report;
use guide_core::scoring::aggregate_version_stats;

fn main() -> guide_core::Result<()> {
    let out = tempfile::tempdir().expect("tempdir");
    for id in ScenarioId::ALL {
        let scenario = ScenarioConfig::preset(id, 7);
        let mut cfg = ExperimentConfig::new(scenario.clone(), out.path().join("runs"));
        cfg.policies = vec![PolicyKind::Prograde, PolicyKind::Lqr, PolicyKind::ScriptedFollower];
        cfg.episodes = 20;
        cfg.master_seed = 7;
        let run = cmd_run(&cfg)?;
        println!("{}", run.report_text);

        let mut evo_cfg = ExperimentConfig::new(scenario.clone(), out.path().join("evo"));
        evo_cfg.master_seed = 100 + cfg.master_seed;
        evo_cfg.evolution = EvolutionConfig::default();
        let evo = cmd_evolve(&evo_cfg)?;
        println!("{}", evo.report_text);
        for round in &evo.rounds {
            println!(
                "  round {} on v{}: reflected {} ({:?}), {} proposal(s){}",
                round.round,
                round.evaluated_version,
                round.reflected_episode_id,
                round.outcome_label,
                round.proposals,
                round
                    .new_version
                    .map(|v| format!(", spawned v{v}"))
                    .unwrap_or_default()
            );
        }

        // Dedicated 20-episode evaluation of v0 versus each evolved version.
        let eval_dir = out.path().join("eval").join(id.as_str());
        let paths = guide_core::store::RunPaths::new(&eval_dir);
        let policy = Policy::ScriptedFollower;
        let mut records = Vec::new();
        for version in 0..evo.version_count as u32 {
            let playbook_text =
                std::fs::read_to_string(evo.run_dir.join("playbooks").join(format!("v{version}.json")))?;
            let playbook = Playbook::from_json(&playbook_text)?;
            records.extend(evaluate_policy(
                &scenario,
                &policy,
                &playbook,
                20,
                777,
                &format!("eval-v{version}"),
                Some(&paths),
            )?);
        }
        // The eval records all carry the version they ran with.
        let rows = aggregate_version_stats(&records);
        println!("{}", report::render_version_table(&format!("{id} 20-episode eval"), &rows));
        println!("{}", "=".repeat(76));
    }
    Ok(())
}
