//! Parameter sweep over the free physics knobs, checking the directional
//! experiment outcomes. Temporary tuning aid.

use guide_core::dynamics::{ScenarioConfig, ScenarioId};
use guide_core::evolution::EvolutionConfig;
use guide_core::harness::{cmd_evolve, evaluate_policy, ExperimentConfig};
use guide_core::playbook::Playbook;
use guide_core::policy::Policy;
use guide_core::scoring::aggregate_version_stats;
use guide_core::store::RunPaths;

struct Combo {
    bandit_accel: f64,
    defense_gp: f64,
    defense_gd: f64,
    min_offset: f64,
}

fn preset(id: ScenarioId, combo: &Combo) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::preset(id, 7);
    cfg.bandit_max_accel = combo.bandit_accel;
    cfg.guard_params.defense_gain_p = combo.defense_gp;
    cfg.guard_params.defense_gain_d = combo.defense_gd;
    cfg.guard_params.blocking_min_offset = combo.min_offset;
    cfg
}

fn main() -> guide_core::Result<()> {
    let tmp = tempfile::tempdir().expect("tempdir");
    let combos: Vec<Combo> = {
        let mut v = Vec::new();
        for &bandit_accel in &[0.1, 0.2, 0.4] {
            for &(defense_gp, defense_gd) in &[(2e-3, 6e-2), (8e-3, 1.2e-1), (2e-2, 2e-1)] {
                for &min_offset in &[0.0, 30.0, 50.0] {
                    v.push(Combo { bandit_accel, defense_gp, defense_gd, min_offset });
                }
            }
        }
        v
    };

    println!(
        "{:>5} {:>7} {:>7} {:>4} | {:>8} {:>8} {:>6} {:>6} {:>6} {:>6} | {:>8} {:>8} {:>5} | {:>5} {:>5}",
        "a_b", "kp_d", "kd_d", "off", "v0", "best", "ratio", "dL0", "dLb", "dG0-dGb", "prog", "lqr", "ord67", "ord4", "ord5"
    );

    for (ci, combo) in combos.iter().enumerate() {
        // LG6 evolution + eval.
        let scenario = preset(ScenarioId::Lg6, combo);
        let mut evo_cfg = ExperimentConfig::new(scenario.clone(), tmp.path().join(format!("evo{ci}")));
        evo_cfg.master_seed = 107;
        evo_cfg.evolution = EvolutionConfig::default();
        let evo = cmd_evolve(&evo_cfg)?;

        let paths = RunPaths::new(tmp.path().join(format!("eval{ci}")));
        let policy = Policy::ScriptedFollower;
        let mut records = Vec::new();
        for version in 0..evo.version_count as u32 {
            let text = std::fs::read_to_string(
                evo.run_dir.join("playbooks").join(format!("v{version}.json")),
            )?;
            let playbook = Playbook::from_json(&text)?;
            records.extend(evaluate_policy(
                &scenario,
                &policy,
                &playbook,
                20,
                777,
                &format!("ev{version}"),
                Some(&paths),
            )?);
        }
        let rows = aggregate_version_stats(&records);
        let v0 = rows.iter().find(|r| r.version == 0).unwrap().clone();
        let best = rows.iter().filter(|r| r.version > 0).min_by(|a, b| a.mean_score.total_cmp(&b.mean_score));
        let (best_score, best_dl, best_dg) = match best {
            Some(b) => (b.mean_score, b.mean_d_lady, b.mean_d_guard),
            None => (f64::NAN, f64::NAN, f64::NAN),
        };
        let ratio = best_score / v0.mean_score;

        // Baseline ordering on all four scenarios.
        let mut ord = Vec::new();
        for id in [ScenarioId::Lg6, ScenarioId::Lg7, ScenarioId::Lg4, ScenarioId::Lg5] {
            let sc = preset(id, combo);
            let prog = evaluate_policy(&sc, &Policy::Prograde, &Playbook::empty(), 20, 777, "p", None)?;
            let lqr_policy = Policy::build(guide_core::policy::PolicyKind::Lqr, &sc)?;
            let lqr = evaluate_policy(&sc, &lqr_policy, &Playbook::empty(), 20, 777, "l", None)?;
            let pm = prog.iter().map(|r| r.score).sum::<f64>() / prog.len() as f64;
            let lm = lqr.iter().map(|r| r.score).sum::<f64>() / lqr.len() as f64;
            ord.push((id, pm, lm));
        }
        let ord67 = ord[0].1 > ord[0].2 && ord[1].1 > ord[1].2;
        let ord4 = ord[2].1 < ord[2].2;
        let ord5 = ord[3].1 < ord[3].2;

        println!(
            "{:>5.2} {:>7.0e} {:>7.0e} {:>4.0} | {:>8.2e} {:>8.2e} {:>6.3} {:>6.1} {:>6.1} {:>3.0}-{:>3.0} | {:>8.2e} {:>8.2e} {:>5} | {:>5} {:>5}",
            combo.bandit_accel,
            combo.defense_gp,
            combo.defense_gd,
            combo.min_offset,
            v0.mean_score,
            best_score,
            ratio,
            v0.mean_d_lady,
            best_dl,
            v0.mean_d_guard,
            best_dg,
            ord[0].1,
            ord[0].2,
            ord67,
            ord4,
            ord5
        );
    }
    Ok(())
}
