//! Plain-text and CSV report rendering: the policy-comparison table and
//! the per-version statistics table, plus plot-ready CSV data.

use crate::episode::EpisodeRecord;
use crate::policy::PolicyKind;
use crate::scoring::{mean, sample_std, VersionRow};
use std::collections::BTreeMap;
use std::fmt::Write;

/// Scientific notation with three significant digits (e.g. `3.49e4`).
pub fn sci3(value: f64) -> String {
    format!("{value:.2e}")
}

/// One row of the policy-comparison table.
#[derive(Debug, Clone)]
pub struct PolicyRow {
    pub policy: PolicyKind,
    pub n: usize,
    pub mean_score: f64,
    pub std_score: f64,
    pub mean_d_lady: f64,
    pub mean_d_guard: f64,
}

/// Group per-episode records by policy.
pub fn policy_rows(records: &[EpisodeRecord]) -> Vec<PolicyRow> {
    let mut groups: BTreeMap<PolicyKind, Vec<&EpisodeRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.policy).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(policy, group)| {
            let scores: Vec<f64> = group.iter().map(|r| r.score).collect();
            PolicyRow {
                policy,
                n: group.len(),
                mean_score: mean(&scores),
                std_score: sample_std(&scores),
                mean_d_lady: mean(&group.iter().map(|r| r.d_min_lb).collect::<Vec<_>>()),
                mean_d_guard: mean(&group.iter().map(|r| r.d_min_bg).collect::<Vec<_>>()),
            }
        })
        .collect()
}

/// Policy comparison: rows = policies, cells = mean ± std.
pub fn render_policy_table(scenario: &str, rows: &[PolicyRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "composite score comparison — {scenario} (lower is better)");
    let _ = writeln!(
        out,
        "{:<18} {:>4} {:>22} {:>12} {:>12}",
        "policy", "n", "score (mean ± std)", "d_lady (m)", "d_guard (m)"
    );
    for row in rows {
        let _ = writeln!(
            out,
            "{:<18} {:>4} {:>10} ± {:>9} {:>12.1} {:>12.1}",
            row.policy.as_str(),
            row.n,
            sci3(row.mean_score),
            sci3(row.std_score),
            row.mean_d_lady,
            row.mean_d_guard
        );
    }
    // Directional note on the two scripted baselines when both are present.
    let lqr = rows.iter().find(|r| r.policy == PolicyKind::Lqr);
    let prograde = rows.iter().find(|r| r.policy == PolicyKind::Prograde);
    if let (Some(lqr), Some(prograde)) = (lqr, prograde) {
        let expected_prograde_better = matches!(scenario, "lg4" | "lg5");
        let prograde_better = prograde.mean_score < lqr.mean_score;
        if prograde_better == expected_prograde_better {
            let _ = writeln!(
                out,
                "note: prograde/lqr ordering matches the expected {scenario} pattern"
            );
        } else {
            let _ = writeln!(
                out,
                "note: DEVIATION — prograde/lqr ordering differs from the expected \
                 {scenario} pattern (prograde {}, lqr {})",
                sci3(prograde.mean_score),
                sci3(lqr.mean_score)
            );
        }
    }
    out
}

pub fn policy_table_csv(rows: &[PolicyRow]) -> String {
    let mut out = String::from("policy,n,mean_score,std_score,mean_d_lady,mean_d_guard\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            row.policy.as_str(), row.n, row.mean_score, row.std_score, row.mean_d_lady, row.mean_d_guard
        );
    }
    out
}

/// Per-version table in the appendix layout: version, n, mean score,
/// distance means; the best row is starred.
pub fn render_version_table(scenario: &str, rows: &[VersionRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "per-version statistics — {scenario}");
    let _ = writeln!(
        out,
        "{:<8} {:>4} {:>12} {:>12} {:>14} {:>14}",
        "version", "n", "mean score", "std", "d_lady (m)", "d_guard (m)"
    );
    for row in rows {
        let _ = writeln!(
            out,
            "{:<8} {:>4} {:>12} {:>12} {:>14.1} {:>14.1}{}",
            format!("v{}", row.version),
            row.n,
            sci3(row.mean_score),
            sci3(row.std_score),
            row.mean_d_lady,
            row.mean_d_guard,
            if row.best { "  *best" } else { "" }
        );
    }
    out
}

pub fn version_table_csv(rows: &[VersionRow]) -> String {
    let mut out = String::from("version,n,mean_score,std_score,mean_d_lady,mean_d_guard,best\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.version, row.n, row.mean_score, row.std_score, row.mean_d_lady, row.mean_d_guard, row.best
        );
    }
    out
}

/// Plot-ready data for the per-version bar chart: log-scale means plus std.
pub fn version_plot_csv(rows: &[VersionRow]) -> String {
    let mut out = String::from("version,mean_score,std_score,log10_mean_score,best\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            row.version,
            row.mean_score,
            row.std_score,
            row.mean_score.max(f64::MIN_POSITIVE).log10(),
            row.best
        );
    }
    out
}
