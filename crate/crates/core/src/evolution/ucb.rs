//! UCB1 selection among playbook versions.
//!
//! Composite scores are minimized, so each version's reward is its mean
//! score min-max normalized across versions and negated; the selection
//! maximizes `reward_k + c·sqrt(ln N / n_k)`. Untried versions carry an
//! infinite exploration bonus and are always taken first.

use crate::error::{Error, Result};
use crate::scoring::{mean, sample_std};
use serde::{Deserialize, Serialize};

/// Evaluation history of one playbook version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VersionStats {
    pub version: u32,
    pub score_history: Vec<f64>,
}

impl VersionStats {
    pub fn new(version: u32) -> Self {
        Self { version, score_history: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.score_history.len()
    }

    pub fn mean_score(&self) -> f64 {
        mean(&self.score_history)
    }

    pub fn std_score(&self) -> f64 {
        sample_std(&self.score_history)
    }
}

/// Per-version UCB values (reward plus exploration bonus). Untried
/// versions score infinity.
pub fn ucb_scores(stats: &[VersionStats], c: f64) -> Vec<f64> {
    let total: usize = stats.iter().map(VersionStats::n).sum();
    let means: Vec<f64> = stats.iter().map(VersionStats::mean_score).collect();
    let tried: Vec<f64> =
        stats.iter().zip(&means).filter(|(s, _)| s.n() > 0).map(|(_, m)| *m).collect();
    let lo = tried.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = tried.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ln_total = (total.max(1) as f64).ln();

    stats
        .iter()
        .zip(&means)
        .map(|(s, m)| {
            if s.n() == 0 {
                return f64::INFINITY;
            }
            let normalized = if hi > lo { (m - lo) / (hi - lo) } else { 0.0 };
            let reward = -normalized;
            reward + c * (ln_total / s.n() as f64).sqrt()
        })
        .collect()
}

/// Pick the next version to evaluate. Ties break toward the lowest version.
pub fn ucb_select(stats: &[VersionStats], c: f64) -> Result<u32> {
    if stats.is_empty() {
        return Err(Error::Validation("ucb_select needs at least one version".into()));
    }
    let scores = ucb_scores(stats, c);
    let mut best = 0usize;
    for (i, score) in scores.iter().enumerate().skip(1) {
        let better = *score > scores[best]
            || (*score == scores[best] && stats[i].version < stats[best].version);
        if better {
            best = i;
        }
    }
    Ok(stats[best].version)
}
