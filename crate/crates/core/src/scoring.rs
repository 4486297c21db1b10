//! Composite interception score and per-version aggregation.
//!
//! The score combines the squared minimum lady-bandit distance with an
//! inverse penalty on the minimum bandit-guard distance:
//!
//! ```text
//! S = d_min_LB² + 10⁶ / (d_min_BG + 0.1)
//! ```
//!
//! Lower is better: a perfect intercept with wide guard separation drives
//! both terms toward zero.

use crate::dynamics::TrajectoryRecord;
use crate::episode::EpisodeRecord;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    pub d_min_lb: f64,
    pub d_min_bg: f64,
    pub lady_term: f64,
    pub guard_term: f64,
    pub total: f64,
}

/// Evaluate the composite score for the two episode minima.
pub fn composite_score(d_min_lb: f64, d_min_bg: f64) -> Result<ScoreBreakdown> {
    if !d_min_lb.is_finite() || !d_min_bg.is_finite() {
        return Err(Error::InvalidInput("non-finite distance".into()));
    }
    if d_min_lb < 0.0 || d_min_bg < 0.0 {
        return Err(Error::InvalidInput(format!(
            "distances must be non-negative, got ({d_min_lb}, {d_min_bg})"
        )));
    }
    let lady_term = d_min_lb * d_min_lb;
    let guard_term = 1e6 / (d_min_bg + 0.1);
    Ok(ScoreBreakdown { d_min_lb, d_min_bg, lady_term, guard_term, total: lady_term + guard_term })
}

/// Distance minima over a trajectory (over time, and over guards), plus the
/// resulting score.
pub fn episode_metrics(trajectory: &[TrajectoryRecord]) -> Result<(f64, f64, ScoreBreakdown)> {
    if trajectory.is_empty() {
        return Err(Error::InvalidInput("empty trajectory".into()));
    }
    let d_min_lb = trajectory.iter().map(|r| r.lady_distance()).fold(f64::INFINITY, f64::min);
    let d_min_bg = trajectory.iter().map(|r| r.guard_distance()).fold(f64::INFINITY, f64::min);
    let breakdown = composite_score(d_min_lb, d_min_bg)?;
    Ok((d_min_lb, d_min_bg, breakdown))
}

/// One row of the per-version statistics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VersionRow {
    pub version: u32,
    pub n: usize,
    pub mean_score: f64,
    pub std_score: f64,
    pub mean_d_lady: f64,
    pub mean_d_guard: f64,
    pub best: bool,
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample (n-1) standard deviation; zero for fewer than two samples.
pub fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    var.sqrt()
}

/// Group records by playbook version and compute the appendix-table rows:
/// mean of per-episode scores (not the score of mean distances), sample
/// std, distance means, and a best flag on the lowest mean score.
pub fn aggregate_version_stats(records: &[EpisodeRecord]) -> Vec<VersionRow> {
    let mut groups: BTreeMap<u32, Vec<&EpisodeRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.playbook_version).or_default().push(r);
    }
    let mut rows: Vec<VersionRow> = groups
        .into_iter()
        .map(|(version, group)| {
            let scores: Vec<f64> = group.iter().map(|r| r.score).collect();
            let lady: Vec<f64> = group.iter().map(|r| r.d_min_lb).collect();
            let guard: Vec<f64> = group.iter().map(|r| r.d_min_bg).collect();
            VersionRow {
                version,
                n: group.len(),
                mean_score: mean(&scores),
                std_score: sample_std(&scores),
                mean_d_lady: mean(&lady),
                mean_d_guard: mean(&guard),
                best: false,
            }
        })
        .collect();
    if let Some(best_idx) = rows
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.mean_score.total_cmp(&b.mean_score))
        .map(|(i, _)| i)
    {
        rows[best_idx].best = true;
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{BodyRecord, PointRecord};
    use crate::math::Vec3;

    fn record(t: f64, lady_d: f64, guard_ds: &[f64]) -> TrajectoryRecord {
        TrajectoryRecord {
            t,
            bandit: BodyRecord { pos: Vec3::ZERO, vel: Vec3::ZERO, mass_total: 1000.0, mass_prop: 200.0 },
            lady: PointRecord { pos: Vec3::new(lady_d, 0.0, 0.0), vel: Vec3::ZERO },
            guards: guard_ds
                .iter()
                .map(|d| PointRecord { pos: Vec3::new(0.0, *d, 0.0), vel: Vec3::ZERO })
                .collect(),
            command: None,
        }
    }

    #[test]
    fn perfect_intercept_far_guard_scores_near_zero() {
        let s = composite_score(0.0, 1e9).unwrap();
        assert_eq!(s.lady_term, 0.0);
        assert!((s.total - 1e6 / (1e9 + 0.1)).abs() < 1e-15);
        assert!(s.total < 0.0011);
    }

    #[test]
    fn hand_checked_value_is_exact() {
        let s = composite_score(100.0, 9.9).unwrap();
        assert_eq!(s.total, 110_000.0);
        assert_eq!(s.lady_term, 10_000.0);
        assert_eq!(s.guard_term, 100_000.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(composite_score(-1.0, 5.0).is_err());
        assert!(composite_score(1.0, f64::NAN).is_err());
        assert!(composite_score(f64::INFINITY, 5.0).is_err());
    }

    #[test]
    fn single_sample_metrics() {
        let traj = vec![record(0.0, 52.16, &[29.43])];
        let (d_lb, d_bg, s) = episode_metrics(&traj).unwrap();
        assert_eq!(d_lb, 52.16);
        assert_eq!(d_bg, 29.43);
        assert_eq!(s.total, composite_score(52.16, 29.43).unwrap().total);
    }

    #[test]
    fn minima_taken_over_time_and_guards() {
        let traj = vec![
            record(0.0, 500.0, &[40.0, 300.0]),
            record(1.0, 11.44, &[60.0, 25.0]),
            record(2.0, 80.0, &[100.0, 90.0]),
        ];
        let (d_lb, d_bg, s) = episode_metrics(&traj).unwrap();
        assert_eq!(d_lb, 11.44);
        assert_eq!(d_bg, 25.0);
        assert_eq!(s.total, composite_score(11.44, 25.0).unwrap().total);
        assert!(episode_metrics(&[]).is_err());
    }

    #[test]
    fn concatenation_takes_elementwise_minima() {
        let t1 = vec![record(0.0, 300.0, &[50.0]), record(1.0, 200.0, &[80.0])];
        let t2 = vec![record(2.0, 250.0, &[20.0]), record(3.0, 400.0, &[90.0])];
        let both: Vec<_> = t1.iter().chain(t2.iter()).cloned().collect();
        let (a_lb, a_bg, _) = episode_metrics(&t1).unwrap();
        let (b_lb, b_bg, _) = episode_metrics(&t2).unwrap();
        let (c_lb, c_bg, _) = episode_metrics(&both).unwrap();
        assert_eq!(c_lb, a_lb.min(b_lb));
        assert_eq!(c_bg, a_bg.min(b_bg));
    }

    #[test]
    fn sample_std_matches_hand_arithmetic() {
        assert_eq!(mean(&[10.0, 20.0, 30.0]), 20.0);
        assert_eq!(sample_std(&[10.0, 20.0, 30.0]), 10.0);
        assert_eq!(sample_std(&[7.0]), 0.0);
    }
}
