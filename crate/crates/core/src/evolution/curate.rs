//! Curation: convert reflector proposals into structured curator ops
//! against the current playbook.
//!
//! A proposal whose section already holds a bullet with overlapping
//! conditions refines that bullet (UPDATE): thresholds widen toward the
//! more conservative bound, evidence is appended, and the occurrence count
//! is incremented. Everything else becomes an ADD under a fresh
//! sequential id.

use crate::error::Result;
use crate::evolution::reflect::Proposal;
use crate::playbook::{bullet_id, section_id_prefix, Bullet, ConditionBlock, CuratorOp, Playbook, RangeBound};
use std::collections::BTreeMap;

/// Widen two blocks into the more conservative (easier to trigger) guard:
/// max bounds take the larger value, min bounds the smaller; a field absent
/// on either side stays absent; conflicting booleans drop out.
fn widen(a: &ConditionBlock, b: &ConditionBlock) -> ConditionBlock {
    fn widen_range(a: Option<RangeBound>, b: Option<RangeBound>) -> Option<RangeBound> {
        let (a, b) = (a?, b?);
        let min = match (a.min, b.min) {
            (Some(x), Some(y)) => Some(x.min(y)),
            _ => None,
        };
        let max = match (a.max, b.max) {
            (Some(x), Some(y)) => Some(x.max(y)),
            _ => None,
        };
        if min.is_none() && max.is_none() {
            None
        } else {
            Some(RangeBound { min, max })
        }
    }
    fn widen_bool(a: Option<bool>, b: Option<bool>) -> Option<bool> {
        match (a, b) {
            (Some(x), Some(y)) if x == y => Some(x),
            _ => None,
        }
    }
    ConditionBlock {
        time: widen_range(a.time, b.time),
        guard_distance: widen_range(a.guard_distance, b.guard_distance),
        target_distance: widen_range(a.target_distance, b.target_distance),
        velocity: widen_range(a.velocity, b.velocity),
        guard_approaching: widen_bool(a.guard_approaching, b.guard_approaching),
        approaching: widen_bool(a.approaching, b.approaching),
    }
}

/// Next free counter per section, considering current bullets only.
fn next_counter(current: &Playbook) -> BTreeMap<String, u32> {
    let mut counters: BTreeMap<String, u32> = BTreeMap::new();
    for bullet in &current.bullets {
        let prefix = section_id_prefix(&bullet.section);
        let counter: u32 = bullet
            .id
            .strip_prefix(&prefix)
            .and_then(|rest| rest.strip_prefix('-'))
            .and_then(|digits| digits.parse().ok())
            .unwrap_or(0);
        let slot = counters.entry(bullet.section.clone()).or_insert(0);
        *slot = (*slot).max(counter);
    }
    counters
}

/// Convert proposals into a valid op batch; validates the batch against a
/// scratch copy so failures leave no partial output.
pub fn curate(proposals: &[Proposal], current: &Playbook, episode_id: &str) -> Result<Vec<CuratorOp>> {
    let mut ops = Vec::new();
    let mut counters = next_counter(current);

    for proposal in proposals {
        let draft = &proposal.draft;
        let existing = current
            .bullets
            .iter()
            .find(|b| b.section == draft.section && b.conditions.overlaps(&draft.conditions));
        match existing {
            Some(old) => {
                let bullet = Bullet {
                    id: old.id.clone(),
                    section: draft.section.clone(),
                    kind: draft.kind,
                    text: draft.text.clone(),
                    conditions: widen(&old.conditions, &draft.conditions),
                    states: old.states.iter().chain(draft.states.iter()).copied().collect(),
                    evidence: if old.evidence.is_empty() {
                        draft.evidence.clone()
                    } else {
                        format!("{}\n{}", old.evidence, draft.evidence)
                    },
                    // apply_ops unions histories and sums counts, so the
                    // update carries only this episode's contribution.
                    episode_history: vec![episode_id.to_string()],
                    occurrence_count: 1,
                };
                ops.push(CuratorOp::Update { bullet });
            }
            None => {
                let counter = counters.entry(draft.section.clone()).or_insert(0);
                *counter += 1;
                let bullet = Bullet {
                    id: bullet_id(&draft.section, *counter),
                    section: draft.section.clone(),
                    kind: draft.kind,
                    text: draft.text.clone(),
                    conditions: draft.conditions.clone(),
                    states: draft.states.clone(),
                    evidence: draft.evidence.clone(),
                    episode_history: vec![episode_id.to_string()],
                    occurrence_count: 1,
                };
                ops.push(CuratorOp::Add { bullet });
            }
        }
    }

    // All-or-nothing: prove the batch applies before handing it out.
    current.apply_ops(&ops)?;
    Ok(ops)
}
