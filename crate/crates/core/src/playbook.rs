//! The playbook: a versioned, ordered collection of natural-language rules
//! ("bullets"), each gated by a symbolic condition block evaluated against
//! features derived from the current observation. Bullets whose conditions
//! hold are injected into the acting model's prompt; curator operations
//! (ADD / UPDATE / REMOVE) turn version k into version k+1.

use crate::dynamics::Observation;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Inclusive numeric range; either bound may be absent.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeBound {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
}

impl RangeBound {
    pub fn min(v: f64) -> Self {
        Self { min: Some(v), max: None }
    }

    pub fn max(v: f64) -> Self {
        Self { min: None, max: Some(v) }
    }

    pub fn contains(&self, value: f64) -> bool {
        self.min.map_or(true, |m| value >= m) && self.max.map_or(true, |m| value <= m)
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        for bound in [self.min, self.max].into_iter().flatten() {
            if !bound.is_finite() {
                return Err(Error::Validation(format!("{field}: non-finite bound")));
            }
        }
        if let (Some(lo), Some(hi)) = (self.min, self.max) {
            if lo > hi {
                return Err(Error::Validation(format!("{field}: min {lo} > max {hi}")));
            }
        }
        Ok(())
    }
}

/// Symbolic guard attached to a bullet. Absent fields impose no constraint;
/// a bullet is active when every present field holds.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionBlock {
    /// Episode time window, s.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<RangeBound>,
    /// Minimum bandit-guard distance window, m.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guard_distance: Option<RangeBound>,
    /// Bandit-lady distance window, m.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_distance: Option<RangeBound>,
    /// Lady closing-speed window, m/s (positive = closing).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub velocity: Option<RangeBound>,
    /// Guard closing flag.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guard_approaching: Option<bool>,
    /// Lady closing flag.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub approaching: Option<bool>,
}

impl ConditionBlock {
    /// Conjunction over present fields; an empty block is vacuously true.
    pub fn satisfied_by(&self, f: &DerivedFeatures) -> bool {
        self.time.map_or(true, |r| r.contains(f.time))
            && self.guard_distance.map_or(true, |r| r.contains(f.guard_distance))
            && self.target_distance.map_or(true, |r| r.contains(f.target_distance))
            && self.velocity.map_or(true, |r| r.contains(f.velocity))
            && self.guard_approaching.map_or(true, |b| b == f.guard_approaching)
            && self.approaching.map_or(true, |b| b == f.approaching)
    }

    /// Whether the activation regions of two blocks can intersect.
    pub fn overlaps(&self, other: &ConditionBlock) -> bool {
        fn ranges_meet(a: Option<RangeBound>, b: Option<RangeBound>) -> bool {
            match (a, b) {
                (Some(a), Some(b)) => {
                    a.min.unwrap_or(f64::NEG_INFINITY) <= b.max.unwrap_or(f64::INFINITY)
                        && b.min.unwrap_or(f64::NEG_INFINITY) <= a.max.unwrap_or(f64::INFINITY)
                }
                _ => true,
            }
        }
        fn bools_meet(a: Option<bool>, b: Option<bool>) -> bool {
            match (a, b) {
                (Some(a), Some(b)) => a == b,
                _ => true,
            }
        }
        ranges_meet(self.time, other.time)
            && ranges_meet(self.guard_distance, other.guard_distance)
            && ranges_meet(self.target_distance, other.target_distance)
            && ranges_meet(self.velocity, other.velocity)
            && bools_meet(self.guard_approaching, other.guard_approaching)
            && bools_meet(self.approaching, other.approaching)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.time {
            r.validate("conditions.time")?;
        }
        if let Some(r) = self.guard_distance {
            r.validate("conditions.guard_distance")?;
        }
        if let Some(r) = self.target_distance {
            r.validate("conditions.target_distance")?;
        }
        if let Some(r) = self.velocity {
            r.validate("conditions.velocity")?;
        }
        Ok(())
    }
}

/// Scalar features the condition vocabulary is grounded in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedFeatures {
    /// Episode time, s.
    pub time: f64,
    /// Minimum over guards of bandit-guard distance, m.
    pub guard_distance: f64,
    /// Bandit-lady distance, m.
    pub target_distance: f64,
    /// Lady closing speed, m/s; positive when closing.
    pub velocity: f64,
    pub guard_approaching: bool,
    pub approaching: bool,
}

/// Deadband on the guard-distance first difference, m. Prevents the
/// closing flag from chattering on numerical noise.
pub const GUARD_APPROACH_DEADBAND: f64 = 0.1;

/// Ground the condition vocabulary in one (or two consecutive)
/// observations. Rate quantities need `previous`; without it they default
/// to zero / false.
pub fn derive_features(current: &Observation, previous: Option<&Observation>) -> DerivedFeatures {
    let guard_distance = current
        .guards
        .iter()
        .map(|g| (current.bandit.position - g.position).norm())
        .fold(f64::INFINITY, f64::min);
    let target_distance = (current.bandit.position - current.lady.position).norm();

    let (velocity, guard_approaching) = match previous {
        Some(prev) if prev.t < current.t => {
            let dt = current.t - prev.t;
            let prev_target = (prev.bandit.position - prev.lady.position).norm();
            let prev_guard = prev
                .guards
                .iter()
                .map(|g| (prev.bandit.position - g.position).norm())
                .fold(f64::INFINITY, f64::min);
            let closing = (prev_target - target_distance) / dt;
            let guard_closing = (prev_guard - guard_distance) > GUARD_APPROACH_DEADBAND;
            (closing, guard_closing)
        }
        _ => (0.0, false),
    };

    DerivedFeatures {
        time: current.t,
        guard_distance,
        target_distance,
        velocity,
        guard_approaching,
        approaching: velocity > 0.0,
    }
}

/// Bullet classification from the schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BulletKind {
    Constraint,
    Rule,
}

/// A (t, d_lady, v, d_guard) provenance snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSnapshot {
    pub t: f64,
    pub d_lady: f64,
    pub v: f64,
    pub d_guard: f64,
}

/// One playbook rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bullet {
    /// Unique id, `<section-with-hyphens>-<5-digit counter>`.
    pub id: String,
    /// Grouping key, e.g. `guard_avoidance` or `approach`.
    pub section: String,
    #[serde(rename = "type")]
    pub kind: BulletKind,
    /// Natural-language instruction injected into the prompt when active.
    pub text: String,
    pub conditions: ConditionBlock,
    /// Inert provenance snapshots from the episodes that shaped the rule.
    pub states: Vec<StateSnapshot>,
    /// Causal narrative from the reflection pass.
    pub evidence: String,
    /// Episode ids that created or refined this bullet.
    pub episode_history: Vec<String>,
    /// Times this rule fired (at most once per episode).
    pub occurrence_count: u32,
}

/// Id prefix corresponding to a section name (underscores become hyphens).
pub fn section_id_prefix(section: &str) -> String {
    section.replace('_', "-")
}

/// Compose a bullet id from its section and counter.
pub fn bullet_id(section: &str, counter: u32) -> String {
    format!("{}-{:05}", section_id_prefix(section), counter)
}

impl Bullet {
    pub fn validate(&self) -> Result<()> {
        let prefix = section_id_prefix(&self.section);
        let suffix = self
            .id
            .strip_prefix(&prefix)
            .and_then(|rest| rest.strip_prefix('-'))
            .ok_or_else(|| {
                Error::Validation(format!(
                    "bullet id `{}` does not start with section prefix `{prefix}-`",
                    self.id
                ))
            })?;
        if suffix.len() != 5 || !suffix.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Validation(format!(
                "bullet id `{}` must end in a 5-digit counter",
                self.id
            )));
        }
        self.conditions.validate()?;
        let distinct: BTreeSet<&String> = self.episode_history.iter().collect();
        if (self.occurrence_count as usize) < distinct.len() {
            return Err(Error::Validation(format!(
                "bullet `{}`: occurrence_count {} below {} distinct episodes",
                self.id,
                self.occurrence_count,
                distinct.len()
            )));
        }
        Ok(())
    }
}

/// Curator edit turning playbook version k into k+1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "UPPERCASE")]
pub enum CuratorOp {
    Add { bullet: Bullet },
    Update { bullet: Bullet },
    Remove { bullet_id: String },
}

/// Versioned ordered bullet collection; the learned policy object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Playbook {
    pub version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parent_version: Option<u32>,
    pub created_from_episodes: Vec<String>,
    pub bullets: Vec<Bullet>,
}

impl Playbook {
    /// Version 0 is always empty.
    pub fn empty() -> Self {
        Self { version: 0, parent_version: None, created_from_episodes: Vec::new(), bullets: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.version == 0 && !self.bullets.is_empty() {
            return Err(Error::Validation("playbook version 0 must be empty".into()));
        }
        let mut seen = BTreeSet::new();
        for bullet in &self.bullets {
            bullet.validate()?;
            if !seen.insert(bullet.id.clone()) {
                return Err(Error::Validation(format!("duplicate bullet id `{}`", bullet.id)));
            }
        }
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Bullet> {
        self.bullets.iter().find(|b| b.id == id)
    }

    /// Bullets whose conditions hold, in playbook order. Pure query; the
    /// once-per-episode occurrence bookkeeping lives in [`PlaybookRun`].
    pub fn active_bullets(&self, f: &DerivedFeatures) -> Vec<&Bullet> {
        self.bullets.iter().filter(|b| b.conditions.satisfied_by(f)).collect()
    }

    /// Apply a batch of curator ops left to right, producing version k+1.
    /// The batch is atomic: any invalid op fails the whole call and the
    /// input playbook is untouched.
    pub fn apply_ops(&self, ops: &[CuratorOp]) -> Result<Playbook> {
        let mut bullets = self.bullets.clone();
        let mut episodes: BTreeSet<String> = BTreeSet::new();
        for op in ops {
            match op {
                CuratorOp::Add { bullet } => {
                    bullet.validate()?;
                    if bullets.iter().any(|b| b.id == bullet.id) {
                        return Err(Error::Validation(format!(
                            "ADD of duplicate bullet id `{}`",
                            bullet.id
                        )));
                    }
                    episodes.extend(bullet.episode_history.iter().cloned());
                    bullets.push(bullet.clone());
                }
                CuratorOp::Update { bullet } => {
                    bullet.validate()?;
                    let slot = bullets.iter_mut().find(|b| b.id == bullet.id).ok_or_else(|| {
                        Error::Validation(format!("UPDATE of unknown bullet id `{}`", bullet.id))
                    })?;
                    let mut merged = bullet.clone();
                    // Union episode histories (stable order) and sum counts.
                    let mut history = slot.episode_history.clone();
                    for ep in &bullet.episode_history {
                        if !history.contains(ep) {
                            history.push(ep.clone());
                        }
                    }
                    merged.episode_history = history;
                    merged.occurrence_count = slot.occurrence_count + bullet.occurrence_count;
                    episodes.extend(bullet.episode_history.iter().cloned());
                    *slot = merged;
                }
                CuratorOp::Remove { bullet_id } => {
                    let before = bullets.len();
                    bullets.retain(|b| b.id != *bullet_id);
                    if bullets.len() == before {
                        return Err(Error::Validation(format!(
                            "REMOVE of unknown bullet id `{bullet_id}`"
                        )));
                    }
                }
            }
        }
        let next = Playbook {
            version: self.version + 1,
            parent_version: Some(self.version),
            created_from_episodes: episodes.into_iter().collect(),
            bullets,
        };
        next.validate()?;
        Ok(next)
    }

    /// Canonical JSON rendering: pretty-printed, newline-terminated.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("playbook serializes");
        s.push('\n');
        s
    }

    /// Parse and validate a playbook, reporting the JSON path of any
    /// schema violation.
    pub fn from_json(text: &str) -> Result<Playbook> {
        let mut de = serde_json::Deserializer::from_str(text);
        let playbook: Playbook = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            Error::Parse { path: e.path().to_string(), message: e.inner().to_string() }
        })?;
        playbook.validate()?;
        Ok(playbook)
    }
}

/// Episode-scoped activation wrapper. Owns a working copy of the playbook
/// whose `occurrence_count`s are bumped on first activation within the
/// episode; stored versions are never mutated.
#[derive(Debug, Clone)]
pub struct PlaybookRun {
    playbook: Playbook,
    first_activation: BTreeMap<String, f64>,
}

impl PlaybookRun {
    pub fn new(playbook: Playbook) -> Self {
        Self { playbook, first_activation: BTreeMap::new() }
    }

    pub fn playbook(&self) -> &Playbook {
        &self.playbook
    }

    pub fn version(&self) -> u32 {
        self.playbook.version
    }

    /// Active bullets for these features, in playbook order. Each bullet's
    /// occurrence count is incremented at most once per episode, on its
    /// first activation.
    pub fn active_bullets(&mut self, f: &DerivedFeatures) -> Vec<Bullet> {
        let mut active = Vec::new();
        for bullet in &mut self.playbook.bullets {
            if bullet.conditions.satisfied_by(f) {
                if !self.first_activation.contains_key(&bullet.id) {
                    self.first_activation.insert(bullet.id.clone(), f.time);
                    bullet.occurrence_count += 1;
                }
                active.push(bullet.clone());
            }
        }
        active
    }

    /// First-activation time per bullet id.
    pub fn first_activation_times(&self) -> &BTreeMap<String, f64> {
        &self.first_activation
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::SpacecraftState;
    use crate::math::Vec3;

    fn features(time: f64, guard: f64, target: f64, velocity: f64, ga: bool, ap: bool) -> DerivedFeatures {
        DerivedFeatures {
            time,
            guard_distance: guard,
            target_distance: target,
            velocity,
            guard_approaching: ga,
            approaching: ap,
        }
    }

    fn guard_avoidance_bullet() -> Bullet {
        Bullet {
            id: "guard-avoidance-00001".into(),
            section: "guard_avoidance".into(),
            kind: BulletKind::Constraint,
            text: "When the guard is closing inside the trigger range, stop forward pursuit and thrust laterally until separation reopens.".into(),
            conditions: ConditionBlock {
                time: Some(RangeBound::min(35.0)),
                guard_distance: Some(RangeBound::max(220.0)),
                guard_approaching: Some(true),
                ..ConditionBlock::default()
            },
            states: vec![],
            evidence: "Guard closed from about 230 m while forward throttle was held.".into(),
            episode_history: vec!["ep-2".into()],
            occurrence_count: 1,
        }
    }

    fn approach_bullet() -> Bullet {
        Bullet {
            id: "approach-00002".into(),
            section: "approach".into(),
            kind: BulletKind::Constraint,
            text: "Within close range of the lady and still closing fast, switch to backward or zero forward throttle until the closing speed drops.".into(),
            conditions: ConditionBlock {
                time: Some(RangeBound::min(35.0)),
                target_distance: Some(RangeBound::max(120.0)),
                velocity: Some(RangeBound::min(18.0)),
                approaching: Some(true),
                ..ConditionBlock::default()
            },
            states: vec![],
            evidence: "Flyby at 76 m and 23 m/s with no braking.".into(),
            episode_history: vec!["ep-1".into(), "ep-3".into()],
            occurrence_count: 2,
        }
    }

    #[test]
    fn example_conditions_inside_and_outside() {
        let b = guard_avoidance_bullet();
        assert!(b.conditions.satisfied_by(&features(125.4, 200.0, 400.0, 5.0, true, true)));
        // 230 m is outside the 220 m trigger.
        assert!(!b.conditions.satisfied_by(&features(125.4, 230.0, 400.0, 5.0, true, true)));
        // Bounds are inclusive.
        assert!(b.conditions.satisfied_by(&features(35.0, 220.0, 400.0, 5.0, true, true)));
    }

    #[test]
    fn approach_example_activates() {
        let b = approach_bullet();
        assert!(b.conditions.satisfied_by(&features(100.0, 500.0, 76.0, 23.0, false, true)));
        assert!(!b.conditions.satisfied_by(&features(100.0, 500.0, 76.0, 10.0, false, true)));
    }

    #[test]
    fn empty_block_is_vacuously_true() {
        let block = ConditionBlock::default();
        assert!(block.satisfied_by(&features(0.0, 1.0, 2.0, -3.0, false, false)));
    }

    #[test]
    fn active_bullets_filters_and_preserves_order() {
        let mut p = Playbook::empty();
        p.version = 1;
        p.bullets = vec![guard_avoidance_bullet(), approach_bullet()];
        // Features matching only the approach bullet.
        let f = features(100.0, 500.0, 76.0, 23.0, false, true);
        let active = p.active_bullets(&f);
        assert_eq!(active.len(), 1);
        assert_eq!(active[0].id, "approach-00002");
        // Vacuous conditions keep everything, in order.
        let mut all = p.clone();
        for b in &mut all.bullets {
            b.conditions = ConditionBlock::default();
        }
        let ids: Vec<_> = all.active_bullets(&f).iter().map(|b| b.id.clone()).collect();
        assert_eq!(ids, vec!["guard-avoidance-00001".to_string(), "approach-00002".to_string()]);
    }

    #[test]
    fn playbook_run_counts_once_per_episode() {
        let mut p = Playbook::empty();
        p.version = 1;
        p.bullets = vec![guard_avoidance_bullet()];
        let mut run = PlaybookRun::new(p);
        let f = features(40.0, 100.0, 400.0, 5.0, true, true);
        let first = run.active_bullets(&f);
        assert_eq!(first[0].occurrence_count, 2);
        let again = run.active_bullets(&f);
        assert_eq!(again[0].occurrence_count, 2, "no double count within an episode");
        assert_eq!(run.first_activation_times().get("guard-avoidance-00001"), Some(&40.0));
    }

    #[test]
    fn apply_ops_add_update_remove() {
        let v0 = Playbook::empty();
        let v1 = v0.apply_ops(&[CuratorOp::Add { bullet: guard_avoidance_bullet() }]).unwrap();
        assert_eq!(v1.version, 1);
        assert_eq!(v1.parent_version, Some(0));
        assert_eq!(v1.bullets.len(), 1);
        assert_eq!(v1.bullets[0].occurrence_count, 1);

        // Update into a refined form carrying two more refinement episodes.
        let mut refined = guard_avoidance_bullet();
        refined.conditions.guard_distance = Some(RangeBound::max(230.0));
        refined.episode_history = vec!["ep-1".into(), "ep-4".into()];
        refined.occurrence_count = 2;
        let v2 = v1.apply_ops(&[CuratorOp::Update { bullet: refined }]).unwrap();
        assert_eq!(v2.version, 2);
        let merged = v2.get("guard-avoidance-00001").unwrap();
        assert_eq!(merged.occurrence_count, 3);
        assert_eq!(merged.episode_history, vec!["ep-2", "ep-1", "ep-4"]);
        assert_eq!(merged.conditions.guard_distance, Some(RangeBound::max(230.0)));

        let v3 = v2.apply_ops(&[CuratorOp::Remove { bullet_id: "guard-avoidance-00001".into() }]).unwrap();
        assert!(v3.bullets.is_empty());

        // Empty batch still bumps the version.
        let v4 = v3.apply_ops(&[]).unwrap();
        assert_eq!(v4.version, 4);
        assert_eq!(v4.parent_version, Some(3));
    }

    #[test]
    fn apply_ops_is_atomic() {
        let v0 = Playbook::empty();
        let ops = vec![
            CuratorOp::Add { bullet: guard_avoidance_bullet() },
            CuratorOp::Remove { bullet_id: "missing-00001".into() },
        ];
        assert!(v0.apply_ops(&ops).is_err());
        assert_eq!(v0, Playbook::empty());
    }

    #[test]
    fn serialization_round_trips_and_reports_paths() {
        let mut p = Playbook::empty();
        p.version = 2;
        p.parent_version = Some(1);
        p.bullets = vec![guard_avoidance_bullet(), approach_bullet()];
        let json = p.to_json();
        assert!(json.ends_with('\n'));
        let back = Playbook::from_json(&json).unwrap();
        assert_eq!(p, back);

        let bad = json.replace("\"max\": 220.0", "\"max\": \"fast\"");
        let err = Playbook::from_json(&bad).unwrap_err();
        match err {
            Error::Parse { path, .. } => {
                assert!(path.contains("conditions.guard_distance.max"), "path was `{path}`");
            }
            other => panic!("expected parse error, got {other:?}"),
        }

        let unknown = json.replace("\"section\"", "\"sektion\"");
        assert!(Playbook::from_json(&unknown).is_err());
    }

    #[test]
    fn version_zero_must_be_empty() {
        let mut p = Playbook::empty();
        p.bullets = vec![guard_avoidance_bullet()];
        assert!(p.validate().is_err());
    }

    #[test]
    fn derive_features_examples() {
        let craft = |pos: Vec3, vel: Vec3| SpacecraftState::new(pos, vel, 1000.0, 200.0);
        let obs = |t: f64, bandit: Vec3, guard: Vec3| Observation {
            t,
            bandit: craft(bandit, Vec3::ZERO),
            lady: craft(Vec3::new(0.0, 500.0, 0.0), Vec3::ZERO),
            guards: vec![craft(guard, Vec3::ZERO)],
        };

        // Co-located bandit and lady.
        let co = Observation {
            t: 0.0,
            bandit: craft(Vec3::new(0.0, 500.0, 0.0), Vec3::ZERO),
            lady: craft(Vec3::new(0.0, 500.0, 0.0), Vec3::ZERO),
            guards: vec![craft(Vec3::new(300.0, 0.0, 0.0), Vec3::ZERO)],
        };
        assert_eq!(derive_features(&co, None).target_distance, 0.0);

        // Guard range 230 m then 200 m -> guard_approaching.
        let prev = obs(10.0, Vec3::ZERO, Vec3::new(0.0, 230.0, 0.0));
        let curr = obs(11.0, Vec3::ZERO, Vec3::new(0.0, 200.0, 0.0));
        let f = derive_features(&curr, Some(&prev));
        assert!(f.guard_approaching);
        assert_eq!(f.guard_distance, 200.0);

        // Stationary geometry: no rates.
        let s0 = obs(10.0, Vec3::ZERO, Vec3::new(0.0, 300.0, 0.0));
        let s1 = obs(11.0, Vec3::ZERO, Vec3::new(0.0, 300.0, 0.0));
        let f = derive_features(&s1, Some(&s0));
        assert_eq!(f.velocity, 0.0);
        assert!(!f.approaching);
        assert!(!f.guard_approaching);

        // Bandit moving toward the lady: positive closing speed.
        let m0 = obs(10.0, Vec3::ZERO, Vec3::new(300.0, 0.0, 0.0));
        let m1 = obs(11.0, Vec3::new(0.0, 20.0, 0.0), Vec3::new(300.0, 0.0, 0.0));
        let f = derive_features(&m1, Some(&m0));
        assert!((f.velocity - 20.0).abs() < 1e-9);
        assert!(f.approaching);
    }

    #[test]
    fn bullet_id_format_is_enforced() {
        let mut b = guard_avoidance_bullet();
        b.id = "guard-avoidance-1".into();
        assert!(b.validate().is_err());
        b.id = "approach-00001".into();
        assert!(b.validate().is_err(), "prefix must match section");
        assert_eq!(bullet_id("guard_avoidance", 1), "guard-avoidance-00001");
    }
}
