//! Desk-scale laboratory for non-parametric policy improvement in a
//! Hill-frame Lady-Bandit-Guard pursuit-evasion game.
//!
//! The pieces, bottom to top:
//! - [`dynamics`]: seeded Clohessy-Wiltshire simulator with scripted guard
//!   adversaries (scenarios LG4-LG7);
//! - [`playbook`]: the evolving policy object — condition-guarded
//!   natural-language rules with versioning and curator ops;
//! - [`policy`]: action selection — the two-call LLM agent (real HTTP or
//!   deterministic mocks), a scripted playbook follower, LQR and prograde
//!   baselines;
//! - [`scoring`]: the composite interception score and statistics;
//! - [`evolution`]: ε-biased reflection, rule mining, curation, and UCB1
//!   version selection;
//! - [`harness`]: run/evolve/replay/report entry points behind the CLI.

pub mod dynamics;
pub mod episode;
pub mod error;
pub mod evolution;
pub mod harness;
pub mod math;
pub mod playbook;
pub mod policy;
pub mod report;
pub mod scoring;
pub mod store;

pub use error::{Error, Result};
pub use math::Vec3;
