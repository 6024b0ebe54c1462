//! Two-layer hierarchical attack modeling and STRIDE threat-specific risk
//! assessment for IMS core networks.
//!
//! The model keeps the network topology (functions, connections, entry
//! points, goals) in a top layer and a per-function AND/OR attack tree over
//! catalogued vulnerabilities in a lower layer. On top of it the crate
//! computes attack-success probability and per-threat risk at node, attack
//! path, network, multi-goal, and subsystem levels, and re-scores everything
//! under what-if defenses (vulnerability patching, host isolation).
//!
//! Models are immutable once built; every metric is a pure function, so
//! shared references can be assessed from many threads at once.
//!
//! ## Quick start
//!
//! ```no_run
//! use imshag::{ingest, metrics, metrics::ThreatFilter};
//!
//! let model = ingest::load_scenario("scenarios/ims-core.json")?;
//! let risk = metrics::network_threat_risk(&model, "SIP-AS", &ThreatFilter::All)?;
//! println!("network-level risk for SIP-AS: {:.2}", risk.value);
//! # Ok::<(), imshag::Error>(())
//! ```
//!
//! ## Runnable examples
//!
//! Each major capability has one example (all run against the shipped
//! `scenarios/ims-core.json`):
//!
//! - **`validate_scenario`** — structural validation report
//! - **`enumerate_paths`** — attack paths to a goal with risk/probability
//! - **`multi_goal_sweep`** — risk growth vs. probability decay as goals stack up
//! - **`threat_levels`** — node/path/network values for one goal, per threat subset
//! - **`subsystem_threats`** — per-threat risk of a configured group
//! - **`defense_whatif`** — before/after re-scoring under patches and isolation
//! - **`export_chart`** — deterministic SVG bar chart emission
//! - **`ingest_nvd`** — NVD record parsing and weight merging
//!
//! ```bash
//! cargo run -p imshag --example multi_goal_sweep
//! cargo run -p imshag --example defense_whatif
//! ```
//!
//! The same functionality is scriptable through the `imshag` binary
//! (`validate`, `assess`, `paths`, `group`, `defense`, `ingest`).

pub mod cli;
pub mod defense;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod pathfinder;
pub mod report;

pub use error::{Error, Result};
pub use model::{
    AttackPath, AttackTree, FunctionNode, GateKind, GoalSpec, HagModel, StrideCategory,
    StrideWeights, ThreatVector, VulnerabilityRecord,
};
