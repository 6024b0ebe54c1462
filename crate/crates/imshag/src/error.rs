use std::path::PathBuf;

use thiserror::Error;

use crate::model::Violation;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("model failed validation with {} violation(s):\n{}", .0.len(), format_violations(.0))]
    Validation(Vec<Violation>),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("unknown group `{0}`")]
    UnknownGroup(String),

    #[error("node `{node}` has no vulnerability `{cve}` in its attack tree")]
    UnknownVulnerability { node: String, cve: String },

    #[error("unknown threat `{0}` (expected one of S, T, R, I, D, E, or ALL)")]
    UnknownThreat(String),

    #[error("threat filter must name at least one category")]
    EmptyFilter,

    #[error("goal specification must name at least one target")]
    EmptyGoals,

    #[error("path enumeration for `{target}` exceeded the cap of {cap} paths")]
    PathLimitExceeded { target: String, cap: usize },

    #[error("goal combination search exceeded {limit} combinations")]
    CombinationLimit { limit: usize },

    #[error("record for {cve} carries no CVSS v3 metrics")]
    UnsupportedRecord { cve: String },

    #[error("malformed NVD record: {0}")]
    MalformedRecord(String),

    #[error("no STRIDE weights supplied for: {}", .0.join(", "))]
    MissingWeights(Vec<String>),

    #[error("NVD request for {cve} failed: {reason}")]
    Fetch { cve: String, reason: String },

    #[error("{cve} not found in the NVD")]
    CveNotFound { cve: String },

    #[error("chart input is invalid: {0}")]
    Chart(String),

    #[error("invalid value `{value}` for {what}: {reason}")]
    InvalidFlag {
        what: String,
        value: String,
        reason: String,
    },
}

impl Error {
    /// Process exit code convention: 2 for I/O and parse failures, 1 for
    /// everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Parse { .. } => 2,
            _ => 1,
        }
    }
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| format!("  - {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

pub type Result<T> = std::result::Result<T, Error>;
