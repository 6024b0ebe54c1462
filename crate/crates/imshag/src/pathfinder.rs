//! Exhaustive simple-path enumeration from entry points to goal targets over
//! the top-layer graph.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::{AttackPath, GoalSpec, HagModel};

/// Default cap on the number of enumerated paths per target. Exceeding the
/// cap is an explicit error, never silent truncation: network-level metrics
/// sum over the full path set and a truncated sum would be wrong.
pub const DEFAULT_PATH_CAP: usize = 10_000;

/// All simple directed paths from every entry node to `target`, sorted
/// lexicographically by node-name sequence. An unreachable target yields an
/// empty list.
pub fn enumerate_paths(model: &HagModel, target: &str) -> Result<Vec<AttackPath>> {
    enumerate_paths_with_cap(model, target, DEFAULT_PATH_CAP)
}

/// [`enumerate_paths`] with an explicit path cap.
pub fn enumerate_paths_with_cap(
    model: &HagModel,
    target: &str,
    cap: usize,
) -> Result<Vec<AttackPath>> {
    if model.node(target).is_none() {
        return Err(Error::UnknownNode(target.to_string()));
    }

    let adjacency = adjacency(model);
    let mut paths: Vec<Vec<String>> = Vec::new();

    for entry in model.entry_nodes() {
        let mut current = vec![entry.name.clone()];
        let mut visited: BTreeSet<&str> = BTreeSet::new();
        visited.insert(&entry.name);
        dfs(
            &entry.name,
            target,
            &adjacency,
            &mut current,
            &mut visited,
            &mut paths,
            cap,
        )
        .map_err(|()| Error::PathLimitExceeded {
            target: target.to_string(),
            cap,
        })?;
    }

    paths.sort();
    Ok(paths.into_iter().map(AttackPath::new).collect())
}

/// Per-target path lists for every goal target.
pub fn covering_paths(
    model: &HagModel,
    goals: &GoalSpec,
) -> Result<BTreeMap<String, Vec<AttackPath>>> {
    if goals.targets.is_empty() {
        return Err(Error::EmptyGoals);
    }
    let mut out = BTreeMap::new();
    for target in &goals.targets {
        out.insert(target.clone(), enumerate_paths(model, target)?);
    }
    Ok(out)
}

fn adjacency(model: &HagModel) -> BTreeMap<&str, Vec<&str>> {
    let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (from, to) in &model.edges {
        adjacency.entry(from.as_str()).or_default().push(to.as_str());
    }
    // BTreeSet edge order already leaves each neighbor list sorted.
    adjacency
}

fn dfs<'a>(
    current: &'a str,
    target: &str,
    adjacency: &BTreeMap<&'a str, Vec<&'a str>>,
    path: &mut Vec<String>,
    visited: &mut BTreeSet<&'a str>,
    paths: &mut Vec<Vec<String>>,
    cap: usize,
) -> std::result::Result<(), ()> {
    if current == target {
        if paths.len() >= cap {
            return Err(());
        }
        paths.push(path.clone());
        return Ok(());
    }
    let Some(neighbors) = adjacency.get(current) else {
        return Ok(());
    };
    for &next in neighbors {
        if visited.contains(next) {
            continue;
        }
        visited.insert(next);
        path.push(next.to_string());
        dfs(next, target, adjacency, path, visited, paths, cap)?;
        path.pop();
        visited.remove(next);
    }
    Ok(())
}
