//! Risk and attack-success-probability metrics at node, path, network,
//! multi-goal, and subsystem levels.
//!
//! Conventions, fixed across the crate:
//! - leaf value: risk `p(v)·aim(v)`, probability `p(v) = es/10`;
//! - AND gates sum risk and multiply probability; OR gates take the max;
//! - node threat risk is the node risk times the sum of the filtered STRIDE
//!   weights over every vulnerability in its tree;
//! - path risk sums node threat risks in path order, entry included;
//! - path probability multiplies node probabilities, entry excluded (the
//!   attacker is assumed positioned at the entry point);
//! - network risk sums over all enumerated paths, network probability takes
//!   the max; sums always run in the enumerator's lexicographic path order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{
    AttackPath, AttackTree, ChildRef, FunctionNode, GateKind, GoalSpec, HagModel, StrideCategory,
    ThreatVector, VulnerabilityRecord,
};
use crate::pathfinder;

/// Cap on goal path combinations explored by [`multi_goal_success_prob`].
pub const GOAL_COMBINATION_LIMIT: usize = 1_000_000;

/// A subset of the six STRIDE categories, or all of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ThreatFilter {
    All,
    Subset(BTreeSet<StrideCategory>),
}

impl ThreatFilter {
    pub fn all() -> ThreatFilter {
        ThreatFilter::All
    }

    /// A non-empty subset filter.
    pub fn subset(categories: impl IntoIterator<Item = StrideCategory>) -> Result<ThreatFilter> {
        let set: BTreeSet<StrideCategory> = categories.into_iter().collect();
        if set.is_empty() {
            return Err(Error::EmptyFilter);
        }
        Ok(ThreatFilter::Subset(set))
    }

    pub fn single(category: StrideCategory) -> ThreatFilter {
        ThreatFilter::Subset(BTreeSet::from([category]))
    }

    pub fn contains(&self, category: StrideCategory) -> bool {
        match self {
            ThreatFilter::All => true,
            ThreatFilter::Subset(set) => set.contains(&category),
        }
    }

    /// Member categories in canonical S, T, R, I, D, E order.
    pub fn categories(&self) -> Vec<StrideCategory> {
        StrideCategory::ALL
            .into_iter()
            .filter(|c| self.contains(*c))
            .collect()
    }
}

impl fmt::Display for ThreatFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThreatFilter::All => write!(f, "ALL"),
            ThreatFilter::Subset(_) => {
                let letters: Vec<String> = self
                    .categories()
                    .iter()
                    .map(|c| c.letter().to_string())
                    .collect();
                write!(f, "{}", letters.join(","))
            }
        }
    }
}

impl FromStr for ThreatFilter {
    type Err = Error;

    /// Parse `"ALL"` or a comma-separated letter list such as `"S,T,E"`.
    fn from_str(s: &str) -> Result<ThreatFilter> {
        if s.trim().eq_ignore_ascii_case("all") {
            return Ok(ThreatFilter::All);
        }
        let mut set = BTreeSet::new();
        for part in s.split(',') {
            let part = part.trim();
            let mut chars = part.chars();
            match (chars.next(), chars.next()) {
                (Some(letter), None) => match StrideCategory::from_letter(letter) {
                    Some(category) => {
                        set.insert(category);
                    }
                    None => return Err(Error::UnknownThreat(part.to_string())),
                },
                _ => return Err(Error::UnknownThreat(part.to_string())),
            }
        }
        if set.is_empty() {
            return Err(Error::EmptyFilter);
        }
        Ok(ThreatFilter::Subset(set))
    }
}

/// Assessment granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Node,
    Path,
    Network,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Node => write!(f, "node"),
            Level::Path => write!(f, "path"),
            Level::Network => write!(f, "network"),
        }
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Level> {
        match s.to_ascii_lowercase().as_str() {
            "node" => Ok(Level::Node),
            "path" => Ok(Level::Path),
            "network" => Ok(Level::Network),
            other => Err(Error::InvalidFlag {
                what: "level".to_string(),
                value: other.to_string(),
                reason: "expected node, path, or network".to_string(),
            }),
        }
    }
}

/// Attack-success probability of a single vulnerability: the exploitability
/// subscore normalized to [0,1].
pub fn vuln_prob(record: &VulnerabilityRecord) -> f64 {
    record.es / 10.0
}

fn leaf_record<'a>(
    catalogue: &'a BTreeMap<String, VulnerabilityRecord>,
    cve: &str,
) -> &'a VulnerabilityRecord {
    catalogue
        .get(cve)
        .unwrap_or_else(|| panic!("vulnerability {cve} missing from catalogue; model not validated"))
}

/// Root risk of an attack tree: leaves score `p(v)·aim(v)`, AND gates sum,
/// OR gates take the max. An empty tree scores 0.
pub fn tree_risk(tree: &AttackTree, catalogue: &BTreeMap<String, VulnerabilityRecord>) -> f64 {
    fn gate_risk(
        gate_id: &str,
        tree: &AttackTree,
        catalogue: &BTreeMap<String, VulnerabilityRecord>,
    ) -> f64 {
        let gate = &tree.gates[gate_id];
        let child = |c: &ChildRef| match c {
            ChildRef::Vuln(cve) => {
                let record = leaf_record(catalogue, cve);
                vuln_prob(record) * record.aim
            }
            ChildRef::Gate(sub) => gate_risk(sub, tree, catalogue),
        };
        match gate.kind {
            GateKind::And => gate.children.iter().map(child).sum(),
            GateKind::Or => gate.children.iter().map(child).fold(0.0, f64::max),
        }
    }

    match &tree.root {
        Some(root) => gate_risk(root, tree, catalogue),
        None => 0.0,
    }
}

/// Attack-success probability of a node's tree: leaves score `p(v)`, AND
/// gates multiply, OR gates take the max. An empty tree scores 0.
pub fn tree_prob(tree: &AttackTree, catalogue: &BTreeMap<String, VulnerabilityRecord>) -> f64 {
    fn gate_prob(
        gate_id: &str,
        tree: &AttackTree,
        catalogue: &BTreeMap<String, VulnerabilityRecord>,
    ) -> f64 {
        let gate = &tree.gates[gate_id];
        let child = |c: &ChildRef| match c {
            ChildRef::Vuln(cve) => vuln_prob(leaf_record(catalogue, cve)),
            ChildRef::Gate(sub) => gate_prob(sub, tree, catalogue),
        };
        match gate.kind {
            GateKind::And => gate.children.iter().map(child).product(),
            GateKind::Or => gate.children.iter().map(child).fold(0.0, f64::max),
        }
    }

    match &tree.root {
        Some(root) => gate_prob(root, tree, catalogue),
        None => 0.0,
    }
}

/// Sum of the filtered STRIDE weights over every vulnerability in the tree,
/// leaves in preorder and categories in canonical order.
fn filtered_weight_sum(
    tree: &AttackTree,
    filter: &ThreatFilter,
    catalogue: &BTreeMap<String, VulnerabilityRecord>,
) -> f64 {
    let mut sum = 0.0;
    for cve in tree.leaf_cves() {
        let record = leaf_record(catalogue, cve);
        for category in StrideCategory::ALL {
            if filter.contains(category) {
                sum += record.stride.get(category);
            }
        }
    }
    sum
}

/// Threat-specific risk of one node: its tree risk times the summed filtered
/// weights of all its vulnerabilities.
pub fn node_threat_risk(
    node: &FunctionNode,
    filter: &ThreatFilter,
    catalogue: &BTreeMap<String, VulnerabilityRecord>,
) -> f64 {
    tree_risk(&node.tree, catalogue) * filtered_weight_sum(&node.tree, filter, catalogue)
}

/// Per-category threat risk of one node.
pub fn node_threat_vector(
    node: &FunctionNode,
    catalogue: &BTreeMap<String, VulnerabilityRecord>,
) -> ThreatVector {
    let risk = tree_risk(&node.tree, catalogue);
    let mut vector = ThreatVector::zero();
    for category in StrideCategory::ALL {
        let weight_sum: f64 = node
            .tree
            .leaf_cves()
            .iter()
            .map(|cve| leaf_record(catalogue, cve).stride.get(category))
            .sum();
        vector.set(category, risk * weight_sum);
    }
    vector
}

fn path_node<'a>(model: &'a HagModel, name: &str) -> &'a FunctionNode {
    model
        .node(name)
        .unwrap_or_else(|| panic!("path references unknown node {name}"))
}

/// Threat-specific risk of an attack path: the sum of node threat risks over
/// every node on the path, entry included.
pub fn path_threat_risk(path: &AttackPath, filter: &ThreatFilter, model: &HagModel) -> f64 {
    path.node_names
        .iter()
        .map(|name| node_threat_risk(path_node(model, name), filter, &model.vuln_catalogue))
        .sum()
}

/// Success probability of an attack path: the product of node probabilities
/// over every node after the entry. A length-1 path has probability 1.
pub fn path_success_prob(path: &AttackPath, model: &HagModel) -> f64 {
    path.node_names
        .iter()
        .skip(1)
        .map(|name| tree_prob(&path_node(model, name).tree, &model.vuln_catalogue))
        .product()
}

/// Network-level threat risk result. `unreachable` flags a target with no
/// attack path; its risk is 0 but that is a property of the topology, not of
/// the node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkRisk {
    pub value: f64,
    pub path_count: usize,
    pub unreachable: bool,
}

/// Network-level threat risk: the sum of path threat risks over all
/// enumerated paths to the target.
pub fn network_threat_risk(
    model: &HagModel,
    target: &str,
    filter: &ThreatFilter,
) -> Result<NetworkRisk> {
    let paths = pathfinder::enumerate_paths(model, target)?;
    Ok(network_threat_risk_over(&paths, filter, model))
}

/// [`network_threat_risk`] over an already-enumerated path set.
pub fn network_threat_risk_over(
    paths: &[AttackPath],
    filter: &ThreatFilter,
    model: &HagModel,
) -> NetworkRisk {
    NetworkRisk {
        value: paths
            .iter()
            .map(|path| path_threat_risk(path, filter, model))
            .sum(),
        path_count: paths.len(),
        unreachable: paths.is_empty(),
    }
}

/// Network-level success probability: the maximum path success probability
/// over all paths to the target, 0 if unreachable.
pub fn network_success_prob(model: &HagModel, target: &str) -> Result<f64> {
    let paths = pathfinder::enumerate_paths(model, target)?;
    Ok(network_success_prob_over(&paths, model))
}

/// [`network_success_prob`] over an already-enumerated path set.
pub fn network_success_prob_over(paths: &[AttackPath], model: &HagModel) -> f64 {
    paths
        .iter()
        .map(|path| path_success_prob(path, model))
        .fold(0.0, f64::max)
}

/// What a goal's per-target value `tg` means when composing multiple goals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GoalRiskBasis {
    /// The goal node's own threat risk (default; reproduces the multi-goal
    /// sweep figures).
    #[default]
    Node,
    /// The maximum path threat risk over the goal's attack paths.
    Path,
}

/// Threat risk of a multi-goal specification: per-goal values composed with
/// max (OR) or sum (AND), node basis.
pub fn multi_goal_threat_risk(
    model: &HagModel,
    goals: &GoalSpec,
    filter: &ThreatFilter,
) -> Result<f64> {
    multi_goal_threat_risk_with(model, goals, filter, GoalRiskBasis::Node)
}

/// [`multi_goal_threat_risk`] with an explicit per-goal basis.
pub fn multi_goal_threat_risk_with(
    model: &HagModel,
    goals: &GoalSpec,
    filter: &ThreatFilter,
    basis: GoalRiskBasis,
) -> Result<f64> {
    if goals.targets.is_empty() {
        return Err(Error::EmptyGoals);
    }
    let mut values = Vec::with_capacity(goals.targets.len());
    for target in &goals.targets {
        let node = model
            .node(target)
            .ok_or_else(|| Error::UnknownNode(target.clone()))?;
        let value = match basis {
            GoalRiskBasis::Node => node_threat_risk(node, filter, &model.vuln_catalogue),
            GoalRiskBasis::Path => {
                let paths = pathfinder::enumerate_paths(model, target)?;
                paths
                    .iter()
                    .map(|p| path_threat_risk(p, filter, model))
                    .fold(0.0, f64::max)
            }
        };
        values.push(value);
    }
    Ok(match goals.condition {
        GateKind::And => values.iter().sum(),
        GateKind::Or => values.iter().copied().fold(0.0, f64::max),
    })
}

/// Success probability of a multi-goal specification.
///
/// AND: the best path combination covering every goal, multiplying node
/// probabilities over the union of distinct non-entry nodes (shared prefixes
/// count once). OR: the best single goal's network-level probability.
pub fn multi_goal_success_prob(model: &HagModel, goals: &GoalSpec) -> Result<f64> {
    if goals.targets.is_empty() {
        return Err(Error::EmptyGoals);
    }
    let per_target = pathfinder::covering_paths(model, goals)?;

    if goals.condition == GateKind::Or || goals.targets.len() == 1 {
        let mut best: f64 = 0.0;
        for target in &goals.targets {
            best = best.max(network_success_prob_over(&per_target[target], model));
        }
        return Ok(best);
    }

    // AND: every goal must be covered by some chosen path.
    let lists: Vec<&Vec<AttackPath>> = goals.targets.iter().map(|t| &per_target[t]).collect();
    if lists.iter().any(|l| l.is_empty()) {
        return Ok(0.0);
    }

    let probs: BTreeMap<&str, f64> = model
        .nodes
        .iter()
        .map(|n| (n.name.as_str(), tree_prob(&n.tree, &model.vuln_catalogue)))
        .collect();

    fn explore(
        lists: &[&Vec<AttackPath>],
        idx: usize,
        union: &mut BTreeSet<String>,
        probs: &BTreeMap<&str, f64>,
        combos: &mut usize,
        best: &mut f64,
    ) -> Result<()> {
        if idx == lists.len() {
            *combos += 1;
            if *combos > GOAL_COMBINATION_LIMIT {
                return Err(Error::CombinationLimit {
                    limit: GOAL_COMBINATION_LIMIT,
                });
            }
            let product: f64 = union.iter().map(|name| probs[name.as_str()]).product();
            if product > *best {
                *best = product;
            }
            return Ok(());
        }
        for path in lists[idx] {
            let added: Vec<&String> = path.node_names[1..]
                .iter()
                .filter(|name| union.insert((*name).clone()))
                .collect();
            let added: Vec<String> = added.into_iter().cloned().collect();
            explore(lists, idx + 1, union, probs, combos, best)?;
            for name in added {
                union.remove(&name);
            }
        }
        Ok(())
    }

    let mut best = 0.0;
    let mut combos = 0;
    let mut union = BTreeSet::new();
    explore(&lists, 0, &mut union, &probs, &mut combos, &mut best)?;
    Ok(best)
}

/// Threat risk of a configured subsystem group: the sum of node threat risks
/// over its members (node level, no path context).
pub fn subsystem_threat_risk(model: &HagModel, group: &str, filter: &ThreatFilter) -> Result<f64> {
    let members = model.lookup_group(group)?;
    Ok(members
        .iter()
        .map(|node| node_threat_risk(node, filter, &model.vuln_catalogue))
        .sum())
}

/// Per-category threat risk of a configured subsystem group.
pub fn subsystem_threat_vector(model: &HagModel, group: &str) -> Result<ThreatVector> {
    let members = model.lookup_group(group)?;
    let mut vector = ThreatVector::zero();
    for node in members {
        vector += node_threat_vector(node, &model.vuln_catalogue);
    }
    Ok(vector)
}

/// Per-target assessment values at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct AssessmentRow {
    pub target: String,
    pub risk: f64,
    pub prob: f64,
    pub path_count: usize,
    pub unreachable: bool,
    /// Risk broken down by STRIDE category at the same level.
    pub per_threat: ThreatVector,
}

/// Combined value for a multi-goal specification.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedGoal {
    pub condition: GateKind,
    pub risk: f64,
    pub prob: f64,
}

/// Deterministic result bundle for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct Assessment {
    pub level: Level,
    pub filter: ThreatFilter,
    pub rows: Vec<AssessmentRow>,
    /// Present when more than one goal is assessed.
    pub combined: Option<CombinedGoal>,
}

/// Facade over the level metrics: per-goal risk, success probability, path
/// counts, and a per-threat breakdown, plus the combined multi-goal value.
pub fn assess(
    model: &HagModel,
    goals: &GoalSpec,
    filter: &ThreatFilter,
    level: Level,
) -> Result<Assessment> {
    if goals.targets.is_empty() {
        return Err(Error::EmptyGoals);
    }
    let mut rows = Vec::with_capacity(goals.targets.len());
    for target in &goals.targets {
        let node = model
            .node(target)
            .ok_or_else(|| Error::UnknownNode(target.clone()))?;
        let paths = pathfinder::enumerate_paths(model, target)?;

        let risk_at = |f: &ThreatFilter| match level {
            Level::Node => node_threat_risk(node, f, &model.vuln_catalogue),
            Level::Path => paths
                .iter()
                .map(|p| path_threat_risk(p, f, model))
                .fold(0.0, f64::max),
            Level::Network => network_threat_risk_over(&paths, f, model).value,
        };

        let prob = match level {
            Level::Node => tree_prob(&node.tree, &model.vuln_catalogue),
            Level::Path | Level::Network => network_success_prob_over(&paths, model),
        };

        let mut per_threat = ThreatVector::zero();
        for category in StrideCategory::ALL {
            per_threat.set(category, risk_at(&ThreatFilter::single(category)));
        }

        rows.push(AssessmentRow {
            target: target.clone(),
            risk: risk_at(filter),
            prob,
            path_count: paths.len(),
            unreachable: paths.is_empty(),
            per_threat,
        });
    }

    let combined = if goals.targets.len() > 1 {
        Some(CombinedGoal {
            condition: goals.condition,
            risk: multi_goal_threat_risk(model, goals, filter)?,
            prob: multi_goal_success_prob(model, goals)?,
        })
    } else {
        None
    };

    Ok(Assessment {
        level,
        filter: filter.clone(),
        rows,
        combined,
    })
}
