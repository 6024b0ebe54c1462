//! Defense actions (vulnerability patching, host isolation) and what-if
//! re-scoring of threat risk and success probability.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::metrics::{self, ThreatFilter};
use crate::model::{AttackTree, ChildRef, Gate, GateKind, GoalSpec, HagModel};

/// One deployable defense.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DefenseAction {
    /// Remove a vulnerability from a function's attack tree.
    Patch { node: String, cve: String },
    /// Remove every edge incident to a function; the node itself stays in
    /// the model so its node-level metrics remain reportable.
    Isolate { node: String },
}

impl DefenseAction {
    pub fn patch(node: impl Into<String>, cve: impl Into<String>) -> DefenseAction {
        DefenseAction::Patch {
            node: node.into(),
            cve: cve.into(),
        }
    }

    pub fn isolate(node: impl Into<String>) -> DefenseAction {
        DefenseAction::Isolate { node: node.into() }
    }

    /// The function the action touches (used for tie-breaking in rankings).
    pub fn node_name(&self) -> &str {
        match self {
            DefenseAction::Patch { node, .. } => node,
            DefenseAction::Isolate { node } => node,
        }
    }
}

impl fmt::Display for DefenseAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DefenseAction::Patch { node, cve } => write!(f, "patch {node}:{cve}"),
            DefenseAction::Isolate { node } => write!(f, "isolate {node}"),
        }
    }
}

/// Before/after comparison for one target under one filter.
#[derive(Debug, Clone, PartialEq)]
pub struct DefenseDiff {
    pub target: String,
    pub filter: ThreatFilter,
    pub before: f64,
    pub after: f64,
    pub prob_before: f64,
    pub prob_after: f64,
    pub applied: Vec<DefenseAction>,
}

/// Per-target threat filters with a shared default.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetFilters {
    pub default: ThreatFilter,
    pub overrides: BTreeMap<String, ThreatFilter>,
}

impl TargetFilters {
    pub fn uniform(filter: ThreatFilter) -> TargetFilters {
        TargetFilters {
            default: filter,
            overrides: BTreeMap::new(),
        }
    }

    pub fn with_override(mut self, target: impl Into<String>, filter: ThreatFilter) -> TargetFilters {
        self.overrides.insert(target.into(), filter);
        self
    }

    pub fn filter_for(&self, target: &str) -> &ThreatFilter {
        self.overrides.get(target).unwrap_or(&self.default)
    }
}

impl Default for TargetFilters {
    fn default() -> TargetFilters {
        TargetFilters::uniform(ThreatFilter::All)
    }
}

/// Apply one defense action, returning the changed model. The input model is
/// untouched.
///
/// Patching removes the vulnerability leaf and re-normalizes the tree: an
/// AND gate that loses any child is pruned entirely (the required step no
/// longer exists), an OR gate survives until it has no alternatives left. A
/// node whose tree empties out scores zero risk and zero probability.
pub fn apply_action(model: &HagModel, action: &DefenseAction) -> Result<HagModel> {
    let mut next = model.clone();
    match action {
        DefenseAction::Patch { node, cve } => {
            let function = next
                .nodes
                .iter_mut()
                .find(|n| n.name == *node)
                .ok_or_else(|| Error::UnknownNode(node.clone()))?;
            if !function.tree.contains_leaf(cve) {
                return Err(Error::UnknownVulnerability {
                    node: node.clone(),
                    cve: cve.clone(),
                });
            }
            function.tree = patched_tree(&function.tree, cve);
        }
        DefenseAction::Isolate { node } => {
            if next.node(node).is_none() {
                return Err(Error::UnknownNode(node.clone()));
            }
            next.edges
                .retain(|(from, to)| from != node && to != node);
        }
    }
    Ok(next)
}

/// Apply a sequence of actions in order.
pub fn apply_actions(model: &HagModel, actions: &[DefenseAction]) -> Result<HagModel> {
    let mut current = model.clone();
    for action in actions {
        current = apply_action(&current, action)?;
    }
    Ok(current)
}

fn patched_tree(tree: &AttackTree, cve: &str) -> AttackTree {
    // Rebuild the surviving fragment bottom-up. Returns None when the
    // subtree rooted at `gate_id` no longer represents a feasible attack.
    fn rebuild(
        tree: &AttackTree,
        gate_id: &str,
        cve: &str,
    ) -> Option<(Gate, BTreeMap<String, Gate>)> {
        let gate = &tree.gates[gate_id];
        let mut fragment = BTreeMap::new();
        let mut kept = Vec::new();
        let mut lost_child = false;
        for child in &gate.children {
            match child {
                ChildRef::Vuln(leaf) if leaf == cve => lost_child = true,
                ChildRef::Vuln(leaf) => kept.push(ChildRef::Vuln(leaf.clone())),
                ChildRef::Gate(sub) => match rebuild(tree, sub, cve) {
                    Some((sub_gate, sub_fragment)) => {
                        fragment.extend(sub_fragment);
                        fragment.insert(sub.clone(), sub_gate);
                        kept.push(ChildRef::Gate(sub.clone()));
                    }
                    None => lost_child = true,
                },
            }
        }
        let survives = match gate.kind {
            GateKind::And => !lost_child && !kept.is_empty(),
            GateKind::Or => !kept.is_empty(),
        };
        if survives {
            Some((
                Gate {
                    kind: gate.kind,
                    children: kept,
                },
                fragment,
            ))
        } else {
            None
        }
    }

    let Some(root) = &tree.root else {
        return tree.clone();
    };
    match rebuild(tree, root, cve) {
        Some((root_gate, mut gates)) => {
            gates.insert(root.clone(), root_gate);
            AttackTree {
                root: Some(root.clone()),
                gates,
                root_privilege: tree.root_privilege,
            }
        }
        None => AttackTree {
            root: None,
            gates: BTreeMap::new(),
            root_privilege: tree.root_privilege,
        },
    }
}

/// Apply the action list once and report per-target network-level risk and
/// probability before and after, each target under its own filter.
pub fn evaluate_defense(
    model: &HagModel,
    actions: &[DefenseAction],
    goals: &GoalSpec,
    filters: &TargetFilters,
) -> Result<Vec<DefenseDiff>> {
    if goals.targets.is_empty() {
        return Err(Error::EmptyGoals);
    }
    let defended = apply_actions(model, actions)?;
    let mut diffs = Vec::with_capacity(goals.targets.len());
    for target in &goals.targets {
        let filter = filters.filter_for(target);
        let before = metrics::network_threat_risk(model, target, filter)?;
        let after = metrics::network_threat_risk(&defended, target, filter)?;
        diffs.push(DefenseDiff {
            target: target.clone(),
            filter: filter.clone(),
            before: before.value,
            after: after.value,
            prob_before: metrics::network_success_prob(model, target)?,
            prob_after: metrics::network_success_prob(&defended, target)?,
            applied: actions.to_vec(),
        });
    }
    Ok(diffs)
}

/// A candidate action scored by how much network risk it removes.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedDefense {
    pub action: DefenseAction,
    pub risk_reduction: f64,
}

/// Order candidate actions by descending network-risk reduction summed over
/// the goal targets; ties break lexicographically by node name.
pub fn rank_defenses(
    model: &HagModel,
    candidates: &[DefenseAction],
    goals: &GoalSpec,
    filter: &ThreatFilter,
) -> Result<Vec<RankedDefense>> {
    let mut before_by_target = BTreeMap::new();
    for target in &goals.targets {
        before_by_target.insert(
            target.clone(),
            metrics::network_threat_risk(model, target, filter)?.value,
        );
    }

    let mut ranked = Vec::with_capacity(candidates.len());
    for candidate in candidates {
        let defended = apply_action(model, candidate)?;
        let mut reduction = 0.0;
        for target in &goals.targets {
            let after = metrics::network_threat_risk(&defended, target, filter)?.value;
            reduction += before_by_target[target] - after;
        }
        ranked.push(RankedDefense {
            action: candidate.clone(),
            risk_reduction: reduction,
        });
    }

    ranked.sort_by(|a, b| {
        b.risk_reduction
            .partial_cmp(&a.risk_reduction)
            .expect("finite reductions")
            .then_with(|| a.action.node_name().cmp(b.action.node_name()))
    });
    Ok(ranked)
}
