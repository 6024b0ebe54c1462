//! Shared helpers for integration tests: the canonical scenario path,
//! independent brute-force oracles, and randomized model generators.
//!
//! The oracles re-derive every quantity from scratch (separate tree walk,
//! separate path search) so they stay independent of the implementation
//! paths they check.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use proptest::prelude::*;

use imshag::metrics::ThreatFilter;
use imshag::model::{
    AttackTree, ChildRef, FunctionNode, Gate, GateKind, GoalSpec, HagModel, StrideCategory,
    StrideWeights, VulnerabilityRecord,
};

pub fn canonical_scenario_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/ims-core.json")
}

pub fn nvd_fixture_path(cve: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("fixtures/nvd/{cve}.json"))
}

pub fn load_canonical() -> HagModel {
    imshag::ingest::load_scenario(canonical_scenario_path()).expect("canonical scenario loads")
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

/// Brute-force simple-path search: scans the raw edge set at every step
/// instead of building an adjacency index.
pub fn oracle_paths(model: &HagModel, target: &str) -> Vec<Vec<String>> {
    fn extend(
        model: &HagModel,
        target: &str,
        walked: &mut Vec<String>,
        found: &mut Vec<Vec<String>>,
    ) {
        let here = walked.last().expect("non-empty walk").clone();
        if here == target {
            found.push(walked.clone());
            return;
        }
        for (from, to) in &model.edges {
            if *from == here && !walked.contains(to) {
                walked.push(to.clone());
                extend(model, target, walked, found);
                walked.pop();
            }
        }
    }

    let mut found = Vec::new();
    let mut entry_names: Vec<String> = model
        .nodes
        .iter()
        .filter(|n| n.is_entry)
        .map(|n| n.name.clone())
        .collect();
    entry_names.sort();
    for entry in entry_names {
        let mut walked = vec![entry];
        extend(model, target, &mut walked, &mut found);
    }
    found.sort();
    found
}

/// Independent attack-tree risk evaluation.
pub fn oracle_tree_risk(tree: &AttackTree, catalogue: &BTreeMap<String, VulnerabilityRecord>) -> f64 {
    fn eval(
        tree: &AttackTree,
        catalogue: &BTreeMap<String, VulnerabilityRecord>,
        gate_id: &str,
    ) -> f64 {
        let gate = &tree.gates[gate_id];
        match gate.kind {
            GateKind::And => {
                let mut total = 0.0;
                for child in &gate.children {
                    total += match child {
                        ChildRef::Vuln(cve) => {
                            let rec = &catalogue[cve];
                            (rec.es / 10.0) * rec.aim
                        }
                        ChildRef::Gate(sub) => eval(tree, catalogue, sub),
                    };
                }
                total
            }
            GateKind::Or => {
                let mut best = 0.0f64;
                for child in &gate.children {
                    let value = match child {
                        ChildRef::Vuln(cve) => {
                            let rec = &catalogue[cve];
                            (rec.es / 10.0) * rec.aim
                        }
                        ChildRef::Gate(sub) => eval(tree, catalogue, sub),
                    };
                    best = best.max(value);
                }
                best
            }
        }
    }

    match &tree.root {
        Some(root) => eval(tree, catalogue, root),
        None => 0.0,
    }
}

fn oracle_leaves<'a>(tree: &'a AttackTree, gate_id: &'a str, out: &mut Vec<&'a str>) {
    for child in &tree.gates[gate_id].children {
        match child {
            ChildRef::Vuln(cve) => out.push(cve),
            ChildRef::Gate(sub) => oracle_leaves(tree, sub, out),
        }
    }
}

/// Independent node threat risk: re-derives the tree risk and the filtered
/// weight sum with the same summation order as the implementation.
pub fn oracle_node_threat_risk(
    node: &FunctionNode,
    filter: &ThreatFilter,
    catalogue: &BTreeMap<String, VulnerabilityRecord>,
) -> f64 {
    let mut leaves = Vec::new();
    if let Some(root) = &node.tree.root {
        oracle_leaves(&node.tree, root, &mut leaves);
    }
    let mut weight_sum = 0.0;
    for cve in leaves {
        let record = &catalogue[cve];
        for category in StrideCategory::ALL {
            if filter.contains(category) {
                weight_sum += record.stride.get(category);
            }
        }
    }
    oracle_tree_risk(&node.tree, catalogue) * weight_sum
}

/// Independent network threat risk: enumerate all simple paths with the
/// brute-force search, then sum per-node values path by path.
pub fn oracle_network_threat_risk(model: &HagModel, target: &str, filter: &ThreatFilter) -> f64 {
    let mut total = 0.0;
    for path in oracle_paths(model, target) {
        let mut along = 0.0;
        for name in &path {
            let node = model.node(name).expect("path node exists");
            along += oracle_node_threat_risk(node, filter, &model.vuln_catalogue);
        }
        total += along;
    }
    total
}

// ---------------------------------------------------------------------------
// Randomized model generation
//
// Scores and weights are dyadic rationals (weights n/64 summing to exactly
// 1, aim/es multiples of 5/128) so every product and sum in the metrics
// pipeline is exact in f64 and "exact" equality properties are meaningful.
// ---------------------------------------------------------------------------

pub fn arb_weights() -> impl Strategy<Value = StrideWeights> {
    prop::collection::vec(0u32..=64, 5).prop_map(|mut cuts| {
        cuts.sort_unstable();
        let parts = [
            cuts[0],
            cuts[1] - cuts[0],
            cuts[2] - cuts[1],
            cuts[3] - cuts[2],
            cuts[4] - cuts[3],
            64 - cuts[4],
        ];
        let w = |i: usize| parts[i] as f64 / 64.0;
        StrideWeights::new(w(0), w(1), w(2), w(3), w(4), w(5))
    })
}

/// aim and es as multiples of 5/128 in [0, 10]; es/10 is then exact in f64.
pub fn arb_record(index: usize) -> impl Strategy<Value = VulnerabilityRecord> {
    (0u32..=256, 0u32..=256, arb_weights()).prop_map(move |(aim_k, es_k, stride)| {
        VulnerabilityRecord {
            cve_id: format!("CVE-2020-{:04}", 1000 + index),
            aim: aim_k as f64 * (5.0 / 128.0),
            es: es_k as f64 * (5.0 / 128.0),
            stride,
            description: String::new(),
        }
    })
}

#[derive(Debug, Clone)]
pub struct TreeShape {
    pub kind_root: GateKind,
    pub kind_sub: GateKind,
    pub shape: u8,
    pub leaf_picks: Vec<usize>,
}

pub fn arb_tree_shape() -> impl Strategy<Value = TreeShape> {
    (
        prop::bool::ANY,
        prop::bool::ANY,
        0u8..4,
        prop::collection::vec(0usize..16, 4),
    )
        .prop_map(|(root_and, sub_and, shape, leaf_picks)| TreeShape {
            kind_root: if root_and { GateKind::And } else { GateKind::Or },
            kind_sub: if sub_and { GateKind::And } else { GateKind::Or },
            shape,
            leaf_picks,
        })
}

pub fn build_tree(shape: &TreeShape, cve_ids: &[String]) -> AttackTree {
    let pick = |i: usize| cve_ids[shape.leaf_picks[i] % cve_ids.len()].clone();
    let mut gates = BTreeMap::new();
    match shape.shape {
        // single leaf
        0 => {
            gates.insert(
                "g0".to_string(),
                Gate {
                    kind: shape.kind_root,
                    children: vec![ChildRef::Vuln(pick(0))],
                },
            );
        }
        // flat gate over two leaves
        1 => {
            gates.insert(
                "g0".to_string(),
                Gate {
                    kind: shape.kind_root,
                    children: vec![ChildRef::Vuln(pick(0)), ChildRef::Vuln(pick(1))],
                },
            );
        }
        // flat gate over three leaves
        2 => {
            gates.insert(
                "g0".to_string(),
                Gate {
                    kind: shape.kind_root,
                    children: vec![
                        ChildRef::Vuln(pick(0)),
                        ChildRef::Vuln(pick(1)),
                        ChildRef::Vuln(pick(2)),
                    ],
                },
            );
        }
        // leaf plus a two-leaf subgate
        _ => {
            gates.insert(
                "g1".to_string(),
                Gate {
                    kind: shape.kind_sub,
                    children: vec![ChildRef::Vuln(pick(1)), ChildRef::Vuln(pick(2))],
                },
            );
            gates.insert(
                "g0".to_string(),
                Gate {
                    kind: shape.kind_root,
                    children: vec![ChildRef::Vuln(pick(0)), ChildRef::Gate("g1".to_string())],
                },
            );
        }
    }
    AttackTree {
        root: Some("g0".to_string()),
        gates,
        root_privilege: Default::default(),
    }
}

#[derive(Debug, Clone)]
pub struct ModelBlueprint {
    pub node_count: usize,
    pub records: Vec<VulnerabilityRecord>,
    pub tree_shapes: Vec<TreeShape>,
    pub entry_flags: Vec<bool>,
    pub edge_flags: Vec<bool>,
}

pub fn arb_blueprint(
    max_nodes: usize,
    edge_density: f64,
) -> impl Strategy<Value = ModelBlueprint> {
    (2..=max_nodes).prop_flat_map(move |node_count| {
        let records = (1usize..=4).prop_flat_map(|k| {
            (0..k)
                .map(arb_record)
                .collect::<Vec<_>>()
        });
        (
            Just(node_count),
            records,
            prop::collection::vec(arb_tree_shape(), node_count),
            prop::collection::vec(prop::bool::ANY, node_count),
            prop::collection::vec(prop::bool::weighted(edge_density), node_count * node_count),
        )
            .prop_map(
                |(node_count, records, tree_shapes, entry_flags, edge_flags)| ModelBlueprint {
                    node_count,
                    records,
                    tree_shapes,
                    entry_flags,
                    edge_flags,
                },
            )
    })
}

pub fn build_model(blueprint: &ModelBlueprint) -> HagModel {
    let cve_ids: Vec<String> = blueprint.records.iter().map(|r| r.cve_id.clone()).collect();
    let mut nodes = Vec::with_capacity(blueprint.node_count);
    for i in 0..blueprint.node_count {
        nodes.push(FunctionNode {
            name: format!("n{i}"),
            ip: format!("10.0.0.{}", i + 1),
            subnet: "test".to_string(),
            // Node 0 is always an entry so every model has one.
            is_entry: i == 0 || blueprint.entry_flags[i],
            tree: build_tree(&blueprint.tree_shapes[i], &cve_ids),
        });
    }
    let mut edges = BTreeSet::new();
    for i in 0..blueprint.node_count {
        for j in 0..blueprint.node_count {
            if i != j && blueprint.edge_flags[i * blueprint.node_count + j] {
                edges.insert((format!("n{i}"), format!("n{j}")));
            }
        }
    }
    HagModel {
        nodes,
        edges,
        goals: GoalSpec::single("n0"),
        vuln_catalogue: blueprint
            .records
            .iter()
            .map(|r| (r.cve_id.clone(), r.clone()))
            .collect(),
        groups: BTreeMap::new(),
    }
}

/// A random non-empty subset of the STRIDE categories as a filter.
pub fn arb_filter() -> impl Strategy<Value = ThreatFilter> {
    prop::collection::vec(prop::bool::ANY, 6).prop_map(|flags| {
        let picked: Vec<StrideCategory> = StrideCategory::ALL
            .into_iter()
            .zip(&flags)
            .filter(|(_, keep)| **keep)
            .map(|(c, _)| c)
            .collect();
        if picked.is_empty() {
            ThreatFilter::All
        } else {
            ThreatFilter::subset(picked).expect("non-empty")
        }
    })
}
