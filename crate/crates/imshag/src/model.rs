//! Domain types for the two-layer attack model: a top-layer topology graph of
//! network functions and, per function, a lower-layer AND/OR attack tree over
//! catalogued vulnerabilities. Includes structural validation for the whole
//! model.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, AddAssign, Mul};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the weights-sum-to-one rule.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-6;

/// The six STRIDE threat categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StrideCategory {
    Spoofing,
    Tampering,
    Repudiation,
    InformationDisclosure,
    DenialOfService,
    ElevationOfPrivilege,
}

impl StrideCategory {
    /// Canonical S, T, R, I, D, E order.
    pub const ALL: [StrideCategory; 6] = [
        StrideCategory::Spoofing,
        StrideCategory::Tampering,
        StrideCategory::Repudiation,
        StrideCategory::InformationDisclosure,
        StrideCategory::DenialOfService,
        StrideCategory::ElevationOfPrivilege,
    ];

    pub fn letter(self) -> char {
        match self {
            StrideCategory::Spoofing => 'S',
            StrideCategory::Tampering => 'T',
            StrideCategory::Repudiation => 'R',
            StrideCategory::InformationDisclosure => 'I',
            StrideCategory::DenialOfService => 'D',
            StrideCategory::ElevationOfPrivilege => 'E',
        }
    }

    pub fn from_letter(letter: char) -> Option<StrideCategory> {
        match letter.to_ascii_uppercase() {
            'S' => Some(StrideCategory::Spoofing),
            'T' => Some(StrideCategory::Tampering),
            'R' => Some(StrideCategory::Repudiation),
            'I' => Some(StrideCategory::InformationDisclosure),
            'D' => Some(StrideCategory::DenialOfService),
            'E' => Some(StrideCategory::ElevationOfPrivilege),
            _ => None,
        }
    }
}

impl fmt::Display for StrideCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Analyst weight bands for a single threat's impact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightBand {
    None,
    LowRisk,
    MediumRisk,
    HighRisk,
    Critical,
}

impl WeightBand {
    /// Classify a weight in [0,1] into its band.
    pub fn from_weight(weight: f64) -> WeightBand {
        if weight <= 0.0 {
            WeightBand::None
        } else if weight <= 0.30 {
            WeightBand::LowRisk
        } else if weight <= 0.50 {
            WeightBand::MediumRisk
        } else if weight <= 0.80 {
            WeightBand::HighRisk
        } else {
            WeightBand::Critical
        }
    }
}

impl fmt::Display for WeightBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            WeightBand::None => "none",
            WeightBand::LowRisk => "low risk",
            WeightBand::MediumRisk => "medium risk",
            WeightBand::HighRisk => "high risk",
            WeightBand::Critical => "critical",
        };
        write!(f, "{s}")
    }
}

/// Per-vulnerability STRIDE weight vector. Components are dimensionless
/// weights in [0,1] that must sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrideWeights {
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "E")]
    pub e: f64,
}

impl StrideWeights {
    pub fn new(s: f64, t: f64, r: f64, i: f64, d: f64, e: f64) -> StrideWeights {
        StrideWeights { s, t, r, i, d, e }
    }

    pub fn get(&self, category: StrideCategory) -> f64 {
        match category {
            StrideCategory::Spoofing => self.s,
            StrideCategory::Tampering => self.t,
            StrideCategory::Repudiation => self.r,
            StrideCategory::InformationDisclosure => self.i,
            StrideCategory::DenialOfService => self.d,
            StrideCategory::ElevationOfPrivilege => self.e,
        }
    }

    /// Sum of all six components in canonical order.
    pub fn sum(&self) -> f64 {
        self.s + self.t + self.r + self.i + self.d + self.e
    }

    /// Invariant check: components in [0,1], total exactly 1 within tolerance.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        for category in StrideCategory::ALL {
            let w = self.get(category);
            if !(0.0..=1.0).contains(&w) || !w.is_finite() {
                out.push(format!("weight for {category} is {w}, outside [0, 1]"));
            }
        }
        let sum = self.sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            out.push(format!("weights sum {sum} ≠ 1.0"));
        }
        out
    }
}

/// A catalogued vulnerability: CVSS v3 impact and exploitability subscores
/// plus the analyst's STRIDE weighting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VulnerabilityRecord {
    pub cve_id: String,
    /// CVSS v3 impact subscore in [0,10].
    pub aim: f64,
    /// CVSS v3 exploitability subscore in [0,10].
    pub es: f64,
    pub stride: StrideWeights,
    #[serde(default)]
    pub description: String,
}

fn cve_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^CVE-\d{4}-\d{4,}$").expect("static regex"))
}

/// Whether an identifier is a well-formed CVE id.
pub fn is_cve_id(id: &str) -> bool {
    cve_pattern().is_match(id)
}

/// Logical gate kinds for attack trees and goal composition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    And,
    Or,
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateKind::And => write!(f, "AND"),
            GateKind::Or => write!(f, "OR"),
        }
    }
}

/// Privilege granted at the tree root. Stored for completeness; no metric
/// consumes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Privilege {
    #[default]
    User,
    Admin,
}

/// A gate child: either another gate or a vulnerability leaf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChildRef {
    Gate(String),
    Vuln(String),
}

/// One logical gate combining vulnerabilities and sub-gates.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub children: Vec<ChildRef>,
}

/// Lower-layer AND/OR tree over a function's vulnerabilities.
///
/// An empty tree (no root) is the state of a fully patched function; it
/// scores zero risk and zero success probability.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackTree {
    pub root: Option<String>,
    pub gates: BTreeMap<String, Gate>,
    pub root_privilege: Privilege,
}

impl AttackTree {
    /// Tree holding a single vulnerability under an OR root.
    pub fn leaf(cve_id: impl Into<String>) -> AttackTree {
        let mut gates = BTreeMap::new();
        gates.insert(
            "g0".to_string(),
            Gate {
                kind: GateKind::Or,
                children: vec![ChildRef::Vuln(cve_id.into())],
            },
        );
        AttackTree {
            root: Some("g0".to_string()),
            gates,
            root_privilege: Privilege::User,
        }
    }

    /// Fully patched tree.
    pub fn empty() -> AttackTree {
        AttackTree {
            root: None,
            gates: BTreeMap::new(),
            root_privilege: Privilege::User,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    /// All vulnerability leaves reachable from the root, in preorder.
    pub fn leaf_cves(&self) -> Vec<&str> {
        fn collect<'a>(
            tree: &'a AttackTree,
            gate_id: &'a str,
            seen: &mut BTreeSet<&'a str>,
            out: &mut Vec<&'a str>,
        ) {
            if !seen.insert(gate_id) {
                return; // cycle guard; validation reports the defect itself
            }
            let Some(gate) = tree.gates.get(gate_id) else {
                return;
            };
            for child in &gate.children {
                match child {
                    ChildRef::Vuln(cve) => out.push(cve.as_str()),
                    ChildRef::Gate(sub) => collect(tree, sub, seen, out),
                }
            }
        }

        let mut out = Vec::new();
        if let Some(root) = &self.root {
            collect(self, root, &mut BTreeSet::new(), &mut out);
        }
        out
    }

    pub fn contains_leaf(&self, cve_id: &str) -> bool {
        self.leaf_cves().contains(&cve_id)
    }
}

/// A top-layer network function and its attack tree.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionNode {
    pub name: String,
    pub ip: String,
    pub subnet: String,
    pub is_entry: bool,
    pub tree: AttackTree,
}

/// Attack goal: one or more targets combined with a logical condition.
/// The condition is ignored for a single target.
#[derive(Debug, Clone, PartialEq)]
pub struct GoalSpec {
    pub targets: Vec<String>,
    pub condition: GateKind,
}

impl GoalSpec {
    pub fn single(target: impl Into<String>) -> GoalSpec {
        GoalSpec {
            targets: vec![target.into()],
            condition: GateKind::Or,
        }
    }

    pub fn new(condition: GateKind, targets: Vec<String>) -> GoalSpec {
        GoalSpec { targets, condition }
    }
}

/// The complete two-layer model.
#[derive(Debug, Clone, PartialEq)]
pub struct HagModel {
    /// Functions in declaration order.
    pub nodes: Vec<FunctionNode>,
    /// Directed connections between functions.
    pub edges: BTreeSet<(String, String)>,
    pub goals: GoalSpec,
    pub vuln_catalogue: BTreeMap<String, VulnerabilityRecord>,
    pub groups: BTreeMap<String, BTreeSet<String>>,
}

impl HagModel {
    pub fn node(&self, name: &str) -> Option<&FunctionNode> {
        self.nodes.iter().find(|n| n.name == name)
    }

    pub fn node_names(&self) -> Vec<&str> {
        self.nodes.iter().map(|n| n.name.as_str()).collect()
    }

    /// Entry points in name order.
    pub fn entry_nodes(&self) -> Vec<&FunctionNode> {
        let mut entries: Vec<&FunctionNode> = self.nodes.iter().filter(|n| n.is_entry).collect();
        entries.sort_by(|a, b| a.name.cmp(&b.name));
        entries
    }

    /// Outgoing neighbors of a node, sorted by name.
    pub fn successors(&self, name: &str) -> Vec<&str> {
        self.edges
            .iter()
            .filter(|(from, _)| from == name)
            .map(|(_, to)| to.as_str())
            .collect() // BTreeSet iteration keeps (from, to) pairs sorted
    }

    /// Members of a configured group, sorted by name.
    pub fn lookup_group(&self, group: &str) -> Result<Vec<&FunctionNode>> {
        let members = self
            .groups
            .get(group)
            .ok_or_else(|| Error::UnknownGroup(group.to_string()))?;
        Ok(members.iter().filter_map(|m| self.node(m)).collect())
    }
}

/// An ordered node sequence from an entry point to a goal target.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AttackPath {
    pub node_names: Vec<String>,
}

impl AttackPath {
    pub fn new(node_names: Vec<String>) -> AttackPath {
        AttackPath { node_names }
    }

    pub fn from_names<S: Into<String>>(names: impl IntoIterator<Item = S>) -> AttackPath {
        AttackPath {
            node_names: names.into_iter().map(Into::into).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.node_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_names.is_empty()
    }

    pub fn target(&self) -> Option<&str> {
        self.node_names.last().map(String::as_str)
    }
}

impl fmt::Display for AttackPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.node_names.join(" -> "))
    }
}

/// Per-category risk values; the unit of threat-specific assessment output.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThreatVector {
    pub s: f64,
    pub t: f64,
    pub r: f64,
    pub i: f64,
    pub d: f64,
    pub e: f64,
}

impl ThreatVector {
    pub fn zero() -> ThreatVector {
        ThreatVector::default()
    }

    pub fn get(&self, category: StrideCategory) -> f64 {
        match category {
            StrideCategory::Spoofing => self.s,
            StrideCategory::Tampering => self.t,
            StrideCategory::Repudiation => self.r,
            StrideCategory::InformationDisclosure => self.i,
            StrideCategory::DenialOfService => self.d,
            StrideCategory::ElevationOfPrivilege => self.e,
        }
    }

    pub fn set(&mut self, category: StrideCategory, value: f64) {
        match category {
            StrideCategory::Spoofing => self.s = value,
            StrideCategory::Tampering => self.t = value,
            StrideCategory::Repudiation => self.r = value,
            StrideCategory::InformationDisclosure => self.i = value,
            StrideCategory::DenialOfService => self.d = value,
            StrideCategory::ElevationOfPrivilege => self.e = value,
        }
    }

    /// Components paired with their category, canonical order.
    pub fn components(&self) -> [(StrideCategory, f64); 6] {
        [
            (StrideCategory::Spoofing, self.s),
            (StrideCategory::Tampering, self.t),
            (StrideCategory::Repudiation, self.r),
            (StrideCategory::InformationDisclosure, self.i),
            (StrideCategory::DenialOfService, self.d),
            (StrideCategory::ElevationOfPrivilege, self.e),
        ]
    }
}

impl Add for ThreatVector {
    type Output = ThreatVector;

    fn add(self, rhs: ThreatVector) -> ThreatVector {
        ThreatVector {
            s: self.s + rhs.s,
            t: self.t + rhs.t,
            r: self.r + rhs.r,
            i: self.i + rhs.i,
            d: self.d + rhs.d,
            e: self.e + rhs.e,
        }
    }
}

impl AddAssign for ThreatVector {
    fn add_assign(&mut self, rhs: ThreatVector) {
        *self = *self + rhs;
    }
}

impl Mul<f64> for ThreatVector {
    type Output = ThreatVector;

    fn mul(self, k: f64) -> ThreatVector {
        ThreatVector {
            s: self.s * k,
            t: self.t * k,
            r: self.r * k,
            i: self.i * k,
            d: self.d * k,
            e: self.e * k,
        }
    }
}

/// One structural invariant violation with its locus in the model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub locus: String,
    pub message: String,
}

impl Violation {
    fn new(locus: impl Into<String>, message: impl Into<String>) -> Violation {
        Violation {
            locus: locus.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.locus, self.message)
    }
}

/// Check every structural invariant of the model. An empty report means the
/// model is valid. Violations are data, not failures; the model is unchanged.
pub fn validate_model(model: &HagModel) -> Vec<Violation> {
    let mut out = Vec::new();

    // Node name uniqueness and at least one entry point.
    let mut seen = BTreeSet::new();
    for node in &model.nodes {
        if !seen.insert(node.name.as_str()) {
            out.push(Violation::new(
                format!("node {}", node.name),
                "duplicate node name",
            ));
        }
    }
    if !model.nodes.iter().any(|n| n.is_entry) {
        out.push(Violation::new("model", "no entry node defined"));
    }

    // Edges reference existing nodes; no self-loops.
    for (from, to) in &model.edges {
        if from == to {
            out.push(Violation::new(
                format!("edge ({from}, {to})"),
                format!("self-loop at {from}"),
            ));
        }
        for end in [from, to] {
            if model.node(end).is_none() {
                out.push(Violation::new(
                    format!("edge ({from}, {to})"),
                    format!("unknown node {end}"),
                ));
            }
        }
    }

    // Vulnerability catalogue entries.
    for (cve_id, record) in &model.vuln_catalogue {
        let locus = format!("cve {cve_id}");
        if !is_cve_id(cve_id) {
            out.push(Violation::new(&locus, "malformed CVE identifier"));
        }
        if record.cve_id != *cve_id {
            out.push(Violation::new(
                &locus,
                format!("catalogue key disagrees with record id {}", record.cve_id),
            ));
        }
        if !(0.0..=10.0).contains(&record.aim) || !record.aim.is_finite() {
            out.push(Violation::new(
                &locus,
                format!("impact score {} outside [0, 10]", record.aim),
            ));
        }
        if !(0.0..=10.0).contains(&record.es) || !record.es.is_finite() {
            out.push(Violation::new(
                &locus,
                format!("exploitability score {} outside [0, 10]", record.es),
            ));
        }
        for problem in record.stride.problems() {
            out.push(Violation::new(&locus, problem));
        }
    }

    // Per-node attack trees.
    for node in &model.nodes {
        tree_violations(node, &model.vuln_catalogue, &mut out);
    }

    // Goals.
    if model.goals.targets.is_empty() {
        out.push(Violation::new("goals", "no targets named"));
    }
    for target in &model.goals.targets {
        if model.node(target).is_none() {
            out.push(Violation::new("goals", format!("unknown target {target}")));
        }
    }

    // Groups.
    for (group, members) in &model.groups {
        for member in members {
            if model.node(member).is_none() {
                out.push(Violation::new(
                    format!("group {group}"),
                    format!("unknown member {member}"),
                ));
            }
        }
    }

    out
}

fn tree_violations(
    node: &FunctionNode,
    catalogue: &BTreeMap<String, VulnerabilityRecord>,
    out: &mut Vec<Violation>,
) {
    let locus = format!("node {}", node.name);
    let tree = &node.tree;

    let Some(root) = &tree.root else {
        if !tree.gates.is_empty() {
            out.push(Violation::new(&locus, "tree has gates but no root"));
        }
        return;
    };
    if !tree.gates.contains_key(root) {
        out.push(Violation::new(&locus, format!("root gate {root} missing")));
        return;
    }

    // Walk from the root: count gate parents, catch cycles, find leaves.
    let mut parent_count: BTreeMap<&str, usize> = BTreeMap::new();
    let mut on_stack: BTreeSet<&str> = BTreeSet::new();
    let mut visited: BTreeSet<&str> = BTreeSet::new();

    fn walk<'a>(
        gate_id: &'a str,
        tree: &'a AttackTree,
        catalogue: &BTreeMap<String, VulnerabilityRecord>,
        locus: &str,
        parent_count: &mut BTreeMap<&'a str, usize>,
        on_stack: &mut BTreeSet<&'a str>,
        visited: &mut BTreeSet<&'a str>,
        out: &mut Vec<Violation>,
    ) {
        let Some(gate) = tree.gates.get(gate_id) else {
            out.push(Violation::new(
                locus,
                format!("gate {gate_id} referenced but not defined"),
            ));
            return;
        };
        if on_stack.contains(gate_id) {
            out.push(Violation::new(locus, format!("cycle through gate {gate_id}")));
            return;
        }
        if !visited.insert(gate_id) {
            return;
        }
        on_stack.insert(gate_id);
        if gate.children.is_empty() {
            out.push(Violation::new(locus, format!("gate {gate_id} has no children")));
        }
        for child in &gate.children {
            match child {
                ChildRef::Vuln(cve) => {
                    if !catalogue.contains_key(cve) {
                        out.push(Violation::new(
                            locus,
                            format!("leaf {cve} not in the vulnerability catalogue"),
                        ));
                    }
                }
                ChildRef::Gate(sub) => {
                    *parent_count.entry(sub.as_str()).or_insert(0) += 1;
                    walk(sub, tree, catalogue, locus, parent_count, on_stack, visited, out);
                }
            }
        }
        on_stack.remove(gate_id);
    }

    walk(
        root,
        tree,
        catalogue,
        &locus,
        &mut parent_count,
        &mut on_stack,
        &mut visited,
        out,
    );

    if let Some(count) = parent_count.get(root.as_str()) {
        out.push(Violation::new(
            &locus,
            format!("root gate {root} has {count} parent(s)"),
        ));
    }
    for (gate_id, count) in &parent_count {
        if *count > 1 {
            out.push(Violation::new(
                &locus,
                format!("gate {gate_id} has {count} parents"),
            ));
        }
    }
    for gate_id in tree.gates.keys() {
        if !visited.contains(gate_id.as_str()) && gate_id != root {
            out.push(Violation::new(
                &locus,
                format!("gate {gate_id} unreachable from root"),
            ));
        }
    }
}
