//! Scenario file loading/saving, NVD CVE record parsing, analyst weight
//! merging, and the cached NVD fetch client.
//!
//! The scenario document is a JSON file:
//!
//! ```json
//! {
//!   "functions": [
//!     {"name": "P-CSCF", "ip": "10.0.1.10", "subnet": "access", "entry": true,
//!      "tree": {"gate": "OR", "children": ["CVE-2019-15107"]}}
//!   ],
//!   "edges": [["P-CSCF", "S-CSCF"]],
//!   "groups": {"app-servers": ["SIP-AS"]},
//!   "goals": {"condition": "AND", "targets": ["SIP-AS"]},
//!   "vulnerabilities": [
//!     {"cve": "CVE-2019-15107", "aim": 5.9, "es": 3.9,
//!      "stride": {"S": 0.15, "T": 0.15, "R": 0, "I": 0, "D": 0.7, "E": 0}}
//!   ]
//! }
//! ```
//!
//! Tree children are either CVE id strings or nested subtree objects.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::{
    validate_model, AttackTree, ChildRef, FunctionNode, Gate, GateKind, GoalSpec, HagModel,
    Privilege, StrideWeights, VulnerabilityRecord,
};

/// In-memory image of the scenario document before model construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub functions: Vec<FunctionDecl>,
    pub edges: Vec<(String, String)>,
    #[serde(default)]
    pub groups: BTreeMap<String, Vec<String>>,
    pub goals: GoalsDecl,
    pub vulnerabilities: Vec<VulnDecl>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionDecl {
    pub name: String,
    pub ip: String,
    pub subnet: String,
    #[serde(default)]
    pub entry: bool,
    pub tree: TreeDecl,
    #[serde(default, skip_serializing_if = "is_default_privilege")]
    pub privilege: Privilege,
}

fn is_default_privilege(p: &Privilege) -> bool {
    *p == Privilege::default()
}

/// Nested gate declaration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDecl {
    pub gate: GateKind,
    pub children: Vec<TreeChild>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeChild {
    Cve(String),
    Gate(TreeDecl),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalsDecl {
    pub condition: GateKind,
    pub targets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VulnDecl {
    pub cve: String,
    pub aim: f64,
    pub es: f64,
    pub stride: StrideWeights,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
}

impl ScenarioFile {
    /// Parse a scenario document from JSON text.
    pub fn from_json(path: &Path, text: &str) -> Result<ScenarioFile> {
        serde_json::from_str(text).map_err(|source| Error::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Build the model. Gate ids are assigned in preorder (`g0`, `g1`, ...),
    /// which keeps load/save round-trips structurally equal.
    pub fn into_model(self) -> HagModel {
        let nodes = self
            .functions
            .into_iter()
            .map(|decl| FunctionNode {
                name: decl.name,
                ip: decl.ip,
                subnet: decl.subnet,
                is_entry: decl.entry,
                tree: build_tree(&decl.tree, decl.privilege),
            })
            .collect();
        HagModel {
            nodes,
            edges: self.edges.into_iter().collect(),
            goals: GoalSpec::new(self.goals.condition, self.goals.targets),
            vuln_catalogue: self
                .vulnerabilities
                .into_iter()
                .map(|v| {
                    (
                        v.cve.clone(),
                        VulnerabilityRecord {
                            cve_id: v.cve,
                            aim: v.aim,
                            es: v.es,
                            stride: v.stride,
                            description: v.description,
                        },
                    )
                })
                .collect(),
            groups: self
                .groups
                .into_iter()
                .map(|(name, members)| (name, members.into_iter().collect::<BTreeSet<_>>()))
                .collect(),
        }
    }
}

fn build_tree(decl: &TreeDecl, privilege: Privilege) -> AttackTree {
    fn assign(decl: &TreeDecl, counter: &mut usize, gates: &mut BTreeMap<String, Gate>) -> String {
        let id = format!("g{counter}");
        *counter += 1;
        let mut children = Vec::with_capacity(decl.children.len());
        for child in &decl.children {
            match child {
                TreeChild::Cve(cve) => children.push(ChildRef::Vuln(cve.clone())),
                TreeChild::Gate(sub) => children.push(ChildRef::Gate(assign(sub, counter, gates))),
            }
        }
        gates.insert(
            id.clone(),
            Gate {
                kind: decl.gate,
                children,
            },
        );
        id
    }

    let mut gates = BTreeMap::new();
    let mut counter = 0usize;
    let root = assign(decl, &mut counter, &mut gates);
    AttackTree {
        root: Some(root),
        gates,
        root_privilege: privilege,
    }
}

fn tree_decl(tree: &AttackTree) -> Option<TreeDecl> {
    fn nest(tree: &AttackTree, gate_id: &str) -> TreeDecl {
        let gate = &tree.gates[gate_id];
        TreeDecl {
            gate: gate.kind,
            children: gate
                .children
                .iter()
                .map(|child| match child {
                    ChildRef::Vuln(cve) => TreeChild::Cve(cve.clone()),
                    ChildRef::Gate(sub) => TreeChild::Gate(nest(tree, sub)),
                })
                .collect(),
        }
    }
    tree.root.as_ref().map(|root| nest(tree, root))
}

/// Serialize a model back to a scenario document. Loading the emitted file
/// yields a structurally equal model.
pub fn scenario_from_model(model: &HagModel) -> ScenarioFile {
    ScenarioFile {
        functions: model
            .nodes
            .iter()
            .map(|node| FunctionDecl {
                name: node.name.clone(),
                ip: node.ip.clone(),
                subnet: node.subnet.clone(),
                entry: node.is_entry,
                tree: tree_decl(&node.tree).unwrap_or(TreeDecl {
                    gate: GateKind::Or,
                    children: Vec::new(),
                }),
                privilege: node.tree.root_privilege,
            })
            .collect(),
        edges: model.edges.iter().cloned().collect(),
        groups: model
            .groups
            .iter()
            .map(|(name, members)| (name.clone(), members.iter().cloned().collect()))
            .collect(),
        goals: GoalsDecl {
            condition: model.goals.condition,
            targets: model.goals.targets.clone(),
        },
        vulnerabilities: model
            .vuln_catalogue
            .values()
            .map(|record| VulnDecl {
                cve: record.cve_id.clone(),
                aim: record.aim,
                es: record.es,
                stride: record.stride,
                description: record.description.clone(),
            })
            .collect(),
    }
}

/// Load a scenario file into a validated model. Any validation violation
/// fails the load.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<HagModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let model = ScenarioFile::from_json(path, &text)?.into_model();
    let violations = validate_model(&model);
    if violations.is_empty() {
        Ok(model)
    } else {
        Err(Error::Validation(violations))
    }
}

/// Write a scenario document for a model (pretty-printed JSON).
pub fn save_scenario(model: &HagModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let doc = scenario_from_model(model);
    let text = serde_json::to_string_pretty(&doc).expect("scenario serializes");
    fs::write(path, text + "\n").map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// The fields extracted from one NVD CVE record.
#[derive(Debug, Clone, PartialEq)]
pub struct NvdExtract {
    pub cve_id: String,
    pub impact_score: f64,
    pub exploitability_score: f64,
    pub cvss_version: String,
    pub description: String,
}

/// Extract id, CVSS v3.1 (falling back to v3.0) impact and exploitability
/// subscores, and the English description from an NVD API 2.0 record. The
/// document may be a full single-CVE response, a `{"cve": ...}` container,
/// or a bare CVE item.
pub fn parse_nvd_record(document: &Value) -> Result<NvdExtract> {
    let item = if let Some(list) = document.get("vulnerabilities").and_then(Value::as_array) {
        list.first()
            .and_then(|entry| entry.get("cve"))
            .ok_or_else(|| Error::MalformedRecord("empty vulnerabilities list".to_string()))?
    } else if let Some(cve) = document.get("cve") {
        cve
    } else {
        document
    };

    let cve_id = item
        .get("id")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::MalformedRecord("missing cve id".to_string()))?
        .to_string();

    let metrics = item.get("metrics").unwrap_or(&Value::Null);
    let (entry, version) = ["cvssMetricV31", "cvssMetricV30"]
        .iter()
        .find_map(|key| {
            let list = metrics.get(key)?.as_array()?;
            if list.is_empty() {
                return None;
            }
            let chosen = list
                .iter()
                .find(|m| m.get("type").and_then(Value::as_str) == Some("Primary"))
                .unwrap_or(&list[0]);
            Some((chosen, *key))
        })
        .ok_or_else(|| Error::UnsupportedRecord {
            cve: cve_id.clone(),
        })?;

    let score = |field: &str| -> Result<f64> {
        entry
            .get(field)
            .and_then(Value::as_f64)
            .ok_or_else(|| Error::MalformedRecord(format!("{cve_id}: missing {field}")))
    };
    let impact_score = score("impactScore")?;
    let exploitability_score = score("exploitabilityScore")?;

    let cvss_version = entry
        .get("cvssData")
        .and_then(|d| d.get("version"))
        .and_then(Value::as_str)
        .unwrap_or(if version == "cvssMetricV31" { "3.1" } else { "3.0" })
        .to_string();

    let description = item
        .get("descriptions")
        .and_then(Value::as_array)
        .and_then(|list| {
            list.iter()
                .find(|d| d.get("lang").and_then(Value::as_str) == Some("en"))
                .or_else(|| list.first())
        })
        .and_then(|d| d.get("value"))
        .and_then(Value::as_str)
        .unwrap_or_default()
        .to_string();

    Ok(NvdExtract {
        cve_id,
        impact_score,
        exploitability_score,
        cvss_version,
        description,
    })
}

/// Combine NVD extracts with analyst STRIDE weights into catalogue records.
/// Every extract must have a weight entry; weight entries for CVEs outside
/// the extract list are ignored with a warning.
pub fn merge_weights(
    extracts: &[NvdExtract],
    weights: &BTreeMap<String, StrideWeights>,
) -> Result<BTreeMap<String, VulnerabilityRecord>> {
    let missing: Vec<String> = extracts
        .iter()
        .filter(|e| !weights.contains_key(&e.cve_id))
        .map(|e| e.cve_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingWeights(missing));
    }

    let covered: BTreeSet<&str> = extracts.iter().map(|e| e.cve_id.as_str()).collect();
    for cve in weights.keys() {
        if !covered.contains(cve.as_str()) {
            log::warn!("weight entry for {cve} matches no extracted record; ignored");
        }
    }

    let mut out = BTreeMap::new();
    let mut violations = Vec::new();
    for extract in extracts {
        let stride = weights[&extract.cve_id];
        for problem in stride.problems() {
            violations.push(crate::model::Violation {
                locus: format!("cve {}", extract.cve_id),
                message: problem,
            });
        }
        out.insert(
            extract.cve_id.clone(),
            VulnerabilityRecord {
                cve_id: extract.cve_id.clone(),
                aim: extract.impact_score,
                es: extract.exploitability_score,
                stride,
                description: extract.description.clone(),
            },
        );
    }
    if violations.is_empty() {
        Ok(out)
    } else {
        Err(Error::Validation(violations))
    }
}

/// Default NVD API endpoint.
pub const NVD_API_BASE: &str = "https://services.nvd.nist.gov/rest/json/cves/2.0";

const RATE_LIMIT_REQUESTS: usize = 5;
const RATE_LIMIT_WINDOW: Duration = Duration::from_secs(30);

/// Disk-cached, rate-limited NVD client. Requests are sequential; at most 5
/// run in any 30-second window. The cache is consulted before the network.
pub struct NvdClient {
    base_url: String,
    cache_dir: PathBuf,
    recent_requests: VecDeque<Instant>,
}

impl NvdClient {
    pub fn new(cache_dir: impl Into<PathBuf>) -> NvdClient {
        NvdClient {
            base_url: NVD_API_BASE.to_string(),
            cache_dir: cache_dir.into(),
            recent_requests: VecDeque::new(),
        }
    }

    /// Point the client at a different endpoint (testing, mirrors).
    pub fn with_base_url(mut self, base_url: impl Into<String>) -> NvdClient {
        self.base_url = base_url.into();
        self
    }

    fn cache_path(&self, cve_id: &str) -> PathBuf {
        self.cache_dir.join(format!("{cve_id}.json"))
    }

    /// Fetch one CVE record, serving from the cache when possible and
    /// writing fresh responses back to it.
    pub fn fetch(&mut self, cve_id: &str) -> Result<Value> {
        let cache_path = self.cache_path(cve_id);
        if cache_path.exists() {
            let text = fs::read_to_string(&cache_path).map_err(|source| Error::Io {
                path: cache_path.clone(),
                source,
            })?;
            return serde_json::from_str(&text).map_err(|source| Error::Parse {
                path: cache_path,
                source,
            });
        }

        self.throttle();
        let url = format!("{}?cveId={}", self.base_url, cve_id);
        let response = reqwest::blocking::get(&url).map_err(|e| Error::Fetch {
            cve: cve_id.to_string(),
            reason: e.to_string(),
        })?;
        self.recent_requests.push_back(Instant::now());
        if !response.status().is_success() {
            return Err(Error::Fetch {
                cve: cve_id.to_string(),
                reason: format!("status {}", response.status().as_u16()),
            });
        }
        let text = response.text().map_err(|e| Error::Fetch {
            cve: cve_id.to_string(),
            reason: e.to_string(),
        })?;
        let document: Value = serde_json::from_str(&text).map_err(|source| Error::Parse {
            path: PathBuf::from(&url),
            source,
        })?;

        let total = document
            .get("totalResults")
            .and_then(Value::as_u64)
            .unwrap_or(0);
        if total == 0 {
            return Err(Error::CveNotFound {
                cve: cve_id.to_string(),
            });
        }

        fs::create_dir_all(&self.cache_dir).map_err(|source| Error::Io {
            path: self.cache_dir.clone(),
            source,
        })?;
        fs::write(&cache_path, &text).map_err(|source| Error::Io {
            path: cache_path,
            source,
        })?;
        Ok(document)
    }

    fn throttle(&mut self) {
        let now = Instant::now();
        while let Some(front) = self.recent_requests.front() {
            if now.duration_since(*front) > RATE_LIMIT_WINDOW {
                self.recent_requests.pop_front();
            } else {
                break;
            }
        }
        if self.recent_requests.len() >= RATE_LIMIT_REQUESTS {
            let oldest = self.recent_requests[0];
            let wait = RATE_LIMIT_WINDOW.saturating_sub(now.duration_since(oldest));
            if !wait.is_zero() {
                std::thread::sleep(wait);
            }
            self.recent_requests.pop_front();
        }
    }
}
