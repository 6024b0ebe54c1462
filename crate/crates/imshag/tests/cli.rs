//! End-to-end tests of the `imshag` binary: exit codes, output formats,
//! determinism.

mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::{canonical_scenario_path, nvd_fixture_path};

fn imshag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imshag"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).to_string()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).to_string()
}

fn scenario_arg() -> String {
    canonical_scenario_path().display().to_string()
}

#[test]
fn validate_accepts_the_canonical_scenario() {
    let out = imshag(&["validate", &scenario_arg()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("ok: 12 functions"));
}

#[test]
fn validate_reports_bad_weights_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let text = fs::read_to_string(canonical_scenario_path()).unwrap();
    fs::write(&path, text.replace("\"D\": 0.7,", "\"D\": 0.6,")).unwrap();

    let out = imshag(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    let lines: Vec<&str> = text.trim().lines().collect();
    assert_eq!(lines.len(), 1, "{lines:?}");
    assert!(lines[0].contains("≠ 1.0"));
}

#[test]
fn validate_missing_file_exits_2() {
    let out = imshag(&["validate", "/nonexistent/scenario.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_malformed_json_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    fs::write(&path, "{ not json").unwrap();
    let out = imshag(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("parse error"));
}

#[test]
fn assess_reproduces_the_multi_goal_sweep() {
    let out = imshag(&[
        "assess",
        "--scenario",
        &scenario_arg(),
        "--goals",
        "P-CSCF,S-CSCF,SIP-AS",
        "--condition",
        "AND",
        "--threats",
        "ALL",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("target,level,filter,risk,prob,paths\n"), "{text}");
    let combined = text
        .lines()
        .find(|l| l.contains("AND("))
        .expect("combined row");
    assert!(combined.contains("4.99"), "{combined}");
    assert!(combined.contains("0.11"), "{combined}");
}

#[test]
fn assess_network_ste_for_mgw() {
    let out = imshag(&[
        "assess",
        "--scenario",
        &scenario_arg(),
        "--goals",
        "MGW",
        "--threats",
        "S,T,E",
        "--level",
        "network",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    // Full-precision network value 6.8894 rounds half-up to 6.89.
    assert!(text.contains("MGW,network,\"S,T,E\",6.89,0.006,2"), "{text}");
}

#[test]
fn assess_rejects_unknown_threat_letter() {
    let out = imshag(&[
        "assess",
        "--scenario",
        &scenario_arg(),
        "--goals",
        "MGW",
        "--threats",
        "X",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown threat"));
}

#[test]
fn assess_rejects_unknown_goal() {
    let out = imshag(&[
        "assess",
        "--scenario",
        &scenario_arg(),
        "--goals",
        "NO-SUCH",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown node"));
}

#[test]
fn assess_csv_is_byte_deterministic() {
    let args = [
        "assess",
        "--scenario",
        &scenario_arg(),
        "--goals",
        "P-CSCF,S-CSCF,SIP-AS,MRFP,MGW",
        "--threats",
        "S,T,E",
        "--format",
        "csv",
    ];
    let scenario = scenario_arg();
    let mut fixed: Vec<&str> = args.to_vec();
    fixed[2] = &scenario;
    let first = imshag(&fixed);
    let second = imshag(&fixed);
    assert_eq!(first.stdout, second.stdout);
    assert!(!first.stdout.is_empty());
}

#[test]
fn paths_lists_both_mgw_routes() {
    let out = imshag(&["paths", "--scenario", &scenario_arg(), "--goal", "MGW"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let routes: Vec<&str> = text.lines().filter(|l| l.contains("->")).collect();
    assert_eq!(routes.len(), 2, "{text}");
    // Direct route: 0.28 * 0.39^4 = 0.006; via I-CSCF: additionally * 0.39.
    assert!(text.contains("0.006"), "{text}");
    assert!(text.contains("0.003"), "{text}");
}

#[test]
fn paths_entry_goal_is_a_single_length_one_path() {
    let out = imshag(&["paths", "--scenario", &scenario_arg(), "--goal", "P-CSCF"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let routes: Vec<&str> = text.lines().filter(|l| l.starts_with("P-CSCF")).collect();
    assert_eq!(routes.len(), 1);
    assert!(routes[0].contains("1.00"), "{}", routes[0]);
}

#[test]
fn paths_unreachable_goal_warns_but_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("island.json");
    fs::write(
        &path,
        r#"{
          "functions": [
            {"name": "A", "ip": "10.0.0.1", "subnet": "s", "entry": true,
             "tree": {"gate": "OR", "children": ["CVE-2019-0001"]}},
            {"name": "B", "ip": "10.0.0.2", "subnet": "s",
             "tree": {"gate": "OR", "children": ["CVE-2019-0001"]}}
          ],
          "edges": [],
          "goals": {"condition": "OR", "targets": ["B"]},
          "vulnerabilities": [
            {"cve": "CVE-2019-0001", "aim": 5.0, "es": 5.0,
             "stride": {"S": 1.0, "T": 0, "R": 0, "I": 0, "D": 0, "E": 0}}
          ]
        }"#,
    )
    .unwrap();
    let out = imshag(&["paths", "--scenario", path.to_str().unwrap(), "--goal", "B"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("unreachable"));
}

#[test]
fn group_emits_the_app_server_breakdown() {
    let out = imshag(&[
        "group",
        "--scenario",
        &scenario_arg(),
        "--group",
        "app-servers",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for expected in ["S,0.62", "T,1.23", "R,0.00", "I,0.46", "D,0.44", "E,2.32"] {
        assert!(text.contains(expected), "missing {expected} in {text}");
    }
}

#[test]
fn group_unknown_name_exits_1() {
    let out = imshag(&[
        "group",
        "--scenario",
        &scenario_arg(),
        "--group",
        "nosuch",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown group"));
}

#[test]
fn defense_patch_drives_entry_dos_risk_to_zero() {
    let out = imshag(&[
        "defense",
        "--scenario",
        &scenario_arg(),
        "--patch",
        "P-CSCF:CVE-2019-15107",
        "--goals",
        "P-CSCF",
        "--threats-per-goal",
        "P-CSCF=D",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("P-CSCF,D,1.61,0.00"), "{text}");
}

#[test]
fn defense_without_actions_is_identity() {
    let out = imshag(&[
        "defense",
        "--scenario",
        &scenario_arg(),
        "--goals",
        "S-CSCF,MGW",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    for line in stdout(&out).lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[2], fields[3], "before != after: {line}");
        assert_eq!(fields[4], fields[5], "prob changed: {line}");
    }
}

#[test]
fn defense_isolation_empties_downstream_paths() {
    let out = imshag(&[
        "defense",
        "--scenario",
        &scenario_arg(),
        "--isolate",
        "S-CSCF",
        "--goals",
        "MGW",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let row = text.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[3], "0.00", "{row}");
    assert_eq!(fields[5], "0.000", "{row}");
}

#[test]
fn svg_output_is_deterministic_and_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.svg");
    let second = dir.path().join("b.svg");
    for path in [&first, &second] {
        let out = imshag(&[
            "group",
            "--scenario",
            &scenario_arg(),
            "--group",
            "app-servers",
            "--format",
            "svg",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let a = fs::read(&first).unwrap();
    let b = fs::read(&second).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("<svg"));
    assert!(text.trim_end().ends_with("</svg>"));
}

fn copy_scenario_to(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("scenario.json");
    fs::copy(canonical_scenario_path(), &path).unwrap();
    path
}

#[test]
fn ingest_from_fixture_updates_scores() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = copy_scenario_to(dir.path());
    // Skew the stored score so the update is observable.
    let text = fs::read_to_string(&scenario).unwrap();
    fs::write(&scenario, text.replace("\"aim\": 5.9,\n      \"es\": 3.9", "\"aim\": 1.0,\n      \"es\": 1.0")).unwrap();

    let fixture = nvd_fixture_path("CVE-2019-15107");
    let out = imshag(&[
        "ingest",
        "nvd",
        "--cve",
        "CVE-2019-15107",
        "--from",
        fixture.to_str().unwrap(),
        "--scenario",
        scenario.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("updated CVE-2019-15107"));

    let updated: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&scenario).unwrap()).unwrap();
    let entry = updated["vulnerabilities"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["cve"] == "CVE-2019-15107")
        .unwrap();
    assert_eq!(entry["aim"], 5.9);
    assert_eq!(entry["es"], 3.9);
}

#[test]
fn ingest_new_cve_requires_weights() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = copy_scenario_to(dir.path());
    // Repoint an existing fixture at a CVE the scenario does not know.
    let fixture_text = fs::read_to_string(nvd_fixture_path("CVE-2019-15107"))
        .unwrap()
        .replace("CVE-2019-15107", "CVE-2024-12345");
    let fixture = dir.path().join("new.json");
    fs::write(&fixture, fixture_text).unwrap();

    let base = [
        "ingest",
        "nvd",
        "--cve",
        "CVE-2024-12345",
        "--from",
        fixture.to_str().unwrap(),
        "--scenario",
        scenario.to_str().unwrap(),
    ];
    let out = imshag(&base);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("weights required"));

    let mut with_weights = base.to_vec();
    with_weights.extend(["--weights", "S=0.5,D=0.5"]);
    let out = imshag(&with_weights);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let updated = fs::read_to_string(&scenario).unwrap();
    assert!(updated.contains("CVE-2024-12345"));
}
