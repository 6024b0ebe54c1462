//! Spec invariants beyond the acceptance property suites: value-type
//! algebra, gate semantics, level monotonicity, serializer round-trips.
//!
//! Generators draw dyadic-rational values (see `common`) so the "exact"
//! assertions hold in plain f64 arithmetic.

mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;

use imshag::defense::{apply_action, DefenseAction};
use imshag::ingest::{load_scenario, merge_weights, save_scenario, NvdExtract};
use imshag::metrics::{
    network_threat_risk_over, node_threat_risk, path_threat_risk, tree_prob, tree_risk,
    ThreatFilter,
};
use imshag::model::{GateKind, StrideWeights, ThreatVector};
use imshag::pathfinder::enumerate_paths;

use common::*;

fn arb_vector() -> impl Strategy<Value = ThreatVector> {
    prop::collection::vec(0u32..=4096, 6).prop_map(|parts| {
        let v = |i: usize| parts[i] as f64 / 1024.0;
        ThreatVector {
            s: v(0),
            t: v(1),
            r: v(2),
            i: v(3),
            d: v(4),
            e: v(5),
        }
    })
}

proptest! {
    #[test]
    fn threat_vector_addition_is_associative_and_commutative(
        a in arb_vector(),
        b in arb_vector(),
        c in arb_vector(),
    ) {
        prop_assert_eq!((a + b) + c, a + (b + c));
        prop_assert_eq!(a + b, b + a);
    }

    #[test]
    fn threat_vector_scaling_distributes(
        a in arb_vector(),
        b in arb_vector(),
        k in 0u32..=4096,
    ) {
        let k = k as f64 / 1024.0;
        prop_assert_eq!((a + b) * k, a * k + b * k);
    }

    #[test]
    fn generated_weights_always_validate(w in arb_weights()) {
        prop_assert!(w.problems().is_empty());
        prop_assert_eq!(w.sum(), 1.0);
    }

    /// Swapping the root gate from OR to AND never lowers risk and never
    /// raises success probability.
    #[test]
    fn and_dominates_or_at_the_root(
        shape in arb_tree_shape(),
        records in prop::collection::vec(arb_record(0), 1..=4),
    ) {
        let records: Vec<_> = records
            .into_iter()
            .enumerate()
            .map(|(i, mut r)| {
                r.cve_id = format!("CVE-2020-{:04}", 1000 + i);
                r
            })
            .collect();
        let ids: Vec<String> = records.iter().map(|r| r.cve_id.clone()).collect();
        let catalogue: BTreeMap<_, _> = records
            .iter()
            .map(|r| (r.cve_id.clone(), r.clone()))
            .collect();

        let mut or_shape = shape.clone();
        or_shape.kind_root = GateKind::Or;
        let mut and_shape = shape;
        and_shape.kind_root = GateKind::And;

        let or_tree = build_tree(&or_shape, &ids);
        let and_tree = build_tree(&and_shape, &ids);

        prop_assert!(tree_risk(&and_tree, &catalogue) >= tree_risk(&or_tree, &catalogue));
        prop_assert!(tree_prob(&and_tree, &catalogue) <= tree_prob(&or_tree, &catalogue));
    }

    /// Network risk dominates the best path, which dominates the goal
    /// node's own value; everything stays non-negative.
    #[test]
    fn risk_levels_are_monotone(
        blueprint in arb_blueprint(6, 0.3),
        target_pick in 0usize..8,
        filter in arb_filter(),
    ) {
        let model = build_model(&blueprint);
        let target = format!("n{}", target_pick % blueprint.node_count);
        let paths = match enumerate_paths(&model, &target) {
            Ok(p) => p,
            Err(_) => return Err(TestCaseError::reject("path explosion")),
        };
        let node_value = node_threat_risk(
            model.node(&target).unwrap(),
            &filter,
            &model.vuln_catalogue,
        );
        let best_path = paths
            .iter()
            .map(|p| path_threat_risk(p, &filter, &model))
            .fold(0.0, f64::max);
        let network = network_threat_risk_over(&paths, &filter, &model);

        prop_assert!(best_path >= 0.0);
        prop_assert!(network.value >= best_path);
        if !paths.is_empty() {
            prop_assert!(best_path >= node_value, "{} < {}", best_path, node_value);
        }
    }

    /// A model survives a save/load cycle structurally intact.
    #[test]
    fn scenario_round_trip_preserves_the_model(blueprint in arb_blueprint(6, 0.3)) {
        let model = build_model(&blueprint);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scenario.json");
        save_scenario(&model, &path).unwrap();
        let reloaded = load_scenario(&path).unwrap();
        prop_assert_eq!(model, reloaded);
    }

    /// The pre-action model's metrics are untouched by apply_action.
    #[test]
    fn apply_action_is_persistent(
        blueprint in arb_blueprint(5, 0.3),
        node_pick in 0usize..8,
    ) {
        let model = build_model(&blueprint);
        let name = format!("n{}", node_pick % blueprint.node_count);
        let before: Vec<f64> = model
            .nodes
            .iter()
            .map(|n| node_threat_risk(n, &ThreatFilter::All, &model.vuln_catalogue))
            .collect();
        let leaves = model.node(&name).unwrap().tree.leaf_cves();
        prop_assume!(!leaves.is_empty());
        let cve = leaves[0].to_string();
        let _patched = apply_action(&model, &DefenseAction::patch(&name, &cve)).unwrap();
        let after: Vec<f64> = model
            .nodes
            .iter()
            .map(|n| node_threat_risk(n, &ThreatFilter::All, &model.vuln_catalogue))
            .collect();
        prop_assert_eq!(before, after);
    }

    /// merge output size equals the extract list size under full coverage.
    #[test]
    fn merge_weights_is_total_over_extracts(
        records in prop::collection::vec((0u32..=256, 0u32..=256), 1..=6),
        weights in prop::collection::vec(arb_weights(), 6),
    ) {
        let extracts: Vec<NvdExtract> = records
            .iter()
            .enumerate()
            .map(|(i, (aim_k, es_k))| NvdExtract {
                cve_id: format!("CVE-2021-{:04}", 1000 + i),
                impact_score: *aim_k as f64 * (5.0 / 128.0),
                exploitability_score: *es_k as f64 * (5.0 / 128.0),
                cvss_version: "3.1".to_string(),
                description: String::new(),
            })
            .collect();
        let table: BTreeMap<String, StrideWeights> = extracts
            .iter()
            .zip(weights.iter().cycle())
            .map(|(e, w)| (e.cve_id.clone(), *w))
            .collect();
        let merged = merge_weights(&extracts, &table).unwrap();
        prop_assert_eq!(merged.len(), extracts.len());
    }
}
