//! Per-threat risk for one goal at all three levels, plus a sub-threat
//! {S,T,E} comparison across several goals.
//!
//! ```bash
//! cargo run -p imshag --example threat_levels
//! ```

use std::str::FromStr;

use imshag::ingest::load_scenario;
use imshag::metrics::{
    network_success_prob, network_threat_risk, node_threat_risk, path_threat_risk, ThreatFilter,
};
use imshag::model::StrideCategory;
use imshag::pathfinder::enumerate_paths;

fn main() -> imshag::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/ims-core.json");
    let model = load_scenario(path)?;

    let goal = "SIP-AS";
    let node = model.node(goal).unwrap();
    let paths = enumerate_paths(&model, goal)?;

    println!("individual threats against {goal}:");
    println!("{:>8} {:>8} {:>12} {:>9}", "threat", "node", "path (max)", "network");
    for category in StrideCategory::ALL {
        let filter = ThreatFilter::single(category);
        let node_value = node_threat_risk(node, &filter, &model.vuln_catalogue);
        let path_value = paths
            .iter()
            .map(|p| path_threat_risk(p, &filter, &model))
            .fold(0.0, f64::max);
        let network_value = network_threat_risk(&model, goal, &filter)?.value;
        println!(
            "{:>8} {node_value:>8.2} {path_value:>12.2} {network_value:>9.2}",
            category.letter()
        );
    }

    let ste = ThreatFilter::from_str("S,T,E")?;
    println!("\nsub-threats {{S,T,E}} across goals:");
    println!(
        "{:>8} {:>8} {:>12} {:>9} {:>14}",
        "goal", "node", "path (max)", "network", "success prob"
    );
    for goal in ["P-CSCF", "S-CSCF", "SIP-AS", "MRFP", "MGW"] {
        let node = model.node(goal).unwrap();
        let paths = enumerate_paths(&model, goal)?;
        let node_value = node_threat_risk(node, &ste, &model.vuln_catalogue);
        let path_value = paths
            .iter()
            .map(|p| path_threat_risk(p, &ste, &model))
            .fold(0.0, f64::max);
        let network_value = network_threat_risk(&model, goal, &ste)?.value;
        let prob = network_success_prob(&model, goal)?;
        println!("{goal:>8} {node_value:>8.2} {path_value:>12.2} {network_value:>9.2} {prob:>14.3}");
    }
    Ok(())
}
