//! Enumerate every attack path to a goal and score each one.
//!
//! ```bash
//! cargo run -p imshag --example enumerate_paths [GOAL]
//! ```

use imshag::ingest::load_scenario;
use imshag::metrics::{path_success_prob, path_threat_risk, ThreatFilter};
use imshag::pathfinder::enumerate_paths;

fn main() -> imshag::Result<()> {
    let goal = std::env::args().nth(1).unwrap_or_else(|| "MGW".to_string());
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/ims-core.json");
    let model = load_scenario(path)?;

    let paths = enumerate_paths(&model, &goal)?;
    println!("{} attack path(s) to {goal}:\n", paths.len());
    for (i, attack_path) in paths.iter().enumerate() {
        let risk = path_threat_risk(attack_path, &ThreatFilter::All, &model);
        let prob = path_success_prob(attack_path, &model);
        println!("  #{:<2} {attack_path}", i + 1);
        println!("      risk {risk:.3}  success probability {prob:.5}");
    }
    if paths.is_empty() {
        println!("  (unreachable from every entry point)");
    }
    Ok(())
}
