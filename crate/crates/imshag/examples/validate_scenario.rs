//! Load a scenario file and run every structural check, then show what a
//! violation report looks like.
//!
//! ```bash
//! cargo run -p imshag --example validate_scenario
//! ```

use imshag::ingest::{load_scenario, ScenarioFile};
use imshag::model::validate_model;

fn main() -> imshag::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/ims-core.json");

    let model = load_scenario(path)?;
    println!(
        "{}: valid ({} functions, {} edges, {} vulnerabilities, {} group(s))",
        path,
        model.nodes.len(),
        model.edges.len(),
        model.vuln_catalogue.len(),
        model.groups.len()
    );

    // Break a copy on purpose to see the report format.
    let mut broken = model.clone();
    broken.edges.insert(("MGW".to_string(), "MGW".to_string()));
    broken
        .vuln_catalogue
        .get_mut("CVE-2019-15107")
        .unwrap()
        .stride
        .d = 0.5;

    println!("\nreport for a deliberately broken copy:");
    for violation in validate_model(&broken) {
        println!("  {violation}");
    }

    // The scenario document itself can be inspected before model building.
    let raw = std::fs::read_to_string(path).unwrap();
    let doc = ScenarioFile::from_json(std::path::Path::new(path), &raw)?;
    println!("\ndeclared goals: {:?} ({})", doc.goals.targets, doc.goals.condition);
    Ok(())
}
