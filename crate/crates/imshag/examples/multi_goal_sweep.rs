//! Watch the combined threat risk grow and the attack-success probability
//! shrink as goals are stacked onto an AND specification: first the entry
//! alone, then the serving CSCF, then the SIP application server.
//!
//! ```bash
//! cargo run -p imshag --example multi_goal_sweep
//! ```

use imshag::ingest::load_scenario;
use imshag::metrics::{multi_goal_success_prob, multi_goal_threat_risk, ThreatFilter};
use imshag::model::{GateKind, GoalSpec};

fn main() -> imshag::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/ims-core.json");
    let model = load_scenario(path)?;

    let sweep: [&[&str]; 3] = [
        &["P-CSCF"],
        &["P-CSCF", "S-CSCF"],
        &["P-CSCF", "S-CSCF", "SIP-AS"],
    ];

    println!("{:<32} {:>11} {:>12}", "attack goals (AND)", "threat risk", "success prob");
    for targets in sweep {
        let spec = GoalSpec::new(
            GateKind::And,
            targets.iter().map(|t| t.to_string()).collect(),
        );
        let risk = multi_goal_threat_risk(&model, &spec, &ThreatFilter::All)?;
        let prob = multi_goal_success_prob(&model, &spec)?;
        println!("{:<32} {risk:>11.2} {prob:>12.2}", targets.join(" & "));
    }

    println!("\nmore goals, more cumulative impact, lower odds of full success.");
    Ok(())
}
