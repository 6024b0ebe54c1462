//! Per-threat risk rollup for a configured subsystem group, with the
//! weight-band reading of each member's dominant threat.
//!
//! ```bash
//! cargo run -p imshag --example subsystem_threats
//! ```

use imshag::ingest::load_scenario;
use imshag::metrics::subsystem_threat_vector;
use imshag::model::{StrideCategory, WeightBand};

fn main() -> imshag::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/ims-core.json");
    let model = load_scenario(path)?;
    let group = "app-servers";

    let members = model.lookup_group(group)?;
    println!(
        "group `{group}`: {}",
        members
            .iter()
            .map(|m| m.name.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    );

    let vector = subsystem_threat_vector(&model, group)?;
    println!("\n{:>8} {:>8}", "threat", "risk");
    for category in StrideCategory::ALL {
        println!("{:>8} {:>8.2}", category.letter(), vector.get(category));
    }

    println!("\nper-member weights and bands:");
    for member in members {
        for cve in member.tree.leaf_cves() {
            let record = &model.vuln_catalogue[cve];
            print!("  {:<8} {cve}:", member.name);
            for category in StrideCategory::ALL {
                let weight = record.stride.get(category);
                if weight > 0.0 {
                    print!(
                        " {}={weight} ({})",
                        category.letter(),
                        WeightBand::from_weight(weight)
                    );
                }
            }
            println!();
        }
    }
    Ok(())
}
