//! Emit deterministic SVG bar charts from assessment results.
//!
//! ```bash
//! cargo run -p imshag --example export_chart [OUT_DIR]
//! ```

use std::path::PathBuf;

use imshag::ingest::load_scenario;
use imshag::metrics::{assess, subsystem_threat_vector, Level, ThreatFilter};
use imshag::model::{GateKind, GoalSpec, StrideCategory};
use imshag::report::{render_bar_chart, BarSeries};

fn main() -> imshag::Result<()> {
    let scenario = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/ims-core.json");
    let model = load_scenario(scenario)?;
    let out_dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);

    // Subsystem chart: one bar per STRIDE letter.
    let vector = subsystem_threat_vector(&model, "app-servers")?;
    let letters: Vec<String> = StrideCategory::ALL.iter().map(|c| c.letter().to_string()).collect();
    let chart = render_bar_chart(
        &letters,
        &[BarSeries {
            label: "app-servers".to_string(),
            values: StrideCategory::ALL.iter().map(|c| vector.get(*c)).collect(),
        }],
        "individual threat",
        "threat risk",
    )?;
    let path = out_dir.join("app-servers-threats.svg");
    std::fs::write(&path, &chart).unwrap();
    println!("wrote {}", path.display());

    // Per-goal chart: grouped per-threat bars at network level.
    let goals = GoalSpec::new(
        GateKind::And,
        ["P-CSCF", "S-CSCF", "SIP-AS", "MRFP", "MGW"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    let result = assess(&model, &goals, &ThreatFilter::All, Level::Network)?;
    let groups: Vec<String> = result.rows.iter().map(|r| r.target.clone()).collect();
    let series: Vec<BarSeries> = StrideCategory::ALL
        .iter()
        .map(|category| BarSeries {
            label: category.letter().to_string(),
            values: result.rows.iter().map(|r| r.per_threat.get(*category)).collect(),
        })
        .collect();
    let chart = render_bar_chart(&groups, &series, "attack goals", "threat risk (network level)")?;
    let path = out_dir.join("network-threats-by-goal.svg");
    std::fs::write(&path, &chart).unwrap();
    println!("wrote {}", path.display());
    Ok(())
}
