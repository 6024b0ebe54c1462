//! What-if analysis of defenses: patch the entry point, isolate the
//! redundant signaling route, and rank candidate actions by how much
//! network risk they remove.
//!
//! ```bash
//! cargo run -p imshag --example defense_whatif
//! ```

use std::str::FromStr;

use imshag::defense::{evaluate_defense, rank_defenses, DefenseAction, TargetFilters};
use imshag::ingest::load_scenario;
use imshag::metrics::ThreatFilter;
use imshag::model::{GateKind, GoalSpec, StrideCategory};

fn print_diffs(title: &str, diffs: &[imshag::defense::DefenseDiff]) {
    println!("{title}");
    println!(
        "{:>8} {:>7} {:>8} {:>8} {:>12} {:>12}",
        "target", "filter", "before", "after", "prob before", "prob after"
    );
    for diff in diffs {
        println!(
            "{:>8} {:>7} {:>8.2} {:>8.2} {:>12.3} {:>12.3}",
            diff.target, diff.filter.to_string(), diff.before, diff.after,
            diff.prob_before, diff.prob_after
        );
    }
    println!();
}

fn main() -> imshag::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/ims-core.json");
    let model = load_scenario(path)?;

    // Patching the entry's only vulnerability eliminates its DoS risk
    // outright: nothing upstream of the entry can contribute.
    let entry_patch = [DefenseAction::patch("P-CSCF", "CVE-2019-15107")];
    let diffs = evaluate_defense(
        &model,
        &entry_patch,
        &GoalSpec::single("P-CSCF"),
        &TargetFilters::uniform(ThreatFilter::single(StrideCategory::DenialOfService)),
    )?;
    print_diffs("patch P-CSCF:CVE-2019-15107, DoS view:", &diffs);

    // Isolating I-CSCF removes one of the two signaling routes; downstream
    // risk drops but survives on the remaining route.
    let isolate = [DefenseAction::isolate("I-CSCF")];
    let filters = TargetFilters::uniform(ThreatFilter::All)
        .with_override("S-CSCF", ThreatFilter::from_str("I,E")?)
        .with_override("BGCF", ThreatFilter::single(StrideCategory::InformationDisclosure))
        .with_override("SGW", ThreatFilter::from_str("T,I")?);
    let goals = GoalSpec::new(
        GateKind::And,
        vec!["S-CSCF".into(), "BGCF".into(), "SGW".into()],
    );
    let diffs = evaluate_defense(&model, &isolate, &goals, &filters)?;
    print_diffs("isolate I-CSCF, per-target critical threats:", &diffs);

    // Which single action buys the most?
    let candidates = vec![
        DefenseAction::patch("P-CSCF", "CVE-2019-15107"),
        DefenseAction::patch("S-CSCF", "CVE-2021-21366"),
        DefenseAction::patch("I-CSCF", "CVE-2018-7285"),
        DefenseAction::isolate("I-CSCF"),
        DefenseAction::patch("MRFC", "CVE-2022-20053"),
    ];
    let goals = GoalSpec::new(
        GateKind::And,
        vec!["SIP-AS".into(), "MRFP".into(), "MGW".into()],
    );
    let ranked = rank_defenses(&model, &candidates, &goals, &ThreatFilter::All)?;
    println!("candidate ranking for goals SIP-AS, MRFP, MGW (all threats):");
    for (i, entry) in ranked.iter().enumerate() {
        println!(
            "  {}. {:<28} removes {:.2} network risk",
            i + 1,
            entry.action.to_string(),
            entry.risk_reduction
        );
    }
    Ok(())
}
