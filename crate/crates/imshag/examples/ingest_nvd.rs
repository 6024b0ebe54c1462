//! Parse saved NVD records, merge analyst STRIDE weights into catalogue
//! entries, and demonstrate the cache-first fetch client.
//!
//! ```bash
//! cargo run -p imshag --example ingest_nvd
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use imshag::ingest::{merge_weights, parse_nvd_record, NvdClient};
use imshag::model::StrideWeights;

fn main() -> imshag::Result<()> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/nvd");

    let mut extracts = Vec::new();
    for cve in ["CVE-2019-15107", "CVE-2022-20053", "CVE-2018-5390"] {
        let text = std::fs::read_to_string(fixtures.join(format!("{cve}.json"))).unwrap();
        let document: serde_json::Value = serde_json::from_str(&text).unwrap();
        let extract = parse_nvd_record(&document)?;
        println!(
            "{}: impact {:.1}, exploitability {:.1} (CVSS {})",
            extract.cve_id, extract.impact_score, extract.exploitability_score,
            extract.cvss_version
        );
        extracts.push(extract);
    }

    // The analyst supplies per-threat weights; scores come from the records.
    let mut weights = BTreeMap::new();
    weights.insert(
        "CVE-2019-15107".to_string(),
        StrideWeights::new(0.15, 0.15, 0.0, 0.0, 0.70, 0.0),
    );
    weights.insert(
        "CVE-2022-20053".to_string(),
        StrideWeights::new(0.0, 0.0, 0.0, 0.0, 1.0, 0.0),
    );
    weights.insert(
        "CVE-2018-5390".to_string(),
        StrideWeights::new(0.0, 0.0, 0.0, 0.0, 1.0, 0.0),
    );
    let records = merge_weights(&extracts, &weights)?;
    println!("\nmerged {} catalogue records; dominant threats:", records.len());
    for record in records.values() {
        println!(
            "  {}: D weight {}, attack success probability {:.2}",
            record.cve_id,
            record.stride.d,
            imshag::metrics::vuln_prob(record)
        );
    }

    // Fetching is cache-first; seeding the cache with a saved response means
    // no network traffic at all.
    let cache = std::env::temp_dir().join("imshag-example-cache");
    std::fs::create_dir_all(&cache).unwrap();
    std::fs::copy(
        fixtures.join("CVE-2019-15107.json"),
        cache.join("CVE-2019-15107.json"),
    )
    .unwrap();
    let mut client = NvdClient::new(&cache);
    let document = client.fetch("CVE-2019-15107")?;
    println!(
        "\ncache-first fetch returned {} without touching the network",
        document["vulnerabilities"][0]["cve"]["id"]
    );
    Ok(())
}
