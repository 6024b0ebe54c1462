//! The `imshag` command-line interface. Exit codes: 0 success, 1 domain
//! error, 2 I/O or parse error.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::defense::{evaluate_defense, DefenseAction, TargetFilters};
use crate::error::{Error, Result};
use crate::ingest::{self, NvdClient, ScenarioFile, VulnDecl};
use crate::metrics::{self, Level, ThreatFilter};
use crate::model::{validate_model, GateKind, GoalSpec, HagModel, StrideCategory, StrideWeights};
use crate::pathfinder;
use crate::report::{self, BarSeries, OutputFormat};

#[derive(Debug, Parser)]
#[command(
    name = "imshag",
    version,
    about = "Hierarchical attack-graph modeling and STRIDE threat-specific risk assessment for IMS networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a scenario file against every structural invariant.
    Validate {
        /// Scenario file to check.
        scenario: PathBuf,
    },
    /// Per-goal threat risk and attack-success probability.
    Assess(AssessArgs),
    /// List attack paths to a goal with per-path risk and probability.
    Paths {
        #[arg(long)]
        scenario: PathBuf,
        /// Goal node name.
        #[arg(long)]
        goal: String,
    },
    /// Per-threat risk for a configured subsystem group.
    Group(GroupArgs),
    /// Before/after re-scoring under patch and isolation actions.
    Defense(DefenseArgs),
    /// Maintain scenario vulnerability entries from NVD records.
    Ingest {
        #[command(subcommand)]
        source: IngestSource,
    },
}

#[derive(Debug, Args)]
pub struct AssessArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Comma-separated goal names (default: the scenario's goals).
    #[arg(long)]
    goals: Option<String>,
    /// Goal combination: AND or OR.
    #[arg(long)]
    condition: Option<String>,
    /// STRIDE letters, e.g. S,T,E — or ALL.
    #[arg(long, default_value = "ALL")]
    threats: String,
    /// Assessment level: node, path, or network.
    #[arg(long, default_value = "network")]
    level: String,
    /// Output format: table, csv, md, or svg.
    #[arg(long, default_value = "table")]
    format: String,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GroupArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Group name from the scenario's `groups` section.
    #[arg(long)]
    group: String,
    /// STRIDE letters to report (default: all six).
    #[arg(long, default_value = "ALL")]
    threats: String,
    #[arg(long, default_value = "table")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DefenseArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Patch action as NODE:CVE; repeatable.
    #[arg(long = "patch")]
    patches: Vec<String>,
    /// Isolate action naming a node; repeatable.
    #[arg(long = "isolate")]
    isolations: Vec<String>,
    /// Comma-separated targets to re-score (default: the scenario's goals).
    #[arg(long)]
    goals: Option<String>,
    /// Per-target filters, e.g. `P-CSCF=D;S-CSCF=I,E` (default ALL).
    #[arg(long = "threats-per-goal")]
    threats_per_goal: Option<String>,
    #[arg(long, default_value = "table")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum IngestSource {
    /// Pull one CVE record from the NVD (or a saved response) into a
    /// scenario's vulnerability list.
    Nvd(NvdArgs),
}

#[derive(Debug, Args)]
pub struct NvdArgs {
    /// CVE identifier, e.g. CVE-2019-15107.
    #[arg(long)]
    cve: String,
    /// Read the record from a saved NVD JSON response.
    #[arg(long, conflicts_with = "fetch")]
    from: Option<PathBuf>,
    /// Fetch the record from the NVD API (cached on disk).
    #[arg(long)]
    fetch: bool,
    /// Cache directory (falls back to $IMSHAG_CACHE, then .imshag-cache).
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Scenario file to update.
    #[arg(long)]
    scenario: PathBuf,
    /// STRIDE weights for a new entry, e.g. `S=0.15,T=0.15,D=0.7`.
    #[arg(long)]
    weights: Option<String>,
}

/// Parse argv, dispatch, and return the process exit code.
pub fn run() -> i32 {
    let _ = env_logger::try_init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error}");
            error.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Validate { scenario } => cmd_validate(&scenario),
        Command::Assess(args) => cmd_assess(args),
        Command::Paths { scenario, goal } => cmd_paths(&scenario, &goal),
        Command::Group(args) => cmd_group(args),
        Command::Defense(args) => cmd_defense(args),
        Command::Ingest {
            source: IngestSource::Nvd(args),
        } => cmd_ingest_nvd(args),
    }
}

fn cmd_validate(path: &PathBuf) -> Result<i32> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    let model = ScenarioFile::from_json(path, &text)?.into_model();
    let violations = validate_model(&model);
    if violations.is_empty() {
        println!(
            "ok: {} functions, {} edges, {} vulnerabilities",
            model.nodes.len(),
            model.edges.len(),
            model.vuln_catalogue.len()
        );
        Ok(0)
    } else {
        for violation in &violations {
            println!("{violation}");
        }
        Ok(1)
    }
}

fn resolve_goals(model: &HagModel, goals: &Option<String>, condition: &Option<String>) -> Result<GoalSpec> {
    let condition_from = |s: &str| -> Result<GateKind> {
        match s.to_ascii_uppercase().as_str() {
            "AND" => Ok(GateKind::And),
            "OR" => Ok(GateKind::Or),
            other => Err(Error::InvalidFlag {
                what: "condition".to_string(),
                value: other.to_string(),
                reason: "expected AND or OR".to_string(),
            }),
        }
    };
    match goals {
        Some(list) => {
            let targets: Vec<String> = list
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            if targets.is_empty() {
                return Err(Error::EmptyGoals);
            }
            for target in &targets {
                if model.node(target).is_none() {
                    return Err(Error::UnknownNode(target.clone()));
                }
            }
            let cond = match condition {
                Some(c) => condition_from(c)?,
                None => GateKind::And,
            };
            Ok(GoalSpec::new(cond, targets))
        }
        None => {
            let mut spec = model.goals.clone();
            if let Some(c) = condition {
                spec.condition = condition_from(c)?;
            }
            Ok(spec)
        }
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn render_rows(
    format: OutputFormat,
    header: &[&str],
    rows: &[Vec<String>],
) -> String {
    match format {
        OutputFormat::Csv => report::csv(header, rows),
        OutputFormat::Md => report::markdown_table(header, rows),
        _ => report::text_table(header, rows),
    }
}

fn cmd_assess(args: AssessArgs) -> Result<i32> {
    let model = ingest::load_scenario(&args.scenario)?;
    let goals = resolve_goals(&model, &args.goals, &args.condition)?;
    let filter = ThreatFilter::from_str(&args.threats)?;
    let level = Level::from_str(&args.level)?;
    let format = OutputFormat::from_str(&args.format)?;

    let assessment = metrics::assess(&model, &goals, &filter, level)?;

    if format == OutputFormat::Svg {
        let groups: Vec<String> = assessment.rows.iter().map(|r| r.target.clone()).collect();
        let series: Vec<BarSeries> = filter
            .categories()
            .into_iter()
            .map(|category| BarSeries {
                label: category.letter().to_string(),
                values: assessment
                    .rows
                    .iter()
                    .map(|r| r.per_threat.get(category))
                    .collect(),
            })
            .collect();
        let svg = report::render_bar_chart(
            &groups,
            &series,
            "attack goals",
            &format!("threat risk ({level} level)"),
        )?;
        emit(&args.out, &svg)?;
        return Ok(0);
    }

    let header = ["target", "level", "filter", "risk", "prob", "paths"];
    let mut rows: Vec<Vec<String>> = assessment
        .rows
        .iter()
        .map(|row| {
            vec![
                row.target.clone(),
                level.to_string(),
                filter.to_string(),
                report::fmt_risk(row.risk),
                report::fmt_prob(row.prob),
                row.path_count.to_string(),
            ]
        })
        .collect();
    if let Some(combined) = &assessment.combined {
        let label = format!(
            "{}({})",
            combined.condition,
            goals.targets.join("+")
        );
        let total_paths: usize = assessment.rows.iter().map(|r| r.path_count).sum();
        rows.push(vec![
            label,
            "multi-goal".to_string(),
            filter.to_string(),
            report::fmt_risk(combined.risk),
            report::fmt_prob(combined.prob),
            total_paths.to_string(),
        ]);
    }
    emit(&args.out, &render_rows(format, &header, &rows))?;

    for row in &assessment.rows {
        if row.unreachable {
            eprintln!("warning: {} is unreachable from every entry point", row.target);
        }
    }
    Ok(0)
}

fn cmd_paths(scenario: &PathBuf, goal: &str) -> Result<i32> {
    let model = ingest::load_scenario(scenario)?;
    let paths = pathfinder::enumerate_paths(&model, goal)?;
    let header = ["path", "nodes", "risk", "prob"];
    let rows: Vec<Vec<String>> = paths
        .iter()
        .map(|path| {
            vec![
                path.to_string(),
                path.len().to_string(),
                report::fmt_risk(metrics::path_threat_risk(path, &ThreatFilter::All, &model)),
                report::fmt_prob(metrics::path_success_prob(path, &model)),
            ]
        })
        .collect();
    print!("{}", report::text_table(&header, &rows));
    if paths.is_empty() {
        eprintln!("warning: {goal} is unreachable from every entry point");
    }
    Ok(0)
}

fn cmd_group(args: GroupArgs) -> Result<i32> {
    let model = ingest::load_scenario(&args.scenario)?;
    let filter = ThreatFilter::from_str(&args.threats)?;
    let format = OutputFormat::from_str(&args.format)?;
    let vector = metrics::subsystem_threat_vector(&model, &args.group)?;

    let categories = filter.categories();
    if format == OutputFormat::Svg {
        let groups: Vec<String> = categories.iter().map(|c| c.letter().to_string()).collect();
        let series = vec![BarSeries {
            label: args.group.clone(),
            values: categories.iter().map(|c| vector.get(*c)).collect(),
        }];
        let svg = report::render_bar_chart(&groups, &series, "individual threat", "threat risk")?;
        emit(&args.out, &svg)?;
        return Ok(0);
    }

    let header = ["threat", "risk"];
    let rows: Vec<Vec<String>> = categories
        .iter()
        .map(|category| {
            vec![
                category.letter().to_string(),
                report::fmt_risk(vector.get(*category)),
            ]
        })
        .collect();
    emit(&args.out, &render_rows(format, &header, &rows))?;
    Ok(0)
}

fn parse_patch_flag(raw: &str) -> Result<DefenseAction> {
    match raw.split_once(':') {
        Some((node, cve)) if !node.is_empty() && !cve.is_empty() => {
            Ok(DefenseAction::patch(node.trim(), cve.trim()))
        }
        _ => Err(Error::InvalidFlag {
            what: "--patch".to_string(),
            value: raw.to_string(),
            reason: "expected NODE:CVE".to_string(),
        }),
    }
}

fn parse_threats_per_goal(raw: &str) -> Result<BTreeMap<String, ThreatFilter>> {
    let mut map = BTreeMap::new();
    for pair in raw.split(';') {
        let pair = pair.trim();
        if pair.is_empty() {
            continue;
        }
        let (target, letters) = pair.split_once('=').ok_or_else(|| Error::InvalidFlag {
            what: "--threats-per-goal".to_string(),
            value: pair.to_string(),
            reason: "expected TARGET=LETTERS".to_string(),
        })?;
        map.insert(target.trim().to_string(), ThreatFilter::from_str(letters)?);
    }
    Ok(map)
}

fn cmd_defense(args: DefenseArgs) -> Result<i32> {
    let model = ingest::load_scenario(&args.scenario)?;
    let goals = resolve_goals(&model, &args.goals, &None)?;
    let format = OutputFormat::from_str(&args.format)?;

    let mut actions = Vec::new();
    for raw in &args.patches {
        actions.push(parse_patch_flag(raw)?);
    }
    for node in &args.isolations {
        actions.push(DefenseAction::isolate(node.trim()));
    }

    let mut filters = TargetFilters::default();
    if let Some(raw) = &args.threats_per_goal {
        filters.overrides = parse_threats_per_goal(raw)?;
    }

    let diffs = evaluate_defense(&model, &actions, &goals, &filters)?;
    let header = ["target", "filter", "before", "after", "prob_before", "prob_after"];
    let rows: Vec<Vec<String>> = diffs
        .iter()
        .map(|diff| {
            vec![
                diff.target.clone(),
                diff.filter.to_string(),
                report::fmt_risk(diff.before),
                report::fmt_risk(diff.after),
                report::fmt_prob(diff.prob_before),
                report::fmt_prob(diff.prob_after),
            ]
        })
        .collect();
    emit(&args.out, &render_rows(format, &header, &rows))?;
    Ok(0)
}

fn parse_weights_flag(raw: &str) -> Result<StrideWeights> {
    let mut weights = StrideWeights::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for pair in raw.split(',') {
        let pair = pair.trim();
        if pair.is_empty() {
            continue;
        }
        let (letter, value) = pair.split_once('=').ok_or_else(|| Error::InvalidFlag {
            what: "--weights".to_string(),
            value: pair.to_string(),
            reason: "expected LETTER=VALUE".to_string(),
        })?;
        let category = letter
            .trim()
            .chars()
            .next()
            .and_then(StrideCategory::from_letter)
            .ok_or_else(|| Error::UnknownThreat(letter.trim().to_string()))?;
        let parsed: f64 = value.trim().parse().map_err(|_| Error::InvalidFlag {
            what: "--weights".to_string(),
            value: value.to_string(),
            reason: "expected a number".to_string(),
        })?;
        match category {
            StrideCategory::Spoofing => weights.s = parsed,
            StrideCategory::Tampering => weights.t = parsed,
            StrideCategory::Repudiation => weights.r = parsed,
            StrideCategory::InformationDisclosure => weights.i = parsed,
            StrideCategory::DenialOfService => weights.d = parsed,
            StrideCategory::ElevationOfPrivilege => weights.e = parsed,
        }
    }
    Ok(weights)
}

fn cmd_ingest_nvd(args: NvdArgs) -> Result<i32> {
    let document = if let Some(path) = &args.from {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| Error::Parse {
            path: path.clone(),
            source,
        })?
    } else if args.fetch {
        let cache_dir = args
            .cache
            .clone()
            .or_else(|| std::env::var_os("IMSHAG_CACHE").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(".imshag-cache"));
        NvdClient::new(cache_dir).fetch(&args.cve)?
    } else {
        return Err(Error::InvalidFlag {
            what: "ingest nvd".to_string(),
            value: String::new(),
            reason: "pass --from FILE or --fetch".to_string(),
        });
    };

    let extract = ingest::parse_nvd_record(&document)?;
    if extract.cve_id != args.cve {
        return Err(Error::InvalidFlag {
            what: "--cve".to_string(),
            value: args.cve.clone(),
            reason: format!("record is for {}", extract.cve_id),
        });
    }

    let text = fs::read_to_string(&args.scenario).map_err(|source| Error::Io {
        path: args.scenario.clone(),
        source,
    })?;
    let mut scenario = ScenarioFile::from_json(&args.scenario, &text)?;

    match scenario.vulnerabilities.iter_mut().find(|v| v.cve == args.cve) {
        Some(entry) => {
            entry.aim = extract.impact_score;
            entry.es = extract.exploitability_score;
            if entry.description.is_empty() {
                entry.description = extract.description.clone();
            }
            if let Some(raw) = &args.weights {
                entry.stride = parse_weights_flag(raw)?;
            }
            println!(
                "updated {}: aim {}, es {}",
                args.cve, extract.impact_score, extract.exploitability_score
            );
        }
        None => {
            let raw = args.weights.as_ref().ok_or_else(|| Error::InvalidFlag {
                what: "--weights".to_string(),
                value: String::new(),
                reason: format!("{} is new to this scenario; STRIDE weights required", args.cve),
            })?;
            scenario.vulnerabilities.push(VulnDecl {
                cve: args.cve.clone(),
                aim: extract.impact_score,
                es: extract.exploitability_score,
                stride: parse_weights_flag(raw)?,
                description: extract.description.clone(),
            });
            println!(
                "added {}: aim {}, es {}",
                args.cve, extract.impact_score, extract.exploitability_score
            );
        }
    }

    let rendered =
        serde_json::to_string_pretty(&scenario).expect("scenario serializes") + "\n";
    fs::write(&args.scenario, rendered).map_err(|source| Error::Io {
        path: args.scenario.clone(),
        source,
    })?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn patch_flag_parses() {
        let action = parse_patch_flag("P-CSCF:CVE-2019-15107").unwrap();
        assert_eq!(action, DefenseAction::patch("P-CSCF", "CVE-2019-15107"));
        assert!(parse_patch_flag("nocolon").is_err());
        assert!(parse_patch_flag(":CVE-1").is_err());
    }

    #[test]
    fn threats_per_goal_parses() {
        let map = parse_threats_per_goal("P-CSCF=D;S-CSCF=I,E").unwrap();
        assert_eq!(map["P-CSCF"].to_string(), "D");
        assert_eq!(map["S-CSCF"].to_string(), "I,E");
        assert!(parse_threats_per_goal("broken").is_err());
    }

    #[test]
    fn weights_flag_parses() {
        let weights = parse_weights_flag("S=0.15,T=0.15,D=0.7").unwrap();
        assert_eq!(weights.s, 0.15);
        assert_eq!(weights.d, 0.7);
        assert_eq!(weights.r, 0.0);
        assert!(parse_weights_flag("Q=1").is_err());
    }
}
