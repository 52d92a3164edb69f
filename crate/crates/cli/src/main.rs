//! Command-line front end: scenario queries, the three-scenario reference
//! report, network validation, forward sampling, and network export.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 network validation
//! failure, 3 inconsistent evidence, 4 reference-report check failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use planrec_core::inference::{posterior, InferenceError, Posterior};
use planrec_core::recognition::validate_roles;
use planrec_core::report::{paper_report_on, PaperReport};
use planrec_core::sampling::forward_sample;
use planrec_core::traffic::{build_traffic_network, traffic_mini};
use planrec_core::{Network, Scenario, TrafficParams};

#[derive(Parser)]
#[command(
    name = "planrec",
    version,
    about = "Plan recognition over discrete Bayesian networks, with a built-in traffic-monitoring model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file's queries against a network.
    Query {
        /// Network selector: `traffic`, `traffic-mini`, or a network JSON file.
        #[arg(long, default_value = "traffic")]
        net: String,
        /// Scenario JSON file: {"name", "evidence": {"var": "label"}, "targets": [...]}.
        #[arg(long)]
        scenario: PathBuf,
        /// Query target(s); overrides the scenario's target list.
        #[arg(long = "target")]
        targets: Vec<String>,
        /// Parameters JSON overriding the shipped defaults (builtin networks only).
        #[arg(long)]
        params: Option<PathBuf>,
        /// Machine-readable output.
        #[arg(long)]
        json: bool,
    },
    /// Run the three reference scenarios and compare against the published values.
    Paper {
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Check network and role-structure invariants.
    Validate {
        #[arg(long, default_value = "traffic")]
        net: String,
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Draw seeded forward samples, one `var=label` line per sample.
    Sample {
        #[arg(long, default_value = "traffic")]
        net: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n: usize,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Write a network as JSON. Export → import → export is byte-identical.
    Export {
        #[arg(long, default_value = "traffic")]
        net: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        params: Option<PathBuf>,
    },
}

enum AppError {
    /// Bad input: unknown files, malformed JSON, unknown variables/labels,
    /// unobservable evidence.
    Usage(String),
    /// The network itself fails validation.
    Validation(String),
    InconsistentEvidence,
    ChecksFailed,
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Validation(_) => 2,
            AppError::InconsistentEvidence => 3,
            AppError::ChecksFailed => 4,
        }
    }
}

impl From<InferenceError> for AppError {
    fn from(e: InferenceError) -> Self {
        match e {
            InferenceError::InconsistentEvidence => AppError::InconsistentEvidence,
            other => AppError::Usage(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                AppError::Usage(msg) => eprintln!("error: {msg}"),
                AppError::Validation(msg) => eprintln!("error: {msg}"),
                AppError::InconsistentEvidence => {
                    eprintln!("error: the evidence has zero probability under this network")
                }
                AppError::ChecksFailed => eprintln!("error: one or more reference checks failed"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Query {
            net,
            scenario,
            targets,
            params,
            json,
        } => cmd_query(&net, &scenario, &targets, params.as_deref(), json),
        Command::Paper { params, json } => cmd_paper(params.as_deref(), json),
        Command::Validate { net, params } => cmd_validate(&net, params.as_deref()),
        Command::Sample {
            net,
            seed,
            n,
            out,
            params,
        } => cmd_sample(&net, seed, n, out.as_deref(), params.as_deref()),
        Command::Export { net, out, params } => cmd_export(&net, &out, params.as_deref()),
    }
}

fn load_params(path: Option<&Path>) -> Result<TrafficParams, AppError> {
    match path {
        None => Ok(TrafficParams::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| AppError::Usage(format!("cannot read {}: {e}", p.display())))?;
            TrafficParams::from_json_str(&text)
                .map_err(|e| AppError::Usage(format!("{}: {e}", p.display())))
        }
    }
}

/// Resolve a network selector: builtin names or a JSON file path.
/// File-backed networks must pass full validation before use.
fn load_network(selector: &str, params: Option<&Path>) -> Result<Network, AppError> {
    match selector {
        "traffic" => build_traffic_network(&load_params(params)?)
            .map_err(|e| AppError::Usage(e.to_string())),
        "traffic-mini" => {
            traffic_mini(&load_params(params)?).map_err(|e| AppError::Usage(e.to_string()))
        }
        path => {
            let text = fs::read_to_string(path)
                .map_err(|e| AppError::Usage(format!("cannot read {path}: {e}")))?;
            let doc = planrec_core::NetworkDocument::from_json(&text)
                .map_err(|e| AppError::Usage(format!("{path}: {e}")))?;
            let net = doc
                .instantiate_unchecked()
                .map_err(|e| AppError::Usage(format!("{path}: {e}")))?;
            let violations = net.validate();
            if !violations.is_empty() {
                return Err(AppError::Validation(format!(
                    "{path}: network fails validation ({} violation(s)); first: {}",
                    violations.len(),
                    violations[0]
                )));
            }
            Ok(net)
        }
    }
}

fn render_posterior(p: &Posterior, out: &mut String) {
    let _ = writeln!(out, "P({} | evidence):", p.target);
    for (label, prob) in p.labels.iter().zip(&p.probs) {
        let _ = writeln!(out, "  {label:<12} {prob:.4}");
    }
    let _ = writeln!(out, "  argmax: {}", p.argmax());
}

fn cmd_query(
    selector: &str,
    scenario_path: &Path,
    target_override: &[String],
    params: Option<&Path>,
    json: bool,
) -> Result<(), AppError> {
    let net = load_network(selector, params)?;
    let text = fs::read_to_string(scenario_path)
        .map_err(|e| AppError::Usage(format!("cannot read {}: {e}", scenario_path.display())))?;
    let mut scenario = Scenario::from_json(&text)
        .map_err(|e| AppError::Usage(format!("{}: {e}", scenario_path.display())))?;
    if !target_override.is_empty() {
        scenario.targets = target_override.to_vec();
    }
    scenario
        .validate(&net)
        .map_err(|e| AppError::Usage(e.to_string()))?;
    if scenario.targets.is_empty() {
        return Err(AppError::Usage(
            "scenario lists no targets and no --target was given".to_string(),
        ));
    }
    let evidence = scenario.evidence();
    let mut posteriors = Vec::with_capacity(scenario.targets.len());
    for target in &scenario.targets {
        posteriors.push(posterior(&net, &evidence, target)?);
    }
    if json {
        let results: Vec<serde_json::Value> = posteriors
            .iter()
            .map(|p| {
                serde_json::json!({
                    "target": p.target,
                    "labels": p.labels,
                    "probs": p.probs,
                    "argmax": p.argmax(),
                    "evidence_mass": p.evidence_mass,
                })
            })
            .collect();
        let doc = serde_json::json!({
            "scenario": scenario.name,
            "evidence": scenario.evidence,
            "results": results,
        });
        println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    } else {
        let mut out = String::new();
        let _ = writeln!(out, "scenario: {}", scenario.name);
        let pairs: Vec<String> = scenario
            .evidence
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        let _ = writeln!(out, "evidence: {}", pairs.join(", "));
        for p in &posteriors {
            let _ = writeln!(out);
            render_posterior(p, &mut out);
        }
        print!("{out}");
    }
    Ok(())
}

fn render_paper_report(report: &PaperReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "reference scenarios (band ±{:.2})", report.band);
    for s in &report.scenarios {
        let _ = writeln!(out);
        let _ = writeln!(out, "scenario {}:", s.name);
        let pairs: Vec<String> = s.evidence.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(out, "  evidence: {}", pairs.join(", "));
        for dist in [&s.maneuver, &s.lane_t2] {
            let _ = writeln!(out, "  P({} | evidence):", dist.target);
            for (label, prob) in dist.labels.iter().zip(&dist.probs) {
                let _ = writeln!(out, "    {label:<12} {prob:.4}");
            }
            let _ = writeln!(out, "    argmax: {}", dist.argmax);
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<10} {:<16} {:<8} {:>9} {:>9} {:>9}  {}",
        "scenario", "variable", "label", "computed", "reference", "|dev|", "band"
    );
    for c in &report.comparisons {
        let _ = writeln!(
            out,
            "{:<10} {:<16} {:<8} {:>9.4} {:>9.2} {:>9.4}  {}",
            c.scenario,
            c.variable,
            c.label,
            c.computed,
            c.reference,
            c.deviation,
            if c.within_band { "ok" } else { "OUT" }
        );
    }
    let _ = writeln!(out);
    for check in &report.checks {
        let _ = writeln!(
            out,
            "[{}] {} ({})",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    let _ = writeln!(
        out,
        "\nresult: {}",
        if report.all_passed() {
            "all reference checks passed"
        } else {
            "REFERENCE CHECKS FAILED"
        }
    );
    out
}

fn cmd_paper(params: Option<&Path>, json: bool) -> Result<(), AppError> {
    let params = load_params(params)?;
    let net = build_traffic_network(&params).map_err(|e| AppError::Usage(e.to_string()))?;
    let report = paper_report_on(&net).map_err(|e| AppError::Usage(e.to_string()))?;
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
    } else {
        print!("{}", render_paper_report(&report));
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(AppError::ChecksFailed)
    }
}

fn cmd_validate(selector: &str, params: Option<&Path>) -> Result<(), AppError> {
    // Reuse the loader for builtins, but file networks are instantiated
    // without the validity gate so every violation can be listed.
    let net = match selector {
        "traffic" | "traffic-mini" => load_network(selector, params)?,
        path => {
            let text = fs::read_to_string(path)
                .map_err(|e| AppError::Usage(format!("cannot read {path}: {e}")))?;
            let doc = planrec_core::NetworkDocument::from_json(&text)
                .map_err(|e| AppError::Usage(format!("{path}: {e}")))?;
            doc.instantiate_unchecked()
                .map_err(|e| AppError::Usage(format!("{path}: {e}")))?
        }
    };
    let network_violations = net.validate();
    let role_violations = validate_roles(&net);
    for v in &network_violations {
        println!("network: {v}");
    }
    for v in &role_violations {
        println!("roles: {v}");
    }
    let total = network_violations.len() + role_violations.len();
    println!("{total} violations");
    if total == 0 {
        Ok(())
    } else {
        Err(AppError::Validation(format!(
            "{total} violation(s) found"
        )))
    }
}

fn cmd_sample(
    selector: &str,
    seed: u64,
    n: usize,
    out: Option<&Path>,
    params: Option<&Path>,
) -> Result<(), AppError> {
    if n == 0 {
        return Err(AppError::Usage("--n must be at least 1".to_string()));
    }
    let net = load_network(selector, params)?;
    let samples = forward_sample(&net, seed, n).map_err(|e| AppError::Usage(e.to_string()))?;
    let log = samples.render_log(&net);
    match out {
        Some(path) => fs::write(path, log)
            .map_err(|e| AppError::Usage(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{log}"),
    }
    Ok(())
}

fn cmd_export(selector: &str, out: &Path, params: Option<&Path>) -> Result<(), AppError> {
    let net = load_network(selector, params)?;
    fs::write(out, net.to_json())
        .map_err(|e| AppError::Usage(format!("cannot write {}: {e}", out.display())))?;
    Ok(())
}
