//! End-to-end tests against the built binary.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn planrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_planrec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_scenario(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const SCENARIO_A: &str = r#"{
  "name": "A",
  "evidence": {
    "front clr t0": "false",
    "x position t0": "middle",
    "x position t1": "right"
  },
  "targets": ["gen maneuver", "x position t2"]
}"#;

#[test]
fn query_scenario_a_prefers_right1() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(dir.path(), "a.json", SCENARIO_A);
    let out = planrec(&["query", "--net", "traffic", "--scenario", &scenario]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("P(gen maneuver | evidence):"));
    assert!(text.contains("argmax: right1"));
    assert!(text.contains("P(x position t2 | evidence):"));
}

#[test]
fn query_json_matches_the_rendered_table() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(dir.path(), "a.json", SCENARIO_A);
    let table = planrec(&["query", "--scenario", &scenario]);
    let json = planrec(&["query", "--scenario", &scenario, "--json"]);
    assert!(table.status.success() && json.status.success());

    let doc: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    let table_text = stdout(&table);
    for result in doc["results"].as_array().unwrap() {
        let labels = result["labels"].as_array().unwrap();
        let probs = result["probs"].as_array().unwrap();
        for (label, prob) in labels.iter().zip(probs) {
            let rendered = format!("{:<12} {:.4}", label.as_str().unwrap(), prob.as_f64().unwrap());
            assert!(
                table_text.contains(rendered.trim_end()),
                "table is missing `{rendered}`"
            );
        }
    }
}

#[test]
fn query_rejects_unobservable_evidence_naming_the_role() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(
        dir.path(),
        "bad.json",
        r#"{"name": "bad", "evidence": {"lat act m0": "left"}, "targets": ["gen maneuver"]}"#,
    );
    let out = planrec(&["query", "--scenario", &scenario]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("lat act m0"), "stderr: {err}");
    assert!(err.contains("Activity"), "stderr: {err}");
}

#[test]
fn query_rejects_unknown_labels_by_name() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(
        dir.path(),
        "bad.json",
        r#"{"name": "bad", "evidence": {"x position t0": "sideways"}, "targets": ["gen maneuver"]}"#,
    );
    let out = planrec(&["query", "--scenario", &scenario]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("x position t0") && err.contains("sideways"), "stderr: {err}");
}

#[test]
fn query_with_empty_evidence_prints_the_prior() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(
        dir.path(),
        "prior.json",
        r#"{"name": "prior", "evidence": {}, "targets": ["x position t0"]}"#,
    );
    let out = planrec(&["query", "--scenario", &scenario]);
    assert!(out.status.success());
    let text = stdout(&out);
    // Shipped defaults: [0.08, 0.27, 0.40, 0.25] over (off, right, middle, left).
    assert!(text.contains("off          0.0800"));
    assert!(text.contains("right        0.2700"));
    assert!(text.contains("middle       0.4000"));
    assert!(text.contains("left         0.2500"));
}

#[test]
fn query_detects_inconsistent_evidence() {
    let dir = TempDir::new().unwrap();
    // From off-highway the next lane can only be `right` or `off`.
    let scenario = write_scenario(
        dir.path(),
        "impossible.json",
        r#"{"name": "impossible", "evidence": {"x position t0": "off", "x position t1": "left"}, "targets": ["gen maneuver"]}"#,
    );
    let out = planrec(&["query", "--scenario", &scenario]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("zero probability"));
}

#[test]
fn paper_report_passes_and_shows_reference_values() {
    let out = planrec(&["paper"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    for reference in ["0.64", "0.35", "0.65", "0.34", "0.53", "0.46", "0.51", "0.48", "0.61", "0.39"]
    {
        assert!(text.contains(reference), "missing reference {reference}");
    }
    assert!(text.contains("all reference checks passed"));
    assert!(!text.contains("[FAIL]"));
}

#[test]
fn paper_json_mode_is_machine_readable() {
    let out = planrec(&["paper", "--json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["comparisons"].as_array().unwrap().len(), 10);
    assert!(doc["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["passed"].as_bool().unwrap()));
}

#[test]
fn paper_with_zero_left_bias_keeps_structural_zeros() {
    let dir = TempDir::new().unwrap();
    let params = dir.path().join("params.json");
    std::fs::write(&params, r#"{"pass_left_bias": 0.0}"#).unwrap();
    let out = planrec(&["paper", "--params", params.to_str().unwrap()]);
    // Calibration may drift outside the band with such a bias, but the
    // structural zeros are CPT structure, not parameters.
    let text = stdout(&out);
    for line in [
        "A: excluded maneuvers carry exactly zero mass",
        "A: subsumption zeros exact",
        "B: subsumption zeros exact",
        "C: subsumption zeros exact",
    ] {
        let printed = text
            .lines()
            .find(|l| l.contains(line))
            .unwrap_or_else(|| panic!("missing check `{line}`"));
        assert!(printed.contains("[PASS]"), "check failed: {printed}");
    }
}

#[test]
fn validate_builtin_networks_are_clean() {
    for net in ["traffic", "traffic-mini"] {
        let out = planrec(&["validate", "--net", net]);
        assert!(out.status.success());
        assert!(stdout(&out).contains("0 violations"));
    }
}

#[test]
fn validate_reports_corrupted_rows() {
    let dir = TempDir::new().unwrap();
    let exported = dir.path().join("net.json");
    let out = planrec(&["export", "--out", exported.to_str().unwrap()]);
    assert!(out.status.success());

    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&exported).unwrap()).unwrap();
    doc["cpts"][0]["rows"][0][0] = serde_json::json!(0.0); // row now sums short
    let corrupted = dir.path().join("corrupted.json");
    std::fs::write(&corrupted, serde_json::to_string_pretty(&doc).unwrap()).unwrap();

    let out = planrec(&["validate", "--net", corrupted.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let text = stdout(&out);
    assert!(text.contains("1 violations"), "stdout: {text}");
    assert!(text.contains("RowSum"), "stdout: {text}");
}

#[test]
fn validate_reports_cycles_with_the_edge() {
    let dir = TempDir::new().unwrap();
    let net = r#"{
      "variables": [
        {"id": "a", "labels": ["0", "1"], "role": "Context", "time": "t0", "observable": true},
        {"id": "b", "labels": ["0", "1"], "role": "Context", "time": "t0", "observable": true}
      ],
      "cpts": [
        {"child": "a", "parents": ["b"], "rows": [[0.5, 0.5], [0.5, 0.5]]},
        {"child": "b", "parents": ["a"], "rows": [[0.5, 0.5], [0.5, 0.5]]}
      ]
    }"#;
    let path = dir.path().join("cyclic.json");
    std::fs::write(&path, net).unwrap();
    let out = planrec(&["validate", "--net", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let text = stdout(&out);
    assert!(text.contains("Cycle"), "stdout: {text}");
    assert!(text.contains("->"), "stdout: {text}");
}

#[test]
fn sample_is_deterministic_per_seed() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.log"), dir.path().join("b.log"));
    for path in [&a, &b] {
        let out = planrec(&[
            "sample",
            "--seed",
            "7",
            "--n",
            "3",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let (la, lb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(la, lb);
    let text = String::from_utf8(la).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().all(|l| l.contains("gen maneuver=")));
}

#[test]
fn export_round_trips_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    assert!(planrec(&["export", "--out", first.to_str().unwrap()])
        .status
        .success());
    // Re-export the imported file; bytes must match exactly.
    assert!(planrec(&[
        "export",
        "--net",
        first.to_str().unwrap(),
        "--out",
        second.to_str().unwrap()
    ])
    .status
    .success());
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap()
    );

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&first).unwrap()).unwrap();
    assert_eq!(doc["variables"].as_array().unwrap().len(), 30);

    let out = planrec(&["validate", "--net", first.to_str().unwrap()]);
    assert!(out.status.success());
}

#[test]
fn sample_requires_a_positive_count() {
    let out = planrec(&["sample", "--seed", "1", "--n", "0"]);
    assert_eq!(out.status.code(), Some(1));
}
