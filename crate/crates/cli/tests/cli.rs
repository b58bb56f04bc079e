use std::path::Path;
use std::process::{Command, Output};

fn arnold(dir: &Path, config: &str, extra: &[&str]) -> Output {
  let cfg = dir.join("experiment.toml");
  std::fs::write(&cfg, config).unwrap();
  Command::new(env!("CARGO_BIN_EXE_arnold"))
    .arg("--config")
    .arg(&cfg)
    .arg("--out-dir")
    .arg(dir.join("out"))
    .args(extra)
    .arg("suite")
    .output()
    .unwrap()
}

const SMALL: &str = r#"
seed = 1
alpha = "golden"
lemmas = ["special-times", "dk"]

[samples]
per_scale = 3

[budgets]
train_max_q = 100.0
max_q = 5000.0
dk_max_q = 5000.0
"#;

#[test]
fn empty_selection_writes_header_only() {
  let dir = tempfile::tempdir().unwrap();
  let out = arnold(dir.path(), "lemmas = []\n", &[]);
  assert_eq!(
    out.status.code(),
    Some(0),
    "{}",
    String::from_utf8_lossy(&out.stderr)
  );
  let csv = std::fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
  assert_eq!(csv, "lemma,instance,x,scale,measured,bound,margin,pass\n");
  let summary: serde_json::Value =
    serde_json::from_slice(&std::fs::read(dir.path().join("out/summary.json")).unwrap()).unwrap();
  assert_eq!(summary["rows"], 0);
  assert_eq!(summary["pass"], true);
}

#[test]
fn reports_are_byte_identical_across_runs_and_workers() {
  let mut seen = Vec::new();
  for workers in ["1", "4", "4"] {
    let dir = tempfile::tempdir().unwrap();
    let out = arnold(dir.path(), SMALL, &["--workers", workers]);
    assert_eq!(
      out.status.code(),
      Some(0),
      "{}",
      String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read(dir.path().join("out/report.csv")).unwrap();
    let json = std::fs::read(dir.path().join("out/summary.json")).unwrap();
    seen.push((csv, json));
  }
  assert!(seen[0].0.len() > 100);
  assert_eq!(seen[0], seen[1]);
  assert_eq!(seen[1], seen[2]);
}

#[test]
fn zero_constants_fail_and_flag_rows() {
  let dir = tempfile::tempdir().unwrap();
  let config = format!("{SMALL}\n[calibration]\n\"special-times.f\" = 0.0\n");
  let out = arnold(dir.path(), &config, &[]);
  assert_eq!(
    out.status.code(),
    Some(1),
    "{}",
    String::from_utf8_lossy(&out.stderr)
  );
  let text = std::fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
  let mut reader = csv::Reader::from_reader(text.as_bytes());
  let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
  let flagged: Vec<_> = rows.iter().filter(|r| &r[7] == "false").collect();
  assert!(!flagged.is_empty());
  assert!(flagged
    .iter()
    .all(|r| &r[0] == "special-times.f" && r[6].parse::<f64>().unwrap() < 0.0));
  // the other checks are untouched
  assert!(rows
    .iter()
    .filter(|r| r[0].starts_with("denjoy-koksma"))
    .all(|r| &r[7] == "true"));
  let summary: serde_json::Value =
    serde_json::from_slice(&std::fs::read(dir.path().join("out/summary.json")).unwrap()).unwrap();
  assert_eq!(summary["pass"], false);
}

#[test]
fn unknown_config_keys_are_errors() {
  let dir = tempfile::tempdir().unwrap();
  let out = arnold(dir.path(), "sede = 3\n", &[]);
  assert_eq!(out.status.code(), Some(2));
  assert!(String::from_utf8_lossy(&out.stderr).contains("sede"));
}

#[test]
fn cf_prints_convergents() {
  let out = Command::new(env!("CARGO_BIN_EXE_arnold"))
    .args(["cf", "--alpha", "golden", "--depth", "10"])
    .output()
    .unwrap();
  assert!(out.status.success());
  let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
  let q: Vec<u64> = v["q"]
    .as_array()
    .unwrap()
    .iter()
    .map(|x| x.as_u64().unwrap())
    .collect();
  assert_eq!(q, [1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89]);
}
