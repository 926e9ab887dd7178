use std::path::Path;
use std::process::{Command, Output};

fn ppkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppkit")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const SMALL: &str = r#"{"id":"a","label":1,"points":[[0.0,0.0],[1.0,0.0]]}
{"id":"b","label":1,"points":[[0.0,0.5]]}
{"id":"c","label":2,"points":[[5.0,5.0],[5.0,6.0],[6.0,5.0]]}
{"id":"d","label":2,"points":[[5.5,5.5],[6.0,6.0]]}
"#;

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(ppkit(&["--help"]).status.code(), Some(0));
    assert_eq!(ppkit(&["--version"]).status.code(), Some(0));
    assert_eq!(ppkit(&["dist", "--help"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(ppkit(&[]).status.code(), Some(1));
    assert_eq!(ppkit(&["frobnicate"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.jsonl");
    std::fs::write(&data, SMALL).unwrap();
    let out = dir.path().join("m.csv");
    let o = ppkit(&["dist", "--in", p(&data), "--distance", "ospa", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--cutoff"));
    let o = ppkit(&["gen", "--scenario", "iv", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn data_errors_exit_two_and_name_empty_patterns() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.jsonl");
    std::fs::write(&data, format!("{SMALL}{{\"id\":\"hollow\",\"label\":2,\"points\":[]}}\n")).unwrap();
    let out = dir.path().join("m.csv");
    let o = ppkit(&["dist", "--in", p(&data), "--distance", "hausdorff", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("hollow"));
    // The same file is fine for OSPA.
    let o = ppkit(&["dist", "--in", p(&data), "--distance", "ospa", "--cutoff", "2", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0));

    std::fs::write(&data, "{\"id\":\"x\",\"points\":[[1.0]]}\nnot json\n").unwrap();
    let o = ppkit(&["dist", "--in", p(&data), "--distance", "hausdorff", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let missing = dir.path().join("missing.jsonl");
    let o = ppkit(&["dist", "--in", p(&missing), "--distance", "hausdorff", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dist_writes_symmetric_matrix_ids_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.jsonl");
    std::fs::write(&data, SMALL).unwrap();
    let out = dir.path().join("m.csv");
    let o = ppkit(&["dist", "--in", p(&data), "--distance", "wasserstein", "--p", "1", "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = ppkit::io::read_matrix_csv(std::io::BufReader::new(std::fs::File::open(&out).unwrap())).unwrap();
    assert_eq!(m.len(), 4);
    assert_eq!(m.max_asymmetry(), 0.0);
    assert!((0..4).all(|i| m.get(i, i) == 0.0));
    // b is one point at (0, 0.5); a is (0,0) and (1,0).
    let expected = 0.5 * (0.5 + 1.25f64.sqrt());
    assert!((m.get(0, 1) - expected).abs() < 1e-12);

    let ids: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("m.ids.json")).unwrap()).unwrap();
    assert_eq!(ids["ids"], serde_json::json!(["a", "b", "c", "d"]));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run-manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "dist");
}

#[test]
fn gen_builtin_scenario_has_600_patterns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d2.jsonl");
    let o = ppkit(&["gen", "--scenario", "ii", "--seed", "7", "--out", p(&out)]);
    assert!(o.status.success());
    let ds = ppkit::io::read_dataset(&out).unwrap();
    assert_eq!(ds.len(), 600);
    assert_eq!(ds.classes(), [1, 2, 3]);
}

#[test]
fn cluster_then_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.jsonl");
    std::fs::write(&data, SMALL).unwrap();
    let res = dir.path().join("c.json");
    let o = ppkit(&["cluster", "--in", p(&data), "--distance", "hausdorff", "--clusters", "2", "--out", p(&res)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ev = dir.path().join("e.json");
    let o = ppkit(&["eval", "--kind", "cluster", "--result", p(&res), "--truth", p(&data), "--out", p(&ev)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&ev).unwrap()).unwrap();
    assert_eq!(v["metrics"]["purity"], 1.0);
}

#[test]
fn classify_and_detect_produce_reports() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.jsonl");
    std::fs::write(&data, SMALL).unwrap();
    let out = dir.path().join("k.json");
    let o = ppkit(&["classify", "--in", p(&data), "--distance", "hausdorff", "--folds", "2", "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let normal = dir.path().join("n.jsonl");
    std::fs::write(&normal, SMALL.lines().take(2).map(|l| format!("{l}\n")).collect::<String>()).unwrap();
    let report = dir.path().join("r.jsonl");
    let o = ppkit(&[
        "detect", "--normal", p(&normal), "--candidates", p(&data), "--distance", "hausdorff", "--out", p(&report),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let lines: Vec<serde_json::Value> = std::fs::read_to_string(&report)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[2]["id"], "c");
    assert_eq!(lines[2]["novel"], true);
}
