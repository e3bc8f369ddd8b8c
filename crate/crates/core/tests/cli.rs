use std::fs;
use std::path::Path;

use uiqc::cli::main_with_args;

fn run(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("uiqc").chain(args.iter().copied()))
}

fn synth(dir: &Path, seed: &str) {
    assert_eq!(run(&["synth", "--seed", seed, "--out", dir.to_str().unwrap()]), 0);
}

#[test]
fn help_exits_zero_and_bad_usage_two() {
    assert_eq!(run(&["--help"]), 0);
    assert_eq!(run(&["no-such-command"]), 2);
    assert_eq!(run(&["sweep", "--norm", "median"]), 2);
}

#[test]
fn ingest_missing_directory_is_input_error() {
    let out = tempfile::tempdir().unwrap();
    let code = run(&["ingest", "--corpus", "/definitely/not/here", "--out", out.path().to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn ingest_skips_malformed_annotation() {
    let root = tempfile::tempdir().unwrap();
    let labeler = root.path().join("ann").join("VY");
    fs::create_dir_all(&labeler).unwrap();
    fs::write(
        labeler.join("ui-1.xml"),
        "<annotation><object><name>button</name><bndbox><xmin>1</xmin><ymin>1</ymin><xmax>5</xmax><ymax>5</ymax></bndbox></object></annotation>",
    )
    .unwrap();
    fs::write(labeler.join("ui-2.xml"), "<annotation><object>").unwrap();
    let out = root.path().join("out");
    let code = run(&[
        "ingest",
        "--corpus",
        root.path().join("ann").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let snapshot = fs::read_to_string(out.join("corpus.jsonl")).unwrap();
    assert!(snapshot.contains("ui-1"));
    assert!(!snapshot.contains("ui-2"));
}

#[test]
fn synth_is_deterministic_and_needs_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    synth(a.path(), "11");
    synth(b.path(), "11");
    for file in ["corpus.jsonl", "worker_log.jsonl", "verification.csv", "completeness.csv"] {
        assert_eq!(
            fs::read(a.path().join(file)).unwrap(),
            fs::read(b.path().join(file)).unwrap(),
            "{file} differs"
        );
    }
    let c = tempfile::tempdir().unwrap();
    assert_eq!(run(&["synth", "--out", c.path().to_str().unwrap()]), 2);
}

#[test]
fn annotation_directory_matches_snapshot() {
    let data = tempfile::tempdir().unwrap();
    synth(data.path(), "5");
    let from_dir = uiqc::cli::load_dataset(data.path()).unwrap();
    let file = fs::File::open(data.path().join("corpus.jsonl")).unwrap();
    let from_snapshot = uiqc::corpus::import_corpus(std::io::BufReader::new(file)).unwrap();
    let key = |l: &uiqc::corpus::ScreenshotLabeling| (l.labeler_id.clone(), l.screenshot_id.clone());
    let mut expected = from_snapshot.trusted_labelings.clone();
    expected.sort_by_key(key);
    let mut got = from_dir.trusted_labelings.clone();
    got.sort_by_key(key);
    assert_eq!(got, expected);
    assert_eq!(from_dir.worker_records, from_snapshot.worker_records);
}

#[test]
fn sweep_and_baselines_reject_bad_k() {
    let data = tempfile::tempdir().unwrap();
    synth(data.path(), "3");
    let corpus = data.path().join("corpus.jsonl");
    let corpus = corpus.to_str().unwrap();
    let out = data.path().join("out");
    let out = out.to_str().unwrap();
    assert_eq!(run(&["sweep", "--corpus", corpus, "--out", out, "--k-range", "1..5"]), 2);
    assert_eq!(run(&["baselines", "--corpus", corpus, "--out", out, "--k", "0", "--seed", "1"]), 2);
    assert_eq!(run(&["sweep", "--corpus", corpus, "--out", out, "--k-range", "1..2"]), 0);
    let csv = fs::read_to_string(data.path().join("out/sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# config: "));
    assert!(lines.next().unwrap().starts_with("k,trusted_ids,uis_removed"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn verify_report_lists_labelers_by_quality() {
    let data = tempfile::tempdir().unwrap();
    synth(data.path(), "9");
    let out = data.path().join("out");
    let code = run(&[
        "verify-report",
        "--corpus",
        data.path().join("corpus.jsonl").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(code, 0);
    assert!(!out.join("verify.csv").exists());
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("verify.json")).unwrap()).unwrap();
    let rows = json["report"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let q: Vec<f64> = rows.iter().map(|r| r["q"].as_f64().unwrap()).collect();
    assert!(q[0] >= q[1]);
    assert_eq!(json["config"]["norm"], "mean");
}

#[test]
fn config_file_supplies_defaults() {
    let data = tempfile::tempdir().unwrap();
    synth(data.path(), "4");
    let cfg = data.path().join("run.json");
    let out = data.path().join("out");
    fs::write(
        &cfg,
        serde_json::json!({
            "corpus": data.path().join("corpus.jsonl"),
            "out": out,
            "format": "csv",
            "k": 1
        })
        .to_string(),
    )
    .unwrap();
    assert_eq!(run(&["dgt-score", "--config", cfg.to_str().unwrap()]), 0);
    let csv = fs::read_to_string(out.join("scores.csv")).unwrap();
    assert!(csv.contains("\"k\":1"));
    assert!(!out.join("scores.json").exists());
}
