use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fuzzy_prox::sweep::{read_csv, run_sweep, write_csv, Format, SweepConfig, CSV_HEADER};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fuzzy-prox"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn small_sweep(out: &Path, format: &str) -> Output {
    cli(&[
        "sweep",
        "--n-min",
        "1",
        "--n-max",
        "2",
        "--pairs",
        "1:1,1:2",
        "--family-size",
        "8",
        "--samples",
        "4",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
        "--format",
        format,
    ])
}

#[test]
fn sweep_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("out.csv");
    let json_path = dir.path().join("out.json");

    let run = small_sweep(&csv_path, "csv");
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let text = fs::read_to_string(&csv_path).unwrap();
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    let rows = read_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0].m, rows[0].n), (1, 1));
    assert_eq!((rows[1].m, rows[1].n), (1, 2));
    for r in &rows {
        assert!(r.empirical_hausdorff <= r.certified_bound + 1e-6);
        assert_eq!(r.seed, 7);
    }

    let run = small_sweep(&json_path, "json");
    assert!(run.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&json_path).unwrap()).unwrap();
    let reports = doc["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[1]["gammaA_m"].as_f64().unwrap(), rows[1].gamma_a_m);
    assert_eq!(doc["truncated"], serde_json::Value::Bool(false));
}

#[test]
fn sweep_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(small_sweep(&a, "csv").status.success());
    assert!(small_sweep(&b, "csv").status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn library_and_binary_agree() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lib.csv");
    assert!(small_sweep(&path, "csv").status.success());
    let config = SweepConfig {
        n_min: 1,
        n_max: 2,
        pairs: Some(vec![(1, 1), (1, 2)]),
        family_size: 8,
        samples: 4,
        seed: 7,
        format: Format::Csv,
        ..SweepConfig::default()
    };
    let output = run_sweep(&config).unwrap();
    let mut buf = Vec::new();
    write_csv(&output.reports, &mut buf).unwrap();
    assert_eq!(buf, fs::read(&path).unwrap());
}

#[test]
fn constants_prints_all_three() {
    let out = cli(&["constants", "--n", "1", "--family-size", "8"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for key in ["delta", "gammaA", "gammaB"] {
        assert!(text.contains(key), "{text}");
    }
}

#[test]
fn verify_reports_json() {
    let out = cli(&["verify", "--n", "1", "--family-size", "8"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], serde_json::Value::Bool(true));
    assert_eq!(report["nondegenerate"], serde_json::Value::Bool(true));
}

#[test]
fn bad_input_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let inverted = cli(&[
        "sweep",
        "--n-min",
        "3",
        "--n-max",
        "2",
        "--out",
        out.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(inverted.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&inverted.stderr).starts_with("error:"));

    let malformed = cli(&[
        "sweep",
        "--n-min",
        "1",
        "--n-max",
        "2",
        "--pairs",
        "1-2",
        "--out",
        out.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(malformed.status.code(), Some(2));
    assert!(!out.exists());
}
