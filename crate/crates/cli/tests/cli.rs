use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn mrqa(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mrqa"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = mrqa(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn phantom(dir: &Path, name: &str, seed: u64) {
    ok(dir, &["phantom", "--seed", &seed.to_string(), "--size", "64", "--out", name]);
}

#[test]
fn phantom_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    phantom(tmp.path(), "a.npy", 7);
    phantom(tmp.path(), "b.npy", 7);
    phantom(tmp.path(), "c.npy", 8);
    let read = |n: &str| fs::read(tmp.path().join(n)).unwrap();
    assert_eq!(read("a.npy"), read("b.npy"));
    assert_ne!(read("a.npy"), read("c.npy"));
}

#[test]
fn metric_identity_row() {
    let tmp = TempDir::new().unwrap();
    phantom(tmp.path(), "a.npy", 7);
    let stdout = ok(
        tmp.path(),
        &["metric", "--ref", "a.npy", "--img", "a.npy", "--metrics", "ssim,psnr", "--norm", "zscore", "--data-range", "pair"],
    );
    assert_eq!(stdout, "ssim,1.0,higher,pair,zscore\npsnr,inf,higher,pair,zscore\n");
}

#[test]
fn metric_header_and_no_reference_metrics() {
    let tmp = TempDir::new().unwrap();
    phantom(tmp.path(), "a.npy", 1);
    let stdout = ok(tmp.path(), &["metric", "--img", "a.npy", "--metrics", "mtv,mlc", "--header"]);
    let lines: Vec<_> = stdout.lines().collect();
    assert_eq!(lines[0], "metric,score,orientation,data_range_mode,normalization");
    assert!(lines[1].starts_with("mtv,"));
    assert!(lines[2].starts_with("mlc,"));
}

#[test]
fn constant_image_pcc_is_a_numeric_error() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("c.csv"), "1,1,1\n1,1,1\n1,1,1\n").unwrap();
    let out = mrqa(tmp.path(), &["metric", "--ref", "c.csv", "--img", "c.csv", "--metrics", "pcc"]);
    assert_eq!(code(&out), 3);
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("correlation is undefined"));
}

#[test]
fn usage_and_data_errors() {
    let tmp = TempDir::new().unwrap();
    phantom(tmp.path(), "a.npy", 1);
    let cases: [(&[&str], i32); 7] = [
        (&["metric", "--bogus"], 1),
        (&["frobnicate"], 1),
        (&["metric", "--img", "a.npy", "--metrics", "lpips"], 1),
        (&["metric", "--img", "a.npy", "--metrics", "ssim"], 1),
        (&["normalize", "--input", "a.npy", "--norm", "wat", "--out", "b.npy"], 1),
        (&["metric", "--ref", "missing.npy", "--img", "a.npy", "--metrics", "mse"], 2),
        (&["normalize", "--input", "a.npy", "--norm", "pl:missing.json", "--out", "b.npy"], 2),
    ];
    for (args, expected) in cases {
        let out = mrqa(tmp.path(), args);
        assert_eq!(code(&out), expected, "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
    let out = mrqa(tmp.path(), &["metric", "--ref", "missing.npy", "--img", "a.npy", "--metrics", "mse"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.npy"));
}

#[test]
fn normalize_writes_a_raster() {
    let tmp = TempDir::new().unwrap();
    phantom(tmp.path(), "a.npy", 2);
    ok(tmp.path(), &["normalize", "--input", "a.npy", "--norm", "minmax", "--out", "n.csv"]);
    let text = fs::read_to_string(tmp.path().join("n.csv")).unwrap();
    let values: Vec<f64> = text
        .split([',', '\n'])
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().unwrap())
        .collect();
    assert_eq!(values.len(), 64 * 64);
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    assert_eq!((min, max), (0.0, 1.0));
}

#[test]
fn pl_fit_then_normalize() {
    let tmp = TempDir::new().unwrap();
    for seed in 0..3 {
        phantom(tmp.path(), &format!("p{seed}.npy"), seed);
    }
    ok(tmp.path(), &["pl-fit", "p0.npy", "p1.npy", "p2.npy", "--out", "pl.json"]);
    ok(tmp.path(), &["normalize", "--input", "p0.npy", "--norm", "pl:pl.json", "--out", "n.npy"]);
    let stdout = ok(tmp.path(), &["metric", "--ref", "p0.npy", "--img", "p0.npy", "--norm", "pl:pl.json", "--metrics", "pcc"]);
    assert_eq!(stdout, "pcc,1.0,higher,pair,pl\n");
}

#[test]
fn distort_changes_the_image_deterministically() {
    let tmp = TempDir::new().unwrap();
    phantom(tmp.path(), "a.npy", 3);
    for out in ["d1.npy", "d2.npy"] {
        ok(tmp.path(), &["distort", "--input", "a.npy", "--kind", "noise", "--strength", "2", "--seed", "5", "--out", out]);
    }
    let read = |n: &str| fs::read(tmp.path().join(n)).unwrap();
    assert_eq!(read("d1.npy"), read("d2.npy"));
    assert_ne!(read("a.npy"), read("d1.npy"));
    let out = mrqa(tmp.path(), &["distort", "--input", "a.npy", "--kind", "noise", "--strength", "6", "--out", "x.npy"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn bench_writes_all_outputs() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("bench.toml"),
        r#"
phantoms = 2
phantom_size = 64
metrics = ["ssim", "nmi", "mtv"]
normalizations = ["none", "minmax"]
distortions = ["shift", "blur"]
strengths = [1, 5]
output_dir = "results"
"#,
    )
    .unwrap();
    let stdout = ok(tmp.path(), &["bench", "--config", "bench.toml"]);
    assert_eq!(stdout.lines().count(), 4);
    let results = tmp.path().join("results");
    for f in ["rows.csv", "medians.csv", "relative.csv", "table.md"] {
        assert!(results.join(f).is_file(), "{f}");
    }
    let rows = fs::read_to_string(results.join("rows.csv")).unwrap();
    // 2 images x 2 norms x (1 reference row + 2 kinds x 2 strengths x 3 metrics)
    assert_eq!(rows.lines().count(), 1 + 2 * 2 * (1 + 12));
    let relative = fs::read_to_string(results.join("relative.csv")).unwrap();
    assert!(relative.starts_with("distortion,metric,normalization,median,relative\n"));
    assert!(relative.contains("shift,nmi,minmax,2.0,"));

    let out = mrqa(tmp.path(), &["bench", "--config", "missing.toml"]);
    assert_eq!(code(&out), 2);
    fs::write(tmp.path().join("bad.toml"), "phantoms = 1\nmetrics = []\n").unwrap();
    let out = mrqa(tmp.path(), &["bench", "--config", "bad.toml"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn niqe_fit_then_score() {
    let tmp = TempDir::new().unwrap();
    ok(
        tmp.path(),
        &["niqe-fit", "--phantoms", "20", "--size", "96", "--patch-size", "32", "--out", "niqe.json"],
    );
    phantom(tmp.path(), "a.npy", 40);
    let stdout = ok(tmp.path(), &["metric", "--img", "a.npy", "--metrics", "niqe", "--niqe-model", "niqe.json"]);
    let score: f64 = stdout.trim().split(',').nth(1).unwrap().parse().unwrap();
    assert!(score.is_finite() && score >= 0.0);
    let out = mrqa(tmp.path(), &["niqe-fit", "--phantoms", "3", "--size", "96", "--out", "x.json"]);
    assert_eq!(code(&out), 2);
}
