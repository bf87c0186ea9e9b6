use std::path::PathBuf;
use std::process::{Command, Output};

fn preint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_preint"))
        .args(args)
        .env("PREINT_THREADS", "1")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("preint-cli-{name}-{}", std::process::id()));
    std::fs::remove_dir_all(&dir).ok();
    dir
}

#[test]
fn price_in_one_dimension_is_the_analytic_value() {
    let o = preint(&["price", "--d", "1", "--N", "16", "--method", "pre-qmc"]);
    assert!(o.status.success());
    let line = stdout(&o).lines().nth(1).unwrap().to_string();
    let v: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
    assert!((v - 0.750_059_434_367_76).abs() < 1e-9, "{line}");
}

#[test]
fn price_respects_market_flags() {
    // A far out-of-the-money strike prices near zero.
    let o = preint(&[
        "price", "--d", "8", "--N", "1024", "--K", "200", "--method", "pre-mc",
    ]);
    assert!(o.status.success());
    let v: f64 = stdout(&o)
        .lines()
        .nth(1)
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(v < 1e-10);
}

#[test]
fn converge_writes_three_csv_files() {
    let dir = scratch_dir("converge");
    let out = dir.to_str().unwrap();
    let o = preint(&[
        "converge",
        "--d",
        "4",
        "--N",
        "64",
        "--N",
        "256",
        "--reps",
        "3",
        "--method",
        "mc",
        "--method",
        "pre-qmc",
        "--reference-n",
        "4096",
        "--reference-scrambles",
        "4",
        "--out",
        out,
        "--factorization",
        "bridge",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let est = std::fs::read_to_string(dir.join("estimates.csv")).unwrap();
    assert_eq!(
        est.lines().next().unwrap(),
        "method,N,replication,estimate,abs_err,rel_err"
    );
    assert_eq!(est.lines().count(), 1 + 2 * 2 * 3);
    let summary = std::fs::read_to_string(dir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().next().unwrap(), "method,N,rmse_rel");
    let rates = std::fs::read_to_string(dir.join("rates.csv")).unwrap();
    assert_eq!(rates.lines().next().unwrap(), "method,slope,stderr");
    assert!(rates.contains("\nmc,") && rates.contains("\npre-qmc,"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn converge_is_deterministic() {
    let run = |name| {
        let dir = scratch_dir(name);
        let o = preint(&[
            "converge",
            "--d",
            "3",
            "--N",
            "32",
            "--N",
            "128",
            "--reps",
            "2",
            "--reference",
            "0.72",
            "--seed",
            "9",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        let text = std::fs::read_to_string(dir.join("estimates.csv")).unwrap();
        std::fs::remove_dir_all(&dir).ok();
        text
    };
    assert_eq!(run("det-a"), run("det-b"));
}

#[test]
fn anova_emits_variance_table() {
    let o = preint(&["anova", "--d", "2", "--nodes", "16"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "kind,subset,variance");
    assert!(text.contains("\nterm,{1},") && text.contains("\nterm,\"{1,2}\","));
    assert!(text.contains("\nprojected,1,"));
}

#[test]
fn anova_rejects_large_dimensions() {
    let o = preint(&["anova", "--d", "7"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("d ≤ 6"));
}

#[test]
fn check_suite_passes() {
    let o = preint(&["check", "--d", "32"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn bad_arguments_are_reported() {
    assert!(!preint(&["price", "--method", "sobol"]).status.success());
    assert!(
        !preint(&["converge", "--N", "1000", "--d", "2", "--reference", "0.7"])
            .status
            .success()
    );
    assert!(!preint(&["price", "--sigma", "-1"]).status.success());
    let o = preint(&["price", "--d", "2000", "--N", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn direction_file_extends_dimensions() {
    let dir = scratch_dir("dirnums");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("table.txt");
    std::fs::write(&path, "d s a m_i\n2 1 0 1\n3 2 1 1 3\n4 3 1 1 3 1\n").unwrap();
    let ok = preint(&[
        "price",
        "--d",
        "4",
        "--N",
        "8",
        "--method",
        "qmc",
        "--dirnums",
        path.to_str().unwrap(),
    ]);
    assert!(ok.status.success());
    let short = preint(&[
        "price",
        "--d",
        "6",
        "--N",
        "8",
        "--method",
        "qmc",
        "--dirnums",
        path.to_str().unwrap(),
    ]);
    assert_eq!(short.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}
