use std::path::Path;
use std::process::{Command, Output};

use pdknn::io::{load_csv, normalize_minmax, read_source_csv, split_by_binary, write_source_csv};
use pdknn::PointSet;

fn pdknn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdknn"))
        .args(args)
        .output()
        .expect("spawn pdknn")
}

fn stdout(args: &[&str]) -> String {
    let out = pdknn(args);
    assert!(
        out.status.success(),
        "pdknn {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn simulate(dir: &Path, name: &str, role: &str, n: &str, seed: &str) -> String {
    let path = dir.join(name).to_str().unwrap().to_string();
    stdout(&[
        "simulate", "--dgp", "1", "--kappa", "0.5", "--gamma", "0.6", "--n", n, "--role", role, "--seed", seed,
        "--out", &path,
    ]);
    path
}

#[test]
fn rates_reports_fast_regime() {
    let out = stdout(&[
        "rates", "--alpha", "1", "--gamma", "1", "--beta-p", "1", "--beta-q", "1", "--d", "2", "--np", "100", "--nq", "0",
    ]);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "branch,exponent,exact,regime,rate,suboptimal_bound");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[1], "0.5");
    assert_eq!(row[2], "true");
    assert_eq!(row[3], "Fast");
    assert_eq!(row[4].parse::<f64>().unwrap(), 0.1);
}

#[test]
fn rates_with_target_sample_has_no_regime() {
    let out = stdout(&[
        "rates", "--alpha", "1", "--gamma", "1", "--beta-p", "1", "--beta-q", "1", "--d", "2", "--np", "100", "--nq", "100",
    ]);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[3], "NA");
    assert!((row[4].parse::<f64>().unwrap() - 200f64.powf(-0.5)).abs() < 1e-15);
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = simulate(dir.path(), "a.csv", "Q", "100", "7");
    let b = simulate(dir.path(), "b.csv", "Q", "100", "7");
    let c = simulate(dir.path(), "c.csv", "Q", "100", "8");
    let (a, b, c) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap(), std::fs::read(c).unwrap());
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(String::from_utf8(a).unwrap().starts_with("f0,f1,y\n"));
}

#[test]
fn classify_without_target_uses_source_only() {
    let dir = tempfile::tempdir().unwrap();
    let p = simulate(dir.path(), "p.csv", "P", "200", "1");
    let query = simulate(dir.path(), "x.csv", "Q", "10", "2");
    let out = stdout(&["classify", "--p", &p, "--query", &query]);
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "query,label,k_p,k_q,r,threshold,iterations,stop_reason"
    );
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 10);
    for row in rows {
        assert!(row[2].parse::<usize>().unwrap() >= 1);
        assert_eq!(row[3], "0");
    }
}

#[test]
fn classify_with_extra_sources_adds_columns() {
    let dir = tempfile::tempdir().unwrap();
    let p = simulate(dir.path(), "p.csv", "P", "120", "1");
    let q = simulate(dir.path(), "q.csv", "Q", "60", "2");
    let out = stdout(&["classify", "--p", &p, "--q", &q, "--source", &p, "--query", &q]);
    assert!(out.starts_with("query,label,k_p,k_q,k_2,r,threshold,iterations,stop_reason\n"));
    let refused = pdknn(&["classify", "--p", &p, "--q", &q, "--source", &p, "--query", &q, "--algorithm", "knn-q"]);
    assert!(!refused.status.success());
}

#[test]
fn bench_config_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bench.toml");
    std::fs::write(
        &cfg,
        r#"
[[experiment]]
n_p = 200
n_q = 50
trials = 3
test_points = 20
classifiers = ["ADAPTIVE", "KNN_Q"]
master_seed = 5
dgp = { dgp = "DGP1", kappa = 0.5, gamma = 0.6, d = 2 }
"#,
    )
    .unwrap();
    let from_file = stdout(&["bench", "--config", cfg.to_str().unwrap(), "--omit-timing"]);
    let from_flags = stdout(&[
        "bench", "--np", "200", "--nq", "50", "--trials", "3", "--test-points", "20", "--classifiers",
        "ADAPTIVE,KNN_Q", "--seed", "5", "--omit-timing",
    ]);
    assert_eq!(from_file, from_flags);
    assert_eq!(from_file.lines().count(), 3);
}

#[test]
fn usage_errors_exit_nonzero() {
    let out = pdknn(&["frobnicate"]);
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
    let out = pdknn(&["rates", "--alpha", "1"]);
    assert!(!out.status.success());
    let out = pdknn(&["classify", "--p", "/nonexistent.csv", "--query", "/nonexistent.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn normalized_split_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.csv");
    let mut text = String::from("V1,V2,V3,y\n");
    for i in 0..40 {
        text += &format!("{},{},{},{}\n", i % 2, (i * 37 % 23) as f64 / 7.0, (i * i) as f64 * 0.1, (i / 3) % 2);
    }
    text += "1,,3,1\n";
    std::fs::write(&raw, text).unwrap();

    let table = load_csv(&raw, "y", &["V2", "V3"], Some("V1")).unwrap();
    assert_eq!(table.dropped, 1);
    let (p, q) = split_by_binary(&normalize_minmax(&table)).unwrap();
    assert_eq!((p.len(), q.len()), (20, 20));
    for (name, data) in [("p", &p), ("q", &q)] {
        let path = dir.path().join(format!("{name}.csv"));
        write_source_csv(std::fs::File::create(&path).unwrap(), data).unwrap();
        let back = read_source_csv(&path, data.tag()).unwrap();
        assert_eq!(back.labels(), data.labels());
        for i in 0..data.len() {
            let (a, b) = (back.point(i), data.point(i));
            assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }
}
