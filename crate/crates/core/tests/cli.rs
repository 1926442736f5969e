use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gwforest::format::parse_matrix_file;
use gwforest::stochmat::validate_stochastic;
use tempfile::TempDir;

fn gwforest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gwforest")).args(args).output().expect("binary runs")
}

fn summary(dir: &Path) -> HashMap<String, String> {
    fs::read_to_string(dir.join("summary.txt"))
        .expect("summary exists")
        .lines()
        .map(|l| {
            let (k, v) = l.split_once(": ").expect("key: value line");
            (k.to_string(), v.to_string())
        })
        .collect()
}

fn run_ok(args: &[&str], dir: &TempDir) -> HashMap<String, String> {
    let mut all = args.to_vec();
    all.extend(["--out", dir.path().to_str().unwrap()]);
    let out = gwforest(&all);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    summary(dir.path())
}

#[test]
fn diffuse_on_bundled_instance() {
    let dir = TempDir::new().unwrap();
    let s = run_ok(&["diffuse", "--epsilon", "1e-8"], &dir);
    assert_eq!(s["mode"], "fixed-point");
    assert_eq!(s["iterations"], "54");
    assert_eq!(s["criterion_norm"], "frobenius");
    assert_eq!(s["final_state_files"], "final_0.csv");
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let lines: Vec<&str> = trace.lines().collect();
    assert_eq!(lines[0], "iteration,one_step_diff,two_step_diff");
    assert_eq!(lines.len(), 55);
    assert!(lines[1].ends_with(','), "no two-step difference at the first step");
    let f = parse_matrix_file(dir.path().join("final_0.csv")).unwrap();
    assert!(validate_stochastic(&f, 1e-12).passed);
}

#[test]
fn pagerank_on_bundled_instance() {
    let dir = TempDir::new().unwrap();
    let s = run_ok(&["pagerank", "--alpha", "0.9"], &dir);
    assert_eq!(s["iterations"], "42");
    assert_eq!(s["alpha"], "0.9");
    assert_eq!(s["immigration_identical_rows"], "false");
}

#[test]
fn max_norm_variant_is_recorded() {
    let dir = TempDir::new().unwrap();
    let s = run_ok(&["diffuse", "--norm", "max", "--comparison", "le"], &dir);
    assert_eq!(s["iterations"], "52");
    assert_eq!(s["criterion_norm"], "max");
    assert_eq!(s["comparison"], "le");
}

#[test]
fn alternate_pagerank_writes_both_cycle_states() {
    let dir = TempDir::new().unwrap();
    let s = run_ok(&["alternate-pagerank", "--lambda", "0.6", "--variant", "both", "--convention", "first-even"], &dir);
    assert_eq!(s["mode"], "period-2");
    assert_eq!(s["convention"], "first-even");
    assert_eq!(s["final_state_files"], "final_0.csv,final_1.csv");
    assert!(dir.path().join("final_1.csv").exists());
}

#[test]
fn alternate_diffuse_needs_lambda() {
    let dir = TempDir::new().unwrap();
    let out = gwforest(&["alternate-diffuse", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--lambda"));
    let s = run_ok(&["alternate-diffuse", "--lambda", "0.3333333333333333"], &dir);
    assert_eq!(s["mode"], "fixed-point");
}

#[test]
fn analyze_edge_list_echoes_both_labelings() {
    let dir = TempDir::new().unwrap();
    let edges = dir.path().join("edges.txt");
    fs::write(&edges, "0 1 5\n0 2 3\n1 2 8\n").unwrap();
    let s = run_ok(&["analyze", "--input", edges.to_str().unwrap(), "--format", "edgelist", "--undirected"], &dir);
    assert_eq!(s["irreducible"], "true");
    assert_eq!(s["period"], "1");
    assert_eq!(s["regularity_index"], "2");
    assert_eq!(s["classes"], "{0,1,2}");
    assert_eq!(s["classes_1based"], "{1,2,3}");
    let pi: Vec<f64> = s["pi"].split(',').map(|v| v.trim().parse().unwrap()).collect();
    for (got, want) in pi.iter().zip([8.0 / 32.0, 13.0 / 32.0, 11.0 / 32.0]) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn exhausted_run_exits_2_and_still_writes_artifacts() {
    let dir = TempDir::new().unwrap();
    let swap = dir.path().join("swap.csv");
    fs::write(&swap, "0,1\n1,0\n").unwrap();
    let out = gwforest(&["diffuse", "--input", swap.to_str().unwrap(), "--max-iters", "20", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let s = summary(dir.path());
    assert_eq!(s["mode"], "exhausted");
    assert_eq!(s["iterations"], "20");
    assert_ne!(s["warnings"], "none");
}

#[test]
fn ragged_input_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "1,0\n0.5,0.25,0.25\n").unwrap();
    let out = gwforest(&["diffuse", "--input", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert!(!dir.path().join("summary.txt").exists());
}

#[test]
fn written_states_round_trip() {
    let dir = TempDir::new().unwrap();
    run_ok(&["pagerank"], &dir);
    let first = parse_matrix_file(dir.path().join("final_0.csv")).unwrap();
    let again = dir.path().join("again.csv");
    gwforest::format::write_matrix_file(&again, &first, None).unwrap();
    assert_eq!(fs::read_to_string(&again).unwrap(), gwforest::format::matrix_to_string(&first));
    assert_eq!(parse_matrix_file(&again).unwrap(), first);
}

#[test]
fn simulate_is_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = ["simulate", "--generations", "3", "--replicates", "20000", "--seed", "11"];
    let s = run_ok(&args, &a);
    run_ok(&args, &b);
    assert_eq!(s["mechanism"], "pure-mutation");
    let law = |d: &TempDir| fs::read_to_string(d.path().join("final_0.csv")).unwrap();
    assert_eq!(law(&a), law(&b));
    assert!(s["max_row_tv"].parse::<f64>().unwrap() < 0.02);
    let s = run_ok(&["simulate", "--alpha", "0.9", "--generations", "5", "--replicates", "20000"], &a);
    assert_eq!(s["mechanism"], "immigration");
    assert_eq!(fs::read_to_string(a.path().join("trace.csv")).unwrap().lines().count(), 7);
}

#[test]
fn verify_prints_one_line_per_check() {
    let dir = TempDir::new().unwrap();
    let out = gwforest(&["verify", "--out", dir.path().to_str().unwrap()]);
    let table = String::from_utf8_lossy(&out.stdout);
    let verdicts = table.lines().filter(|l| l.starts_with("[PASS]") || l.starts_with("[FAIL]")).count();
    assert_eq!(verdicts, 12);
    let all_pass = table.lines().filter(|l| l.starts_with("[FAIL]")).count() == 0;
    assert_eq!(out.status.code(), Some(if all_pass { 0 } else { 3 }));
    assert_eq!(summary(dir.path())["total"], "12");
}
