use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: &str = r#"{
    "node_count": 30,
    "area_width": 100.0,
    "area_height": 100.0,
    "initial_energy": 0.02,
    "coverage_grid_cells": 10,
    "sensing_radius": 15.0
}"#;

fn minen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minen"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write_config(dir: &Path, name: &str, extra: &str) -> String {
    let mut text = SMALL.trim_end().trim_end_matches('}').to_string();
    if !extra.is_empty() {
        text.push_str(",\n");
        text.push_str(extra);
    }
    text.push_str("\n}\n");
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_three_outputs_and_a_log() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", "");
    let out = tmp.path().join("out");
    let o = minen(&["run", "--config", &cfg, "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["metrics.csv", "coverage.csv", "summary.json", "run.log"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert!(metrics.starts_with("round,alive,awake,total_energy_j,heads\n"));
    assert!(!metrics.contains('\r'));
    let coverage = fs::read_to_string(out.join("coverage.csv")).unwrap();
    assert_eq!(coverage.lines().count(), 1 + 100);
    assert!(!out.join("routes.jsonl").exists());
}

#[test]
fn missing_config_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let o = minen(&["run", "--config", s(&tmp.path().join("nope.json")), "--out", s(tmp.path())]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bad_config_and_bad_flags_exit_two() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#""no_such_key": 1"#);
    let o = minen(&["run", "--config", &cfg, "--out", s(&tmp.path().join("a"))]);
    assert_eq!(code(&o), 2);
    let o = minen(&["run", "--protocol", "teen", "--out", s(&tmp.path().join("b"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", "");
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = minen(&["run", "--config", &cfg, "--out", s(&blocker.join("sub"))]);
    assert_eq!(code(&o), 3);
}

#[test]
fn same_seed_gives_identical_bytes() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", "");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&minen(&["run", "--config", &cfg, "--seed", "7", "--out", s(&a)])), 0);
    assert_eq!(code(&minen(&["run", "--config", &cfg, "--seed", "7", "--out", s(&b)])), 0);
    for f in ["metrics.csv", "coverage.csv", "summary.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let c = tmp.path().join("c");
    assert_eq!(code(&minen(&["run", "--config", &cfg, "--seed", "8", "--out", s(&c)])), 0);
    assert_ne!(fs::read(a.join("summary.json")).unwrap(), fs::read(c.join("summary.json")).unwrap());
}

#[test]
fn existing_outputs_need_force() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", "");
    let out = tmp.path().join("out");
    assert_eq!(code(&minen(&["run", "--config", &cfg, "--out", s(&out)])), 0);
    let before = fs::read(out.join("summary.json")).unwrap();
    let o = minen(&["run", "--config", &cfg, "--seed", "3", "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    assert_eq!(fs::read(out.join("summary.json")).unwrap(), before);
    let o = minen(&["run", "--config", &cfg, "--seed", "3", "--out", s(&out), "--force"]);
    assert_eq!(code(&o), 0);
    assert_ne!(fs::read(out.join("summary.json")).unwrap(), before);
}

#[test]
fn overrides_beat_the_config_file() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#""protocol": "leach", "rng_seed": 4"#);
    let out = tmp.path().join("out");
    let o = minen(&["run", "--config", &cfg, "--protocol", "fcm", "--seed", "9", "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    let summary = fs::read_to_string(out.join("summary.json")).unwrap();
    assert!(summary.contains(r#""protocol": "fcm""#));
    assert!(summary.contains(r#""seed": 9"#));
}

#[test]
fn trace_routes_writes_one_record_per_round() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#""max_rounds": 5"#);
    let out = tmp.path().join("out");
    let o = minen(&["run", "--config", &cfg, "--out", s(&out), "--trace-routes"]);
    assert_eq!(code(&o), 0);
    let routes = fs::read_to_string(out.join("routes.jsonl")).unwrap();
    assert_eq!(routes.lines().count(), 5);
    assert!(routes.lines().all(|l| l.starts_with(r#"{"round":"#)));
}

#[test]
fn compare_three_protocols_over_ten_seeds() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#""variants": [{"protocol": "minen"}, {"protocol": "leach"}, {"protocol": "fcm"}]"#,
    );
    let out = tmp.path().join("out");
    let o = minen(&["compare", "--config", &cfg, "--seeds", "1..10", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out.join("comparison.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(
        lines.next().unwrap(),
        "variant,seed,first_death,rounds_30pct,rounds_50pct,rounds_total"
    );
    assert_eq!(lines.count(), 30);
    let medians = fs::read_to_string(out.join("medians.csv")).unwrap();
    assert_eq!(medians.lines().count(), 4);
    assert!(out.join("00-minen").join("seed-10").join("summary.json").exists());
}

#[test]
fn compare_needs_two_variants() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#""variants": [{"protocol": "leach"}]"#);
    let o = minen(&["compare", "--config", &cfg, "--out", s(&tmp.path().join("out"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn duplicated_variants_have_identical_medians() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#""variants": [{"protocol": "fcm"}, {"protocol": "fcm"}], "seeds": [1, 2, 3]"#,
    );
    let out = tmp.path().join("out");
    assert_eq!(code(&minen(&["compare", "--config", &cfg, "--out", s(&out)])), 0);
    let medians = fs::read_to_string(out.join("medians.csv")).unwrap();
    let rows: Vec<&str> = medians.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], rows[1]);
}

#[test]
fn single_seed_sweep_equals_run() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", "");
    let run_out = tmp.path().join("run");
    let sweep_out = tmp.path().join("sweep");
    assert_eq!(code(&minen(&["run", "--config", &cfg, "--seed", "5", "--out", s(&run_out)])), 0);
    assert_eq!(code(&minen(&["sweep", "--config", &cfg, "--seeds", "5..5", "--out", s(&sweep_out)])), 0);
    for f in ["metrics.csv", "coverage.csv", "summary.json"] {
        assert_eq!(
            fs::read(run_out.join(f)).unwrap(),
            fs::read(sweep_out.join("seed-5").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", "");
    let one = tmp.path().join("one");
    let four = tmp.path().join("four");
    let o = minen(&["sweep", "--config", &cfg, "--seeds", "1..10", "--workers", "1", "--out", s(&one)]);
    assert_eq!(code(&o), 0);
    let o = minen(&["sweep", "--config", &cfg, "--seeds", "1..10", "--workers", "4", "--out", s(&four)]);
    assert_eq!(code(&o), 0);
    for f in ["sweep.csv", "aggregate.csv"] {
        assert_eq!(fs::read(one.join(f)).unwrap(), fs::read(four.join(f)).unwrap(), "{f}");
    }
    let aggregate = fs::read_to_string(one.join("aggregate.csv")).unwrap();
    assert!(aggregate.starts_with("variant,runs,first_death_median,"));
    assert!(aggregate.lines().nth(1).unwrap().starts_with("minen-none,10,"));
}

#[test]
fn empty_seed_list_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", "");
    let o = minen(&["sweep", "--config", &cfg, "--seeds", "5..3", "--out", s(&tmp.path().join("out"))]);
    assert_eq!(code(&o), 2);
    let cfg = write_config(tmp.path(), "d.json", r#""seeds": []"#);
    let o = minen(&["sweep", "--config", &cfg, "--out", s(&tmp.path().join("out2"))]);
    assert_eq!(code(&o), 2);
}
