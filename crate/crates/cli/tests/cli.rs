// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn psp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psp")).args(args).output().expect("spawn psp")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stats_json(file: &str, isa: &str) -> Value {
    let out = psp(&["stats", path_str(&fixture(file)), "--isa", isa]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    serde_json::from_str(&stdout(&out)).unwrap()
}

#[test]
fn compile_writes_source_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("gcd4.c");
    let out = psp(&["compile", path_str(&fixture("gcd4.blif")), "-o", path_str(&target)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&target).unwrap();
    assert!(text.contains("void gcd4_psp("));
    assert!(stdout(&out).contains("move overhead 96/194"));
}

#[test]
fn compile_ir_to_stdout_keeps_summary_on_stderr() {
    let out = psp(&["compile", path_str(&fixture("pwm8.blif")), "--emit", "ir"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("instructions per tick"));
    assert!(!stdout(&out).contains("instructions per tick"));
}

#[test]
fn cyclic_netlist_is_a_validation_error() {
    let out = psp(&["compile", path_str(&fixture("cyclic.blif"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("combinational cycle"), "{}", stderr(&out));
}

#[test]
fn unreadable_or_malformed_input_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.blif");
    std::fs::write(&bad, ".model m\n.names a\n.bogus\n").unwrap();
    assert_eq!(psp(&["compile", path_str(&bad)]).status.code(), Some(2));
    let missing = dir.path().join("absent.blif");
    assert_eq!(psp(&["compile", path_str(&missing)]).status.code(), Some(2));
}

#[test]
fn json_and_blif_front_ends_agree_on_stats() {
    let blif = stats_json("gcd4.blif", "arm-m4");
    let json = stats_json("gcd4.json", "arm-m4");
    assert_eq!(blif["breakdown"], json["breakdown"]);
    assert_eq!(blif["gate_stats"], json["gate_stats"]);
}

#[test]
fn stats_mnemonics_stay_inside_each_profile() {
    let marshal = ["MOV", "LDR", "STR"];
    for (isa, allowed) in [
        ("arm-m4", &["AND", "BIC", "EOR", "MVN", "ORN", "ORR"][..]),
        ("risc-v", &["AND", "OR", "XOR"][..]),
    ] {
        let v = stats_json("gcd4.blif", isa);
        let breakdown = v["breakdown"].as_object().unwrap();
        for name in breakdown.keys() {
            assert!(allowed.contains(&name.as_str()) || marshal.contains(&name.as_str()), "{isa}: {name}");
        }
        let total: u64 = breakdown.values().map(|c| c.as_u64().unwrap()).sum();
        let moves: u64 =
            breakdown.iter().filter(|(k, _)| marshal.contains(&k.as_str())).map(|(_, c)| c.as_u64().unwrap()).sum();
        assert_eq!(v["overhead"]["total"].as_u64(), Some(total));
        assert_eq!(v["overhead"]["moves"].as_u64(), Some(moves));
        let ratio = v["overhead"]["ratio"].as_f64().unwrap();
        assert!((ratio - moves as f64 / total as f64).abs() < 1e-12);
        assert_eq!(v["repeatable"], Value::Bool(true));
    }
}

#[test]
fn simulate_gcd_reports_done_tick() {
    let out = psp(&[
        "simulate",
        path_str(&fixture("gcd4.blif")),
        "--stimulus",
        path_str(&fixture("gcd_12_8.csv")),
        "--width",
        "8",
        "--check",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let err = stderr(&out);
    assert!(err.contains("first high tick per lane: 3 3 3 3 3 3 3 3"), "{err}");
    let trace = stdout(&out);
    let row3 = trace.lines().find(|l| l.starts_with("3,")).unwrap();
    // q = 4 in every lane: bit 2 set, all others clear; done high
    assert_eq!(row3, "3,0x00,0x00,0xff,0x00,0xff,107");
}

#[test]
fn simulate_pwm_sweep_high_counts_match_duty() {
    let out = psp(&["simulate", path_str(&fixture("pwm8.blif")), "--stimulus", path_str(&fixture("pwm_sweep.csv"))]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let err = stderr(&out);
    let line = err.lines().find(|l| l.starts_with("out: high ticks per lane:")).unwrap();
    let counts: Vec<u64> =
        line.split(':').nth(2).unwrap().split_whitespace().map(|c| c.parse().unwrap()).collect();
    assert_eq!(counts, (0..32).collect::<Vec<u64>>());
}

#[test]
fn missing_stimulus_column_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let stim = dir.path().join("s.csv");
    std::fs::write(&stim, "lane.a,lane.start\n3,1\n").unwrap();
    let out = psp(&["simulate", path_str(&fixture("gcd4.blif")), "--stimulus", path_str(&stim)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains('b'));
}

#[test]
fn random_simulation_is_deterministic_for_a_seed() {
    let run = |seed: &str| {
        let out = psp(&["simulate", path_str(&fixture("simon32_64.blif")), "--ticks", "40", "--seed", seed, "--check"]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        stdout(&out)
    };
    assert_eq!(run("7"), run("7"));
    assert_ne!(run("7"), run("8"));
}

#[test]
fn transpose_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let lanes = dir.path().join("lanes.csv");
    let planes = dir.path().join("planes.csv");
    let back = dir.path().join("back.csv");
    let mut text = String::from("x,y\n");
    for i in 0..70u64 {
        text.push_str(&format!("{},{}\n", (i * 37) % 256, (i * 11 + 5) % 256));
    }
    std::fs::write(&lanes, &text).unwrap();
    let out = psp(&["transpose", path_str(&lanes), "--bits", "8", "-o", path_str(&planes)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = psp(&["transpose", path_str(&planes), "--bits", "8", "--unslice", "-o", path_str(&back)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(std::fs::read(&lanes).unwrap(), std::fs::read(&back).unwrap());
}

#[test]
fn transpose_all_zero_input_gives_zero_planes() {
    let dir = tempfile::tempdir().unwrap();
    let lanes = dir.path().join("zero.csv");
    std::fs::write(&lanes, "v\n0\n0\n0\n").unwrap();
    let out = psp(&["transpose", path_str(&lanes), "--bits", "4", "--width", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.ends_with(",0x00")), "{text}");
}

#[test]
fn transpose_rejects_out_of_range_value_with_row() {
    let dir = tempfile::tempdir().unwrap();
    let lanes = dir.path().join("wide.csv");
    std::fs::write(&lanes, "v\n1\n2\n16\n").unwrap();
    let out = psp(&["transpose", path_str(&lanes), "--bits", "4"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("row 4"), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(psp(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(psp(&["compile"]).status.code(), Some(1));
    assert_eq!(psp(&["compile", "x.blif", "--width", "12"]).status.code(), Some(1));
    assert_eq!(psp(&["--help"]).status.code(), Some(0));
}
