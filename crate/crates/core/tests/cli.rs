// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

use fused_pattern::io::{read_sequence, write_signal};
use fused_pattern::{benchmark_signal, ICReport};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fused-pattern"));
    c.env_remove(fused_pattern::cli::SEED_ENV);
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_benchmark(dir: &Path) -> String {
    let p = dir.join("signal.csv");
    write_signal(std::fs::File::create(&p).unwrap(), &benchmark_signal()).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn fit_two_points() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("y.csv");
    std::fs::write(&input, "index,value\n1,0\n2,2\n").unwrap();
    let out = run(&[
        "fit",
        "--input",
        input.to_str().unwrap(),
        "--lambda2",
        "1.0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let fit = read_sequence(out.stdout.as_slice()).unwrap();
    assert_eq!(fit, vec![1.0, 1.0]);
}

#[test]
fn check_ic_on_benchmark() {
    let dir = tempfile::tempdir().unwrap();
    let signal = write_benchmark(dir.path());
    let out = run(&["check-ic", "--signal", &signal]);
    assert_eq!(out.status.code(), Some(0));
    let report: ICReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(!report.holds);
    assert_eq!(report.positions, vec![101, 111, 211, 221, 321, 331]);
}

#[test]
fn bound_value() {
    let out = run(&["bound", "--lambda", "2", "--sigma", "0.25", "--n", "430"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "0.7115");
}

#[test]
fn lasso_bound_refuses_violating_signal() {
    let dir = tempfile::tempdir().unwrap();
    let signal = write_benchmark(dir.path());
    let out = run(&[
        "bound", "--kind", "lasso", "--signal", &signal, "--lambda", "1", "--sigma", "0.1",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let ok = dir.path().join("ok.csv");
    std::fs::write(&ok, "L,U,level\n1,10,0\n11,20,3\n21,30,0\n").unwrap();
    let out = run(&[
        "bound",
        "--kind",
        "lasso",
        "--signal",
        ok.to_str().unwrap(),
        "--lambda",
        "1",
        "--sigma",
        "0.1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("probability="));
}

#[test]
fn simulate_round_trips_into_fit_and_precondition() {
    let dir = tempfile::tempdir().unwrap();
    let signal = write_benchmark(dir.path());
    let draw = dir.path().join("draw.csv");
    let out = run(&[
        "simulate",
        "--signal",
        &signal,
        "--sigma",
        "0.25",
        "--seed",
        "4",
        "--output",
        draw.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let y = read_sequence(std::fs::File::open(&draw).unwrap()).unwrap();
    assert_eq!(y.len(), 430);

    let fitted = run(&["fit", "--input", draw.to_str().unwrap(), "--lambda2", "0.5"]);
    assert_eq!(fitted.status.code(), Some(0));
    assert_eq!(read_sequence(fitted.stdout.as_slice()).unwrap().len(), 430);

    let bps = dir.path().join("bps.csv");
    let pre = run(&[
        "precondition",
        "--input",
        draw.to_str().unwrap(),
        "--lambda",
        "1",
        "--breakpoints",
        bps.to_str().unwrap(),
    ]);
    assert_eq!(pre.status.code(), Some(0));
    assert_eq!(read_sequence(pre.stdout.as_slice()).unwrap().len(), 430);
    let lines = std::fs::read_to_string(&bps).unwrap();
    assert_eq!(lines.lines().next(), Some("rank,lambda"));
    assert_eq!(lines.lines().count(), 430);
}

#[test]
fn outputs_are_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let signal = write_benchmark(dir.path());
    let a = run(&[
        "simulate", "--signal", &signal, "--sigma", "0.3", "--seed", "9",
    ]);
    let b = run(&[
        "simulate", "--signal", &signal, "--sigma", "0.3", "--seed", "9",
    ]);
    assert_eq!(a.stdout, b.stdout);

    let env = bin()
        .env(fused_pattern::cli::SEED_ENV, "9")
        .args(["simulate", "--signal", &signal, "--sigma", "0.3"])
        .output()
        .unwrap();
    assert_eq!(env.stdout, a.stdout);

    let s1 = run(&[
        "sweep", "--sigmas", "0.2,0.3", "--reps", "30", "--seed", "1",
    ]);
    let s2 = run(&[
        "sweep", "--sigmas", "0.2,0.3", "--reps", "30", "--seed", "1",
    ]);
    assert_eq!(s1.status.code(), Some(0));
    assert_eq!(s1.stdout, s2.stdout);
    let text = String::from_utf8(s1.stdout).unwrap();
    assert!(text.starts_with("sigma,probability,stderr\n0.2,"));
}

#[test]
fn path_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("y.csv");
    std::fs::write(&input, "index,value\n1,0\n2,2\n3,-1\n").unwrap();
    let out = run(&["path", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .starts_with("lambda,first,last,closed\n"));
    let out = run(&[
        "path",
        "--input",
        input.to_str().unwrap(),
        "--method",
        "preconditioned",
    ]);
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "rank,lambda\n1,3\n2,2\n"
    );
}

#[test]
fn exit_codes() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["fit", "--input", "x.csv"]).status.code(), Some(1));
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));

    let missing = run(&["fit", "--input", "/nonexistent/y.csv", "--lambda2", "1"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(!missing.stderr.is_empty());

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "index,value\n1,0\n3,1\n").unwrap();
    assert_eq!(
        run(&["fit", "--input", bad.to_str().unwrap(), "--lambda2", "1"])
            .status
            .code(),
        Some(2)
    );

    let good = dir.path().join("good.csv");
    std::fs::write(&good, "index,value\n1,0\n2,1\n").unwrap();
    let neg = run(&["fit", "--input", good.to_str().unwrap(), "--lambda2=-1"]);
    assert_eq!(neg.status.code(), Some(1));
    let neg_sigma = run(&["bound", "--lambda", "1", "--sigma", "0", "--n", "10"]);
    assert_eq!(neg_sigma.status.code(), Some(1));
}
