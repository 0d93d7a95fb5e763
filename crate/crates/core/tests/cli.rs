use std::fs;
use std::process::{Command, Output};

fn bmofem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bmofem")).args(args).output().unwrap()
}

#[test]
fn run_prints_csv_to_stdout() {
    let out = bmofem(&[
        "run",
        "--kind",
        "stability",
        "--levels",
        "1..2",
        "--coeff",
        "checkerboard",
        "--kappa",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "level,cells,grad_lp,f_lp,stability_ratio,err_phat,order,coeff_err_l2,conj_gap_ratio,flux_ratio"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1,8,"));
    assert!(lines[2].starts_with("2,32,"));
}

#[test]
fn config_file_and_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"kind": "coeff-decay", "coeff": "smooth", "levels": "0..1"}"#).unwrap();
    let csv = dir.path().join("decay.csv");
    let out = bmofem(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--levels",
        "1..3",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 4);
    let echo = fs::read_to_string(dir.path().join("decay.config.json")).unwrap();
    assert!(echo.contains("\"1..3\""));
    assert!(dir.path().join("decay.coercivity.csv").exists());
    assert!(dir.path().join("decay.meta.json").exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = [
        "run",
        "--kind",
        "hodge-suite",
        "--levels",
        "1..2",
        "--seed",
        "11",
        "--p",
        "3",
    ];
    let a = bmofem(&args);
    let b = bmofem(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_errors_exit_with_two() {
    for args in [
        vec!["run", "--kind", "nonsense"],
        vec!["run", "--levels", "3"],
        vec!["run", "--levels", "4..2"],
        vec!["run", "--p", "0.5"],
        vec!["run", "--kind", "convergence", "--p", "2", "--p-hat", "3"],
        vec!["run", "--solver-tol", "-1"],
        vec!["frobnicate"],
    ] {
        assert_eq!(bmofem(&args).status.code(), Some(2), "{args:?}");
    }
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"kind": "stability", "colour": "blue"}"#).unwrap();
    assert_eq!(
        bmofem(&["run", "--config", cfg.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn io_errors_exit_with_four_and_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(
        bmofem(&["run", "--config", missing.to_str().unwrap()]).status.code(),
        Some(4)
    );
    let out = dir.path().join("sub").join("r.csv");
    let res = bmofem(&["run", "--levels", "1..1", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(4));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}
