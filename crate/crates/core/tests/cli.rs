//! Command-line behaviour through the in-process entry point.

use vortex_patch::cli::run_with;
use vortex_patch::io::read_states_binary;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("vpatch").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn value_after(text: &str, key: &str) -> f64 {
    let line = text
        .lines()
        .find(|l| l.starts_with(key))
        .unwrap_or_else(|| panic!("no `{key}` in {text}"));
    line.rsplit('=').next().unwrap().trim().parse().unwrap()
}

#[test]
fn spectrum_table_has_degenerate_second_mode() {
    let (code, out, _) = run(&["spectrum", "--gamma", "2", "--n-max", "8"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "omega_n").unwrap();
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    assert_eq!(rows.len(), 8);
    let om2: f64 = rows[1][col].parse().unwrap();
    assert!(om2.abs() <= 1e-15);
    assert_eq!(rows[1][header.len() - 1], "degenerate");
}

#[test]
fn spectrum_lower_bound_goes_to_stderr() {
    let (code, out, err) = run(&[
        "spectrum",
        "--gamma",
        "2",
        "--n-max",
        "40",
        "--lower-bound",
        "1.5",
        "2.5",
        "--n-bar",
        "2",
    ]);
    assert_eq!(code, 0);
    assert!(!out.contains("empirical"));
    let line = err.lines().next().unwrap();
    let c: f64 = line
        .strip_prefix("empirical c = ")
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(c > 0.0);
}

#[test]
fn critical_gamma_of_mode_three() {
    let (code, out, _) = run(&["critical-gammas", "--n", "3"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "3.0000000000");
    let (code, out, _) = run(&["critical-gammas", "--n-max", "6"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 5);
    assert!(out.lines().nth(2).unwrap().starts_with("4,4.6115817893"));
}

#[test]
fn simulate_from_rest_stays_at_rest() {
    let (code, out, _) = run(&[
        "simulate",
        "--gamma",
        "2",
        "--n-points",
        "64",
        "--dt",
        "0.01",
        "--t-end",
        "1",
        "--omega",
        "equilibrium",
        "--xi0",
        "zero",
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(value_after(&out, "max|xi|") <= 1e-9);
}

#[test]
fn simulate_writes_files_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let go = |tag: &str| {
        let csv = dir.path().join(format!("{tag}.csv"));
        let bin = dir.path().join(format!("{tag}.bin"));
        let (code, out, _) = run(&[
            "simulate",
            "--gamma",
            "2.5",
            "--n-points",
            "32",
            "--dt",
            "0.01",
            "--t-end",
            "0.2",
            "--xi0",
            "random",
            "--amplitude",
            "1e-3",
            "--seed",
            "7",
            "--stride",
            "5",
            "--out",
            csv.to_str().unwrap(),
            "--states",
            bin.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        (
            out,
            std::fs::read(csv).unwrap(),
            std::fs::read(bin).unwrap(),
        )
    };
    let (o1, c1, b1) = go("a");
    let (o2, c2, b2) = go("b");
    assert_eq!(o1, o2);
    assert_eq!(c1, c2);
    assert_eq!(b1, b2);
    let states = read_states_binary(&b1, 32);
    assert_eq!(states.len(), 5);
    assert!((states[4].0 - 0.2).abs() < 1e-12);
    assert!(value_after(&o1, "drift J").abs() < 1e-10);
}

#[test]
fn rectify_check_reports_json() {
    let (code, out, _) = run(&[
        "rectify-check",
        "--gamma",
        "2",
        "--n-points",
        "32",
        "--samples",
        "3",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    let data = v.get("data").unwrap_or(&v);
    assert_eq!(data["passed"], serde_json::Value::Bool(true));
    assert!(data["empirical_radius"].as_f64().unwrap() > 0.0);
}

#[test]
fn resonance_summary_is_json() {
    let (code, out, _) = run(&[
        "resonance",
        "--sites",
        "4",
        "--n-bar",
        "2",
        "--upsilon",
        "1e-3",
        "--l-max",
        "4",
        "--n-max",
        "10",
        "--gamma-min",
        "1.5",
        "--gamma-max",
        "2.0",
        "--d-gamma",
        "0.1",
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(serde_json::from_str::<serde_json::Value>(out.trim()).is_ok());
}

#[test]
fn invalid_arguments_exit_with_one() {
    for args in [
        vec!["spectrum", "--gamma", "0.5"],
        vec!["spectrum", "--gamma", "abc"],
        vec!["critical-gammas", "--n", "2"],
        vec!["simulate", "--gamma", "2", "--xi0", "mode:999"],
        vec!["simulate", "--omega", "fast"],
        vec!["rectify-check", "--gamma", "1"],
        vec!["resonance", "--sites", "2", "--n-bar", "2"],
        vec!["nonsense"],
    ] {
        let (code, _, err) = run(&args);
        assert_eq!(code, 1, "{args:?}");
        assert!(!err.is_empty());
    }
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).0, 0);
    assert_eq!(run(&["--version"]).0, 0);
}
