use std::path::Path;
use std::process::{Command, Output};

use hypconv::report::parse_csv;

fn hypconv(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypconv"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["converge", "--spatial", "fd9"][..],
        &["converge", "--problem", "heat"],
        &["converge", "--spatial", "fd1", "--prognostic", "integrated"],
        &["converge", "--eta-space", "abc"],
        &["bogus"],
        &[],
        &["figure", "fig3"],
        &["ode-verify", "--method", "rk9"],
    ] {
        let o = hypconv(args, dir.path());
        assert_eq!(code(&o), 1, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(code(&hypconv(&["--help"], dir.path())), 0);
}

#[test]
fn converge_is_deterministic_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "converge", "--problem", "nonlinear", "--spatial", "ppr", "--stepper", "rk3", "--mode", "space-only",
        "--ncells", "16,32,64", "--horizon", "0.0625", "--out",
    ];
    let mut texts = Vec::new();
    for run in ["a.csv", "b.csv"] {
        let mut a = args.to_vec();
        a.push(run);
        let o = hypconv(&a, dir.path());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        texts.push(std::fs::read(dir.path().join(run)).unwrap());
        assert!(dir.path().join(run).with_extension("svg").exists());
    }
    assert_eq!(texts[0], texts[1]);
    let text = String::from_utf8(texts.swap_remove(0)).unwrap();
    let parsed = parse_csv(&text).unwrap();
    assert_eq!(parsed.levels.len(), 3);
    assert!(parsed.levels[0].succ_diff.is_none());
    assert!(parsed.levels[2].succ_diff.is_some());
    assert!(parsed.meta.overrides.contains(&"horizon=0.0625".to_owned()));
    assert_eq!(hypconv::report::csv_string(&parsed), text);
}

#[test]
fn config_file_is_layered_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "problem = linear\nspatial = fd2\nstepper = rk2\nncells = 32,64,128\nhorizon = 0.125\n",
    )
    .unwrap();
    let o = hypconv(
        &["converge", "--config", "run.cfg", "--stepper", "rk3", "--out", "out.csv"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = parse_csv(&std::fs::read_to_string(dir.path().join("out.csv")).unwrap()).unwrap();
    assert_eq!(r.meta.stepper, "rk3");
    assert_eq!(r.meta.scheme, "fd2");
    assert_eq!(r.meta.horizon, 0.125);

    std::fs::write(dir.path().join("bad.cfg"), "colour = red\n").unwrap();
    assert_eq!(code(&hypconv(&["converge", "--config", "bad.cfg"], dir.path())), 1);
}

#[test]
fn strict_flags_blow_up() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "solve", "--problem", "nonlinear", "--spatial", "ppr", "--stepper", "fe1", "--eta-space", "0.9",
        "--horizon", "20", "--ncells", "64",
    ];
    let o = hypconv(&args, dir.path());
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("stable=false"));
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(code(&hypconv(&strict, dir.path())), 2);
}

#[test]
fn ode_verify_reports_order() {
    let dir = tempfile::tempdir().unwrap();
    let o = hypconv(&["ode-verify", "--method", "trap", "--ode", "decay-sine"], dir.path());
    assert_eq!(code(&o), 0);
    let line = String::from_utf8(o.stdout).unwrap();
    assert!(line.starts_with("PASS method=trap"), "{line}");
    assert_eq!(line.lines().count(), 1);
}

#[test]
fn solve_writes_profile() {
    let dir = tempfile::tempdir().unwrap();
    let o = hypconv(
        &["solve", "--spatial", "ppr-mono", "--stepper", "rk3", "--ncells", "32", "--out", "."],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("solve_linear_ppr-mono_rk3_n32.csv")).unwrap();
    assert_eq!(text.lines().count(), 33);
}
