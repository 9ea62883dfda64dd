use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn coopmitl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coopmitl"))
        .args(args)
        .output()
        .unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("coopmitl-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn short_scenario() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data/short.toml")
        .display()
        .to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn check_reports_bad_intervals() {
    let out = coopmitl(&["check", "p U[3,2] q"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("invalid interval"),
        "{}",
        stderr(&out)
    );

    let out = coopmitl(&["check", "G[0,inf) !obs & F[0,50] green"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("plannable: yes"));

    let out = coopmitl(&["check", "F p"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("plannable: no"));
}

#[test]
fn unreachable_goal_has_no_accepting_run() {
    let out = coopmitl(&[
        "plan",
        "--scenario",
        &short_scenario(),
        "--formula",
        "F[0,4] goal",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("no accepting run"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(coopmitl(&["plan", "--bogus"]).status.code(), Some(2));
    assert_eq!(
        coopmitl(&["plan", "--scenario", "/nonexistent/scenario.toml"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        coopmitl(&["plan", "--formula", "F[0,5"]).status.code(),
        Some(2)
    );
    assert_eq!(coopmitl(&["plan", "--dt", "0.5"]).status.code(), Some(2));
}

#[test]
fn plan_simulate_verify_round_trip() {
    let dir = scratch("round-trip");
    let (plan, trace, report) = (
        dir.join("plan.json"),
        dir.join("trace.csv"),
        dir.join("report.json"),
    );
    let sc = short_scenario();
    let p = plan.to_str().unwrap();
    let t = trace.to_str().unwrap();

    assert_eq!(
        coopmitl(&["plan", "--scenario", &sc, "--plan", p])
            .status
            .code(),
        Some(0)
    );
    let out = coopmitl(&["simulate", "--scenario", &sc, "--plan", p, "--trace", t]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = coopmitl(&[
        "verify",
        "--scenario",
        &sc,
        "--plan",
        p,
        "--trace",
        t,
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(std::fs::read_to_string(&report)
        .unwrap()
        .contains("\"ok\": true"));

    let out = coopmitl(&[
        "verify",
        "--scenario",
        &sc,
        "--plan",
        p,
        "--trace",
        t,
        "--formula",
        "G[0,inf) !goal",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("violates the formula"),
        "{}",
        stderr(&out)
    );

    let text = std::fs::read_to_string(&trace).unwrap();
    let cut: Vec<&str> = text.lines().take(2000).collect();
    std::fs::write(&trace, cut.join("\n") + "\n").unwrap();
    let out = coopmitl(&["verify", "--scenario", &sc, "--plan", p, "--trace", t]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("does not cover the plan"),
        "{}",
        stderr(&out)
    );
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn run_writes_all_three_files() {
    let dir = scratch("run");
    let sc = short_scenario();
    let out = coopmitl(&[
        "run",
        "--scenario",
        &sc,
        "--out",
        dir.to_str().unwrap(),
        "--seed",
        "3",
        "--paper-faithful-envelopes",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    for f in ["plan.json", "trace.csv", "report.json"] {
        assert!(dir.join(f).is_file(), "{f}");
    }
    assert!(std::fs::read_to_string(dir.join("trace.csv"))
        .unwrap()
        .starts_with("# coopmitl-trace version=1 seed=3"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn run_of_the_transport_scenario_succeeds() {
    let dir = scratch("transport");
    let sc = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/transport.toml");
    let out = coopmitl(&[
        "run",
        "--scenario",
        sc.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = std::fs::read_to_string(dir.join("report.json")).unwrap();
    assert!(report.contains("\"satisfied\": true"));
    std::fs::remove_dir_all(&dir).unwrap();
}
