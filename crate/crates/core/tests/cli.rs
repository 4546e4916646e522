use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use softsched::harness::TABLE_HEADER;

fn softsched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_softsched"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn help_lists_flags() {
    let text = stdout(&softsched(&["--help"]));
    for flag in [
        "--config",
        "--beta-min",
        "--solver",
        "--delta",
        "--fixture",
        "--out",
        "--detail",
    ] {
        assert!(text.contains(flag), "missing {flag}");
    }
}

#[test]
fn conflict_fixture_table() {
    let out = stdout(&softsched(&[
        "--fixture",
        &fixture("ex3_conflict.json"),
        "--runs",
        "1",
        "--beta-min",
        "0",
        "--beta-max",
        "0",
    ]));
    assert_eq!(
        out,
        format!(
            "{TABLE_HEADER}\n\
             0,0,0,soft,1,0.5,0,0.4\n\
             0,0,0,coloring,1,0.833333333,0,0\n\
             0,0,0,none,1,1,0,-0.2\n"
        )
    );
}

#[test]
fn topology_fixture_reports_its_own_size() {
    let out = stdout(&softsched(&[
        "--fixture",
        &fixture("line4_topology.json"),
        "--runs",
        "2",
        "--modes",
        "none",
    ]));
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 7);
    // Two sessions, three and two hops, three packets in total.
    // Without coloring in the run there is no gain to report.
    assert!(rows
        .iter()
        .all(|r| r.starts_with("4,2,") && r.ends_with(",none,2,2.66666667,0,")));
}

#[test]
fn output_file_matches_stdout_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("table.csv");
    let detail = dir.path().join("detail.csv");
    let args = ["--runs", "20", "--seed", "11", "--sessions", "4", "--beta-step", "10"];
    let printed = stdout(&softsched(&args));
    let mut with_files = args.to_vec();
    let (out_s, detail_s) = (out.display().to_string(), detail.display().to_string());
    with_files.extend(["--out", &out_s, "--detail", &detail_s]);
    assert!(stdout(&softsched(&with_files)).is_empty());

    let written = fs::read_to_string(&out).unwrap();
    assert_eq!(written, printed);
    assert!(!written.contains('\r'));
    assert_eq!(written.lines().next(), Some(TABLE_HEADER));
    assert_eq!(written.lines().count(), 1 + 4 * 3);
    let detail_text = fs::read_to_string(&detail).unwrap();
    assert_eq!(detail_text.lines().count(), 1 + 20 * 4 * 3);
    assert_eq!(stdout(&softsched(&args)), printed);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        "n_nodes = 8\nn_sessions = 3\nruns = 5\nseed = 2\nmodes = [\"coloring\", \"none\"]\n\
         [beta_sweep]\nmin_db = 10.0\nmax_db = 20.0\nstep_db = 10.0\n",
    )
    .unwrap();
    let cfg_s = cfg.display().to_string();
    let out = stdout(&softsched(&["--config", &cfg_s, "--runs", "3"]));
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("8,3,10,coloring,3,"));
    assert!(rows[3].starts_with("8,3,20,none,3,"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "nodez = 8\n").unwrap();
    let o = softsched(&["--config", &cfg.display().to_string()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.toml"));
}

#[test]
fn invalid_arguments_fail() {
    let o = softsched(&["--runs", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    let o = softsched(&["--modes", "soft,bogus"]);
    assert_eq!(o.status.code(), Some(2));

    let o = softsched(&["--fixture", "/nonexistent/fixture.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/fixture.json"));
}

#[test]
fn exact_solver_on_fixture() {
    let out = stdout(&softsched(&[
        "--fixture",
        &fixture("ex3_conflict.json"),
        "--runs",
        "1",
        "--beta-min",
        "0",
        "--beta-max",
        "0",
        "--solver",
        "exact",
        "--modes",
        "soft",
    ]));
    assert_eq!(out, format!("{TABLE_HEADER}\n0,0,0,soft,1,0.5,0,\n"));
}

#[test]
fn shipped_config_matches_defaults() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/desk.toml");
    let cfg = softsched::harness::ExperimentConfig::read(&path).unwrap();
    assert_eq!(cfg, softsched::harness::ExperimentConfig::default());
    let out = stdout(&softsched(&["--config", &path.display().to_string(), "--runs", "2"]));
    assert_eq!(out.lines().count(), 1 + 7 * 3);
}
