//! Black-box tests of the installed binary: exit codes, usage errors, and
//! the artifact contract a shell script would rely on.

use std::path::Path;
use std::process::{Command, Output};

fn polarsim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polarsim"))
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary spawns")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// The smallest valid config: one replica, no steps, defaults elsewhere.
fn smoke_config(outputs: &Path) -> String {
    format!(
        r#"name = "smoke"
n = 2
d = 3
steps = 0
replicas = 1
master_seed = 11
outputs = "{}"

[model]
kind = "signed"
eta = 0.1

[distribution]
kind = "haar"

[init]
kind = "haar_random"
"#,
        outputs.display()
    )
}

#[test]
fn version_prints_the_package_version_and_exits_cleanly() {
    let out = run(polarsim().arg("version"));
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    assert_eq!(stdout_of(&out).trim(), format!("polarsim {}", env!("CARGO_PKG_VERSION")));
}

#[test]
fn no_arguments_is_a_usage_error() {
    let out = run(&mut polarsim());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_suite_is_a_usage_error_naming_the_real_suites() {
    let out = run(polarsim().args(["suite", "no-such-suite"]));
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    for name in
        ["signed-hjmr", "party", "ortho-weak-not-strong", "lemma-checks", "consensus-remark"]
    {
        assert!(err.contains(name), "stderr does not offer {name}: {err}");
    }
}

#[test]
fn missing_config_file_is_a_usage_error() {
    let out = run(polarsim().args(["run", "--config", "/no/such/file.toml"]));
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
}

#[test]
fn malformed_config_text_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "name = \"broken\"\nsteps = \"lots\"\n").unwrap();
    let out = run(polarsim().args(["run", "--config"]).arg(&path));
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
}

#[test]
fn semantically_invalid_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zero-replicas.toml");
    let text = smoke_config(&dir.path().join("out")).replace("replicas = 1", "replicas = 0");
    std::fs::write(&path, text).unwrap();
    let out = run(polarsim().args(["run", "--config"]).arg(&path));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("replicas"), "stderr: {}", stderr_of(&out));
}

#[test]
fn zero_step_run_writes_the_initial_row_and_reruns_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let mut series: Vec<Vec<u8>> = Vec::new();
    for attempt in 0..2 {
        let outputs = dir.path().join(format!("out-{attempt}"));
        let path = dir.path().join(format!("smoke-{attempt}.toml"));
        std::fs::write(&path, smoke_config(&outputs)).unwrap();
        let out = run(polarsim().args(["run", "--config"]).arg(&path));
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
        for artifact in ["series.csv", "summary.csv", "manifest.json"] {
            assert!(outputs.join(artifact).is_file(), "{artifact} missing");
        }
        series.push(std::fs::read(outputs.join("series.csv")).unwrap());
    }

    let text = String::from_utf8(series[0].clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2, "expected header plus one row:\n{text}");
    assert_eq!(lines[0], "replica,t,rho,phi,max_angle,split");
    assert!(lines[1].starts_with("0,0,"), "row: {}", lines[1]);
    assert!(lines[1].ends_with(",0"), "initial entry cannot be mid-split: {}", lines[1]);

    assert_eq!(series[0], series[1], "rerun produced different series bytes");
}

#[test]
fn suite_subcommand_reports_and_writes_its_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(polarsim()
        .args(["suite", "party", "--seed", "42", "--out"])
        .arg(dir.path()));
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    assert!(stdout_of(&out).contains("suite party: pass"));
    assert!(dir.path().join("party/report.json").is_file());
}

#[test]
fn thread_cap_env_is_honored_and_garbage_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let outputs = dir.path().join("out");
    let path = dir.path().join("smoke.toml");
    std::fs::write(&path, smoke_config(&outputs)).unwrap();

    let ok = run(polarsim()
        .env("POLARSIM_THREADS", "2")
        .args(["run", "--config"])
        .arg(&path));
    assert_eq!(ok.status.code(), Some(0), "stderr: {}", stderr_of(&ok));

    for bad in ["0", "eight"] {
        let out = run(polarsim()
            .env("POLARSIM_THREADS", bad)
            .args(["run", "--config"])
            .arg(&path));
        assert_eq!(out.status.code(), Some(2), "cap {bad:?} should be rejected");
        assert!(
            stderr_of(&out).contains("POLARSIM_THREADS"),
            "stderr does not name the variable: {}",
            stderr_of(&out)
        );
    }
}
