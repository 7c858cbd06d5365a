use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn crasim(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_crasim"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.toml");
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

/// Every output except the wall-clock file.
fn outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "timings.txt" && p.file_name().unwrap() != "config.toml")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

const SMALL_DECAY: &str = "
[dynamics]
release_atoms = 400
bobs_enabled = false

[timing]
decay_tau_max_ms = 3.0
decay_tau_step_us = 200.0
";

#[test]
fn lists_all_scenarios() {
    let out = crasim(&["list-scenarios"], &[]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().collect();
    assert_eq!(names, ["bob_profile", "trap_character", "rabi_array", "decay_trapping", "bob_oscillation", "thermometry"]);
}

#[test]
fn empty_config_echoes_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = crasim(&["validate", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(0));
    let echo = String::from_utf8(out.stdout).unwrap();
    assert!(echo.contains("bob_mW = 20.0"));
    assert!(echo.contains("transfer_us = 15.0"));
    assert!(echo.contains("tau_min_us = 32.0"));
}

#[test]
fn negative_power_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[powers]\nbob_mW = -3.0\n");
    let out = crasim(&["validate", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("powers.bob_mW"), "{err}");
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[timing]\ntransfer_us = 15.0\ntransfer_ms = 0.015\n");
    let out = crasim(&["run", "rabi_array", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("transfer_ms"));
}

#[test]
fn unknown_scenario_is_rejected() {
    let out = crasim(&["run", "nope"], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn shipped_defaults_validate() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/defaults.toml");
    let out = crasim(&["validate", "--config", path], &[]);
    assert_eq!(out.status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let empty = write_config(dir.path(), "");
    let defaults = crasim(&["validate", "--config", &empty], &[]);
    assert_eq!(out.stdout, defaults.stdout);
}

#[test]
fn rabi_run_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let mut runs = Vec::new();
    for _ in 0..2 {
        let r = crasim(&["run", "rabi_array", "--seed", "5", "--out", out.to_str().unwrap()], &[]);
        assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stdout));
        runs.push(outputs(&out));
        fs::remove_dir_all(&out).unwrap();
    }
    assert!(runs[0].iter().any(|(n, _)| n == "report.txt"));
    assert!(runs[0] == runs[1], "outputs differ between runs");
    let report = String::from_utf8(runs[0].iter().find(|(n, _)| n == "report.txt").unwrap().1.clone()).unwrap();
    assert!(report.contains("rabi_signal.csv: time_us,"));
    assert!(report.contains("PASS revival time"));
}

#[test]
fn monte_carlo_outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_DECAY);
    let out = dir.path().join("run");
    let runs: Vec<_> = ["1", "3"]
        .iter()
        .map(|threads| {
            let r = crasim(&["run", "decay_trapping", "--config", &cfg, "--out", out.to_str().unwrap()], &[("RAYON_NUM_THREADS", threads)]);
            assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
            let files = outputs(&out);
            fs::remove_dir_all(&out).unwrap();
            files
        })
        .collect();
    assert!(runs[0].len() > 5);
    assert!(runs[0] == runs[1], "outputs differ between thread counts");
}

#[test]
fn bobs_off_recapture_collapses_within_tens_of_microseconds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_DECAY);
    let out = dir.path().join("run");
    crasim(&["run", "decay_trapping", "--config", &cfg, "--out", out.to_str().unwrap()], &[]);
    let hot = crasim::Curve::read_csv(&out.join("release_hot.csv")).unwrap();
    let at = |t: f64| hot.y[hot.x.iter().position(|&x| (x - t).abs() < 1e-9).unwrap()];
    assert!(at(0.0) > 0.95);
    assert!(at(20e-6) < 0.9);
    assert!(at(40e-6) < 0.5);
}

#[test]
fn failing_checks_set_the_exit_status_unless_disabled() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    // too short a record to reach the revival
    let short = "[rabi]\nt_max_us = 40.0\n";
    let cfg = write_config(dir.path(), short);
    let strict = crasim(&["run", "rabi_array", "--config", &cfg, "--out", out.to_str().unwrap()], &[]);
    assert_eq!(strict.status.code(), Some(1));
    assert!(String::from_utf8(strict.stdout).unwrap().contains("FAIL"));
    let cfg = write_config(dir.path(), &format!("checks = false\n{short}"));
    let relaxed = crasim(&["run", "rabi_array", "--config", &cfg, "--out", out.to_str().unwrap()], &[]);
    assert_eq!(relaxed.status.code(), Some(0));
    assert!(fs::read_to_string(out.join("report.txt")).unwrap().contains("## checks\ndisabled"));
}
