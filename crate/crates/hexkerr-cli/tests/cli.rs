//! End-to-end checks of the `hexkerr` binary: exit statuses, error wording,
//! CSV artifact layout, and byte-level determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn hexkerr() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hexkerr"))
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("failed to spawn hexkerr")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Write a throwaway config file and return (dir, path-as-string).
fn config_file(body: &str) -> (TempDir, String) {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("run.cfg");
    fs::write(&path, body).unwrap();
    let s = path.to_str().unwrap().to_owned();
    (dir, s)
}

fn read_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
        .lines()
        .map(str::to_owned)
        .collect()
}

#[test]
fn best_squeeze_output_is_byte_identical_across_reruns() {
    let (_cfg_dir, cfg) = config_file("drive_min = 1.19\ndrive_max = 1.21\ndrive_step = 0.002\n");
    let mut contents = Vec::new();
    for _ in 0..2 {
        let out_dir = TempDir::new().unwrap();
        let out = run(hexkerr()
            .args(["best-squeeze", "--config", &cfg, "--out-dir"])
            .arg(out_dir.path()));
        assert!(out.status.success(), "stderr: {}", stderr_of(&out));
        contents.push(fs::read(out_dir.path().join("best_squeeze.csv")).unwrap());
    }
    assert_eq!(contents[0], contents[1], "same config + seed must reproduce bytes");
}

#[test]
fn best_squeeze_below_the_fold_gives_a_header_only_csv() {
    let (_cfg_dir, cfg) = config_file("drive_min = 0.5\ndrive_max = 0.6\n");
    let out_dir = TempDir::new().unwrap();
    let out = run(hexkerr()
        .args(["best-squeeze", "--config", &cfg, "--out-dir"])
        .arg(out_dir.path()));
    assert!(out.status.success(), "an empty range is not an error");
    let lines = read_lines(&out_dir.path().join("best_squeeze.csv"));
    assert_eq!(lines.len(), 2, "expected schema + header only, got {lines:?}");
    assert!(lines[0].starts_with("# schema:"));
    assert_eq!(lines[1], "e_in_sq,observable_label,psi_opt,s_min");
}

#[test]
fn oracle_passes_at_default_cutoffs() {
    let out_dir = TempDir::new().unwrap();
    let out = run(hexkerr().args(["oracle", "--out-dir"]).arg(out_dir.path()));
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let report = read_lines(&out_dir.path().join("oracle.csv"));
    assert_eq!(report[1], "anchor,term,commutator_norm");
    // six anchors x seven Hamiltonian terms, plus the one deliberate
    // non-conservation row
    assert_eq!(report.len(), 2 + 6 * 7 + 1);
}

#[test]
fn oracle_rejects_a_pump_cutoff_of_one() {
    let (_cfg_dir, cfg) = config_file("cutoffs = 1 1 1 1 1 1 1\n");
    let out_dir = TempDir::new().unwrap();
    let out = run(hexkerr()
        .args(["oracle", "--config", &cfg, "--out-dir"])
        .arg(out_dir.path()));
    assert!(!out.status.success());
    let err = stderr_of(&out);
    assert!(err.contains("cutoff"), "stderr should name the cutoff: {err}");
    assert_eq!(err.lines().count(), 1, "errors are one line: {err}");
}

#[test]
fn spectrum_below_the_fold_reports_no_hexagon() {
    let out_dir = TempDir::new().unwrap();
    let out = run(hexkerr()
        .args(["spectrum", "--drive", "0.5", "--out-dir"])
        .arg(out_dir.path()));
    assert!(!out.status.success());
    let err = stderr_of(&out);
    assert!(err.starts_with("error:"), "stderr: {err}");
    assert!(err.contains("no hexagon"), "stderr: {err}");
}

#[test]
fn unknown_config_keys_are_rejected_with_the_line_number() {
    let (_cfg_dir, cfg) = config_file("drive = 1.2\nbogus = 3\n");
    let out_dir = TempDir::new().unwrap();
    let out = run(hexkerr()
        .args(["steady", "--config", &cfg, "--out-dir"])
        .arg(out_dir.path()));
    assert!(!out.status.success());
    let err = stderr_of(&out);
    assert!(err.contains("unknown key") && err.contains("line 2"), "stderr: {err}");
}

#[test]
fn branch_commands_refuse_an_untied_detuning() {
    for cmd in ["steady", "spectrum", "best-squeeze"] {
        let out_dir = TempDir::new().unwrap();
        let out = run(hexkerr()
            .args([cmd, "--delta", "1.5", "--out-dir"])
            .arg(out_dir.path()));
        assert!(!out.status.success(), "`{cmd}` accepted --delta");
        let err = stderr_of(&out);
        assert!(err.contains("pins the detuning"), "`{cmd}` stderr: {err}");
    }
}

#[test]
fn hysteresis_emits_both_branches_and_a_summary() {
    let (_cfg_dir, cfg) = config_file(
        "sweep_time = 300\ndrive_min = 0.9\ndrive_max = 1.1\nsweep_points = 21\n",
    );
    let out_dir = TempDir::new().unwrap();
    let out = run(hexkerr()
        .args(["hysteresis", "--config", &cfg, "--out-dir"])
        .arg(out_dir.path()));
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    for name in ["forward.csv", "backward.csv", "hysteresis_summary.csv"] {
        assert!(out_dir.path().join(name).is_file(), "{name} missing");
    }
    // 2 header lines + 21 sweep points per branch
    assert_eq!(read_lines(&out_dir.path().join("forward.csv")).len(), 23);
    assert_eq!(read_lines(&out_dir.path().join("backward.csv")).len(), 23);
    let summary = read_lines(&out_dir.path().join("hysteresis_summary.csv"));
    assert_eq!(summary[1], "jump_up_drive,drop_down_drive");
    assert_eq!(summary.len(), 3);
}

#[test]
fn sweeps_entirely_below_threshold_stay_on_the_flat_branch() {
    let (_cfg_dir, cfg) = config_file(
        "sweep_time = 200\ndrive_min = 0.3\ndrive_max = 0.45\nsweep_points = 11\n",
    );
    let out_dir = TempDir::new().unwrap();
    let out = run(hexkerr()
        .args(["hysteresis", "--config", &cfg, "--out-dir"])
        .arg(out_dir.path()));
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    for name in ["forward.csv", "backward.csv"] {
        for line in read_lines(&out_dir.path().join(name)).iter().skip(2) {
            let beta: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
            assert!(beta < 1e-3, "{name}: pattern amplitude {beta} at {line}");
        }
    }
    let summary = read_lines(&out_dir.path().join("hysteresis_summary.csv"));
    assert_eq!(summary[2], "NaN,NaN", "no transition should be recorded");
}

#[test]
fn spectrum_angle_flag_adds_a_second_spectrum_file() {
    let out_dir = TempDir::new().unwrap();
    let out = run(hexkerr()
        .args(["spectrum", "--observable", "X", "--angle", "0.5", "--out-dir"])
        .arg(out_dir.path()));
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    for name in ["spectrum.csv", "spectrum_angle.csv", "spectrum_info.csv"] {
        assert!(out_dir.path().join(name).is_file(), "{name} missing");
    }
    let lines = read_lines(&out_dir.path().join("spectrum.csv"));
    assert_eq!(lines.len(), 2 + 400, "default grid has 400 frequencies");
}

#[test]
fn thread_cap_env_var_is_validated() {
    let out_dir = TempDir::new().unwrap();
    let ok = run(hexkerr()
        .env("HEXKERR_THREADS", "1")
        .args(["oracle", "--out-dir"])
        .arg(out_dir.path()));
    assert!(ok.status.success(), "stderr: {}", stderr_of(&ok));

    let bad = run(hexkerr()
        .env("HEXKERR_THREADS", "abc")
        .args(["oracle", "--out-dir"])
        .arg(out_dir.path()));
    assert!(!bad.status.success());
    assert!(stderr_of(&bad).contains("HEXKERR_THREADS"));
}
