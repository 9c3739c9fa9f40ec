//! End-to-end checks of the `solitonlab` binary: output schemas, summary
//! values, determinism, and error exit codes.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_solitonlab"))
}

fn workspace_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("solitonlab-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name))
        .unwrap_or_else(|e| panic!("missing {name} in {dir:?}: {e}"))
}

fn summary_value(summary: &str, key: &str) -> f64 {
    summary
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("summary lacks '{key}':\n{summary}"))
        .parse()
        .unwrap()
}

#[test]
fn ground_state_summary_contains_analytic_values() {
    let out = tmp_dir("ground");
    let status = bin()
        .args(["ground-state", "--config"])
        .arg(workspace_config("ground_state.cfg"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());

    let summary = read(&out, "summary.txt");
    let alpha = summary_value(&summary, "alpha_1");
    let delta_e = summary_value(&summary, "delta_e_mf");
    assert!(
        (alpha - 1.0 / (16.0 * std::f64::consts::PI)).abs() < 1e-10,
        "alpha_1 = {alpha}"
    );
    assert!((delta_e - 9.39e-4).abs() < 1e-6, "delta_e_mf = {delta_e}");

    let snapshots = read(&out, "snapshots.csv");
    assert!(snapshots.starts_with("t,x,re_psi,im_psi,density\n"));
    let observables = read(&out, "observables.csv");
    assert!(observables.starts_with("t,norm,energy,x_1,p_1,regularized_steps\n"));
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn runs_are_byte_identical() {
    let config = workspace_config("collision_high_energy.cfg");
    let run = |tag: &str| {
        let out = tmp_dir(tag);
        let status = bin()
            .args(["evolve-var", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            // shorten the run: determinism is about bytes, not physics
            .args(["--override", "output_times=0, 0.5, 1"])
            .status()
            .unwrap();
        assert!(status.success());
        let files = (
            read(&out, "snapshots.csv"),
            read(&out, "observables.csv"),
            read(&out, "summary.txt"),
        );
        let _ = std::fs::remove_dir_all(&out);
        files
    };
    let a = run("det-a");
    let b = run("det-b");
    assert!(a == b, "identical inputs must produce byte-identical output");
}

#[test]
fn unknown_config_key_exits_with_config_code() {
    let out = tmp_dir("badkey");
    let dir = tmp_dir("badkey-cfg");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.cfg");
    std::fs::write(&cfg, "n_gaussians = 1\nmoment = 3\n").unwrap();
    let output = bin()
        .args(["ground-state", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
    assert!(stderr.contains("moment"), "stderr: {stderr}");
    let _ = std::fs::remove_dir_all(&dir);
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn overlapping_scenario_exits_with_scenario_code() {
    let dir = tmp_dir("overlap-cfg");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("overlap.cfg");
    std::fs::write(
        &cfg,
        "output_times = 0, 1\n\n[soliton]\nx0 = -2\n\n[soliton]\nx0 = 2\n",
    )
    .unwrap();
    let out = tmp_dir("overlap-out");
    let output = bin()
        .args(["evolve-var", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("solitons 0 and 1"), "stderr: {stderr}");
    let _ = std::fs::remove_dir_all(&dir);
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn hamiltonian_scan_writes_potential_curve() {
    let out = tmp_dir("scan");
    let status = bin()
        .args(["hamiltonian-scan", "--config"])
        .arg(workspace_config("potential_scan.cfg"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let scan = read(&out, "scan.csv");
    let mut lines = scan.lines();
    assert_eq!(lines.next().unwrap(), "q,potential");
    assert_eq!(lines.count(), 281);
    let summary = read(&out, "summary.txt");
    let q_min = summary_value(&summary, "q_min_scanned");
    assert!(
        (q_min - 2.0 * std::f64::consts::PI.sqrt()).abs() < 0.05,
        "scanned minimum at {q_min}"
    );
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn compare_writes_mismatch_columns_and_timing() {
    // tiny single-soliton compare so the test stays fast
    let dir = tmp_dir("cmp-cfg");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("single.cfg");
    std::fs::write(
        &cfg,
        "output_times = 0, 0.5\ngrid_x_min = -60\ngrid_x_max = 60\ngrid_dx = 0.2\ngrid_dt = 4e-6\n\n[soliton]\nx0 = 0\np = 0\ngaussians = 1\n",
    )
    .unwrap();
    let out = tmp_dir("cmp-out");
    let status = bin()
        .args(["compare", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .env("SOLITONLAB_THREADS", "1")
        .status()
        .unwrap();
    assert!(status.success());
    let observables = read(&out, "observables.csv");
    assert!(observables.starts_with(
        "t,var_norm,var_energy,grid_norm,grid_energy,var_x_1,var_p_1,grid_x_1,grid_p_1,regularized_steps,l2_mismatch,sup_mismatch\n"
    ));
    assert!(out.join("snapshots_var.csv").exists());
    assert!(out.join("snapshots_grid.csv").exists());
    let timing = read(&out, "timing.txt");
    assert!(timing.contains("wall_clock_variational_s = "));
    assert!(timing.contains("wall_clock_grid_s = "));
    assert!(timing.contains("grid_over_variational = "));
    // the N_g = 1 fit is close to the sech but not equal: mismatch is small
    // and nonzero
    let summary = read(&out, "summary.txt");
    let sup = summary_value(&summary, "max_sup_mismatch");
    assert!(sup > 1e-4 && sup < 2e-2, "sup mismatch {sup}");
    let _ = std::fs::remove_dir_all(&dir);
    let _ = std::fs::remove_dir_all(&out);
}
