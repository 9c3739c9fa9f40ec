//! Command-line front end: `solitonlab <command> --config <path> --out <dir>`.
//!
//! Each command writes CSV tables plus a key-value summary into the output
//! directory; identical inputs produce byte-identical files. Wall-clock
//! numbers go to a separate `timing.txt` so everything else stays
//! deterministic.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::config::{self, ConfigError, FileConfig};
use crate::grid::{self, GridError, GridTrajectory};
use crate::output::{self, Summary};
use crate::scenarios::{self, CompareError, Scenario, ScenarioError};
use crate::variational::{self, EvolveError, StationaryError, Trajectory};

/// Environment variable selecting the thread count of the compare command;
/// set it to 1 to run the engines sequentially.
pub const THREADS_ENV: &str = "SOLITONLAB_THREADS";

#[derive(Parser)]
#[command(
    name = "solitonlab",
    version,
    about = "Bright-soliton dynamics of the 1D attractive nonlinear Schrödinger equation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Clone)]
pub enum Command {
    /// Stationary ground state from the variational root search
    GroundState(RunArgs),
    /// Evolve the coupled-Gaussian variational engine
    EvolveVar(RunArgs),
    /// Evolve the finite-difference lattice engine
    EvolveGrid(RunArgs),
    /// Run both engines on one scenario and compare densities
    Compare(RunArgs),
    /// Tabulate the single-Gaussian potential V(q)
    HamiltonianScan(RunArgs),
}

#[derive(Args, Clone)]
pub struct RunArgs {
    /// Scenario configuration file
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (created if missing)
    #[arg(long)]
    pub out: PathBuf,
    /// Override a global config key, e.g. --override grid_dx=0.2
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Scenario(ScenarioError),
    #[error("{0}")]
    Stationary(#[from] StationaryError),
    #[error("variational evolution failed: {0}")]
    Evolve(#[from] EvolveError),
    #[error("grid evolution aborted: {0}")]
    Grid(#[from] GridError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("internal comparison error: {0}")]
    Compare(#[from] CompareError),
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Stationary(s) => CliError::Stationary(s),
            other => CliError::Scenario(other),
        }
    }
}

impl CliError {
    /// Distinct exit code per error domain (0 = success, 2 = usage).
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 3,
            CliError::Scenario(_) => 4,
            CliError::Stationary(_) => 5,
            CliError::Evolve(_) => 6,
            CliError::Grid(_) => 7,
            CliError::Io { .. } => 8,
            CliError::Compare(_) => 9,
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::GroundState(args) => ground_state(args),
        Command::EvolveVar(args) => evolve_var(args),
        Command::EvolveGrid(args) => evolve_grid(args),
        Command::Compare(args) => compare(args),
        Command::HamiltonianScan(args) => hamiltonian_scan(args),
    }
}

fn load_config(args: &RunArgs) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|source| CliError::Io {
        path: args.config.clone(),
        source,
    })?;
    let overrides: Vec<(String, String)> = args
        .overrides
        .iter()
        .map(|s| match s.split_once('=') {
            Some((k, v)) => Ok((k.trim().to_string(), v.trim().to_string())),
            None => Err(CliError::Config(ConfigError::Override {
                key: s.clone(),
                msg: "expected key=value".into(),
            })),
        })
        .collect::<Result<_, _>>()?;
    Ok(config::parse_config(&text, &overrides)?)
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|source| CliError::Io { path, source })
}

fn single_sample_trajectory(state: variational::VariationalState) -> Trajectory {
    Trajectory {
        samples: vec![variational::TrajectorySample {
            norm: state.psi.norm_squared(),
            energy: state.psi.energy(),
            state,
            regularized_steps: 0,
        }],
    }
}

fn ground_state(args: &RunArgs) -> Result<(), CliError> {
    let cfg = load_config(args)?;
    cfg.validate_domain()?;
    let result = variational::stationary_state(cfg.n_gaussians, None)?;
    let n_points = ((cfg.x_max - cfg.x_min) / cfg.dx).round() as usize + 1;

    let mut widths: Vec<(f64, f64)> = result
        .state
        .psi
        .terms
        .iter()
        .map(|g| (g.alpha.re, g.gamma.re))
        .collect();
    widths.sort_by(|a, b| a.0.total_cmp(&b.0));

    let energy = result.state.psi.energy();
    let norm = result.state.psi.norm_squared();
    let grouping = vec![(0..cfg.n_gaussians).collect::<Vec<_>>()];
    let traj = single_sample_trajectory(result.state.clone());

    let mut summary = Summary::new("ground-state");
    summary.push("n_gaussians", &cfg.n_gaussians.to_string());
    summary.push_f64("norm", norm);
    summary.push_f64("energy", energy);
    summary.push_f64("delta_e_mf", energy + 1.0 / 48.0);
    summary.push_f64("mu", result.mu);
    summary.push_f64("residual", result.residual);
    for (i, (alpha, gamma)) in widths.iter().enumerate() {
        summary.push_f64(&format!("alpha_{}", i + 1), *alpha);
        summary.push_f64(&format!("gamma_{}", i + 1), *gamma);
    }

    write_file(
        &args.out,
        "snapshots.csv",
        &output::variational_snapshots(&traj, cfg.x_min, cfg.dx, n_points),
    )?;
    write_file(
        &args.out,
        "observables.csv",
        &output::variational_observables(&traj, &grouping),
    )?;
    write_file(&args.out, "summary.txt", &summary.finish())
}

fn run_variational(scenario: &Scenario) -> Result<(Trajectory, Vec<Vec<usize>>), CliError> {
    let built = scenarios::build_initial_states(scenario)?;
    let traj = variational::evolve(
        &built.variational,
        &scenario.output_times,
        scenario.var_tolerance,
    )?;
    Ok((traj, built.grouping))
}

fn run_grid(scenario: &Scenario) -> Result<GridTrajectory, CliError> {
    let built = scenarios::build_initial_states(scenario)?;
    Ok(grid::evolve_grid(
        &built.grid,
        &scenario.output_times,
        &scenario.grid,
    )?)
}

fn evolve_var(args: &RunArgs) -> Result<(), CliError> {
    let cfg = load_config(args)?;
    let scenario = cfg.scenario()?;
    let (traj, grouping) = run_variational(&scenario)?;

    let last = traj.samples.last().expect("non-empty schedule");
    let first = &traj.samples[0];
    let mut summary = Summary::new("evolve-var");
    summary.push("n_solitons", &grouping.len().to_string());
    summary.push_f64("t_final", last.state.time);
    summary.push_f64("initial_norm", first.norm);
    summary.push_f64("final_norm", last.norm);
    summary.push_f64("initial_energy", first.energy);
    summary.push_f64("final_energy", last.energy);
    summary.push("regularized_steps", &last.regularized_steps.to_string());

    write_file(
        &args.out,
        "snapshots.csv",
        &output::variational_snapshots(&traj, scenario.x_min, scenario.dx, scenario.n_points()),
    )?;
    write_file(
        &args.out,
        "observables.csv",
        &output::variational_observables(&traj, &grouping),
    )?;
    write_file(&args.out, "summary.txt", &summary.finish())
}

fn evolve_grid(args: &RunArgs) -> Result<(), CliError> {
    let cfg = load_config(args)?;
    let scenario = cfg.scenario()?;
    let traj = run_grid(&scenario)?;

    let last = traj.samples.last().expect("non-empty schedule");
    let first = &traj.samples[0];
    let mut summary = Summary::new("evolve-grid");
    summary.push("n_solitons", &scenario.solitons.len().to_string());
    summary.push_f64("t_final", last.state.time);
    summary.push_f64("initial_norm", first.norm);
    summary.push_f64("final_norm", last.norm);
    summary.push_f64("initial_energy", first.energy);
    summary.push_f64("final_energy", last.energy);
    summary.push_f64("max_boundary_amplitude", {
        traj.monitor.iter().map(|m| m.boundary).fold(0.0, f64::max)
    });

    write_file(&args.out, "snapshots.csv", &output::grid_snapshots(&traj))?;
    write_file(
        &args.out,
        "observables.csv",
        &output::grid_observables(&traj, scenario.solitons.len()),
    )?;
    write_file(&args.out, "summary.txt", &summary.finish())
}

fn compare(args: &RunArgs) -> Result<(), CliError> {
    let cfg = load_config(args)?;
    let scenario = cfg.scenario()?;
    let sequential = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        == Some(1);

    let (var_result, grid_result, var_seconds, grid_seconds) = if sequential {
        let t0 = Instant::now();
        let v = run_variational(&scenario);
        let tv = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let g = run_grid(&scenario);
        (v, g, tv, t1.elapsed().as_secs_f64())
    } else {
        std::thread::scope(|scope| {
            let var_handle = scope.spawn(|| {
                let t0 = Instant::now();
                let r = run_variational(&scenario);
                (r, t0.elapsed().as_secs_f64())
            });
            let t0 = Instant::now();
            let g = run_grid(&scenario);
            let tg = t0.elapsed().as_secs_f64();
            let (v, tv) = var_handle.join().expect("variational thread");
            (v, g, tv, tg)
        })
    };
    let (var_traj, grouping) = var_result?;
    let grid_traj = grid_result?;

    let metrics = scenarios::compare(&var_traj, &grid_traj, &scenario.output_times)?;
    let last = metrics.last().expect("non-empty schedule");
    let max_sup = metrics.iter().map(|m| m.sup_mismatch).fold(0.0, f64::max);
    let max_l2 = metrics
        .iter()
        .map(|m| m.l2_density_mismatch)
        .fold(0.0, f64::max);

    let mut summary = Summary::new("compare");
    summary.push("n_solitons", &grouping.len().to_string());
    summary.push_f64("t_final", last.time);
    summary.push_f64("var_final_norm", last.var_norm);
    summary.push_f64("var_final_energy", last.var_energy);
    summary.push_f64("grid_final_norm", last.grid_norm);
    summary.push_f64("grid_final_energy", last.grid_energy);
    summary.push_f64("max_sup_mismatch", max_sup);
    summary.push_f64("max_l2_mismatch", max_l2);
    summary.push_f64("final_sup_mismatch", last.sup_mismatch);
    summary.push(
        "regularized_steps",
        &var_traj
            .samples
            .last()
            .expect("non-empty")
            .regularized_steps
            .to_string(),
    );

    let mut timing = Summary::new("compare-timing");
    timing.push_f64("wall_clock_variational_s", var_seconds);
    timing.push_f64("wall_clock_grid_s", grid_seconds);
    timing.push_f64("grid_over_variational", grid_seconds / var_seconds);

    write_file(
        &args.out,
        "snapshots_var.csv",
        &output::variational_snapshots(&var_traj, scenario.x_min, scenario.dx, scenario.n_points()),
    )?;
    write_file(
        &args.out,
        "snapshots_grid.csv",
        &output::grid_snapshots(&grid_traj),
    )?;
    write_file(
        &args.out,
        "observables.csv",
        &output::comparison_observables(&var_traj, &grid_traj, &grouping, &metrics),
    )?;
    write_file(&args.out, "summary.txt", &summary.finish())?;
    write_file(&args.out, "timing.txt", &timing.finish())
}

fn hamiltonian_scan(args: &RunArgs) -> Result<(), CliError> {
    let cfg = load_config(args)?;
    cfg.validate_scan()?;
    let mut table = String::from("q,potential\n");
    let step = (cfg.q_max - cfg.q_min) / (cfg.q_steps - 1) as f64;
    let mut min_q = cfg.q_min;
    let mut min_v = f64::INFINITY;
    for i in 0..cfg.q_steps {
        let q = cfg.q_min + i as f64 * step;
        let point = variational::hamiltonian_picture(q, 0.0).expect("q > 0 by validation");
        if point.potential < min_v {
            min_v = point.potential;
            min_q = q;
        }
        table.push_str(&output::fmt_f64(q));
        table.push(',');
        table.push_str(&output::fmt_f64(point.potential));
        table.push('\n');
    }
    let mut summary = Summary::new("hamiltonian-scan");
    summary.push_f64("q_min_scanned", min_q);
    summary.push_f64("potential_min_scanned", min_v);
    summary.push_f64("q_min_analytic", 2.0 * std::f64::consts::PI.sqrt());
    summary.push_f64(
        "potential_min_analytic",
        -1.0 / (16.0 * std::f64::consts::PI),
    );
    write_file(&args.out, "scan.csv", &table)?;
    write_file(&args.out, "summary.txt", &summary.finish())
}
