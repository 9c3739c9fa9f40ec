//! Line-oriented `key = value` scenario configuration with `[soliton]`
//! blocks. Unknown keys are errors; there are no silent typos.

use thiserror::Error;

use crate::grid::{GridSettings, Scheme};
use crate::scenarios::{Scenario, SolitonSpec};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("override '{key}': {msg}")]
    Override { key: String, msg: String },
    #[error("invalid configuration: {0}")]
    Validation(String),
}

/// Raw configuration as parsed from a scenario file plus overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct FileConfig {
    /// Gaussian count for the ground-state command.
    pub n_gaussians: usize,
    /// Variational ODE tolerance.
    pub tolerance: f64,
    pub output_times: Vec<f64>,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub norm_monitor_interval: usize,
    pub norm_drift_bound: f64,
    pub boundary_bound: f64,
    pub max_overlap: f64,
    /// Range of the hamiltonian-scan command.
    pub q_min: f64,
    pub q_max: f64,
    pub q_steps: usize,
    pub solitons: Vec<SolitonSpec>,
}

impl Default for FileConfig {
    fn default() -> Self {
        let grid = GridSettings::default();
        Self {
            n_gaussians: 1,
            tolerance: 1e-10,
            output_times: Vec::new(),
            x_min: -80.0,
            x_max: 80.0,
            dx: 0.1,
            dt: grid.dt,
            scheme: Scheme::Euler,
            norm_monitor_interval: grid.norm_monitor_interval,
            norm_drift_bound: grid.norm_drift_bound,
            boundary_bound: grid.boundary_bound,
            max_overlap: 1e-2,
            q_min: 1.0,
            q_max: 15.0,
            q_steps: 281,
            solitons: Vec::new(),
        }
    }
}

impl FileConfig {
    pub fn grid_settings(&self) -> GridSettings {
        GridSettings {
            dt: self.dt,
            scheme: self.scheme,
            norm_monitor_interval: self.norm_monitor_interval,
            norm_drift_bound: self.norm_drift_bound,
            boundary_bound: self.boundary_bound,
            nonlinear: true,
        }
    }

    /// Assemble (and validate) the collision scenario.
    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        if self.solitons.is_empty() {
            return Err(ConfigError::Validation(
                "at least one [soliton] block is required".into(),
            ));
        }
        self.validate_schedule()?;
        self.validate_domain()?;
        Ok(Scenario {
            solitons: self.solitons.clone(),
            x_min: self.x_min,
            x_max: self.x_max,
            dx: self.dx,
            grid: self.grid_settings(),
            var_tolerance: self.tolerance,
            output_times: self.output_times.clone(),
            max_overlap: self.max_overlap,
        })
    }

    pub fn validate_schedule(&self) -> Result<(), ConfigError> {
        if self.output_times.is_empty() {
            return Err(ConfigError::Validation(
                "key 'output_times' is required".into(),
            ));
        }
        if self.output_times[0] < 0.0
            || self.output_times.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(ConfigError::Validation(
                "key 'output_times' must be non-negative and strictly increasing".into(),
            ));
        }
        Ok(())
    }

    pub fn validate_domain(&self) -> Result<(), ConfigError> {
        if !(self.dx > 0.0) || !(self.x_max > self.x_min) {
            return Err(ConfigError::Validation(format!(
                "invalid lattice: grid_x_min = {}, grid_x_max = {}, grid_dx = {}",
                self.x_min, self.x_max, self.dx
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(ConfigError::Validation(
                "key 'tolerance' must be positive".into(),
            ));
        }
        let bound = GridSettings::stability_bound(self.dx, self.scheme);
        if !(self.dt > 0.0) || self.dt > bound {
            return Err(ConfigError::Validation(format!(
                "key 'grid_dt' = {} outside (0, {bound:e}] for grid_dx = {}",
                self.dt, self.dx
            )));
        }
        Ok(())
    }

    pub fn validate_scan(&self) -> Result<(), ConfigError> {
        if !(self.q_min > 0.0) || !(self.q_max > self.q_min) || self.q_steps < 2 {
            return Err(ConfigError::Validation(format!(
                "scan range needs 0 < q_min < q_max and q_steps >= 2 (got {}, {}, {})",
                self.q_min, self.q_max, self.q_steps
            )));
        }
        Ok(())
    }
}

/// Parse a configuration file and apply `--override key=value` pairs on the
/// global section.
pub fn parse_config(
    text: &str,
    overrides: &[(String, String)],
) -> Result<FileConfig, ConfigError> {
    let mut cfg = FileConfig::default();
    let mut in_soliton = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line == "[soliton]" {
            in_soliton = true;
            cfg.solitons.push(SolitonSpec {
                x0: 0.0,
                p: 0.0,
                phase: 0.0,
                gaussians: 1,
            });
            continue;
        }
        if line.starts_with('[') {
            return Err(ConfigError::Parse {
                line: line_no,
                msg: format!("unknown section '{line}' (only [soliton] is recognized)"),
            });
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Parse {
                line: line_no,
                msg: format!("expected 'key = value', got '{line}'"),
            });
        };
        let key = key.trim();
        let value = value.trim();
        let result = if in_soliton {
            set_soliton_key(cfg.solitons.last_mut().expect("open block"), key, value)
        } else {
            set_global_key(&mut cfg, key, value)
        };
        result.map_err(|msg| ConfigError::Parse { line: line_no, msg })?;
    }
    for (key, value) in overrides {
        set_global_key(&mut cfg, key, value).map_err(|msg| ConfigError::Override {
            key: key.clone(),
            msg,
        })?;
    }
    Ok(cfg)
}

fn set_global_key(cfg: &mut FileConfig, key: &str, value: &str) -> Result<(), String> {
    match key {
        "n_gaussians" => cfg.n_gaussians = parse_num(key, value)?,
        "tolerance" => cfg.tolerance = parse_num(key, value)?,
        "output_times" => {
            cfg.output_times = value
                .split(',')
                .map(|v| parse_num::<f64>(key, v.trim()))
                .collect::<Result<_, _>>()?
        }
        "grid_x_min" => cfg.x_min = parse_num(key, value)?,
        "grid_x_max" => cfg.x_max = parse_num(key, value)?,
        "grid_dx" => cfg.dx = parse_num(key, value)?,
        "grid_dt" => cfg.dt = parse_num(key, value)?,
        "grid_scheme" => {
            cfg.scheme = match value {
                "euler" => Scheme::Euler,
                "rk4" => Scheme::Rk4,
                other => return Err(format!("key 'grid_scheme': unknown scheme '{other}'")),
            }
        }
        "norm_monitor_interval" => cfg.norm_monitor_interval = parse_num(key, value)?,
        "norm_drift_bound" => cfg.norm_drift_bound = parse_num(key, value)?,
        "boundary_bound" => cfg.boundary_bound = parse_num(key, value)?,
        "max_overlap" => cfg.max_overlap = parse_num(key, value)?,
        "q_min" => cfg.q_min = parse_num(key, value)?,
        "q_max" => cfg.q_max = parse_num(key, value)?,
        "q_steps" => cfg.q_steps = parse_num(key, value)?,
        other => return Err(format!("unknown key '{other}'")),
    }
    Ok(())
}

fn set_soliton_key(spec: &mut SolitonSpec, key: &str, value: &str) -> Result<(), String> {
    match key {
        "x0" => spec.x0 = parse_num(key, value)?,
        "p" => spec.p = parse_num(key, value)?,
        "phase" => spec.phase = parse_num(key, value)?,
        "gaussians" => spec.gaussians = parse_num(key, value)?,
        other => return Err(format!("unknown key '{other}' in [soliton] block")),
    }
    Ok(())
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("key '{key}': cannot parse '{value}'"))
}
