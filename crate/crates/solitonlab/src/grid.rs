//! Numerically exact reference engine: explicit time stepping of the
//! discretized equation with a central-difference Laplacian.
//!
//! The first-order step ψ ← ψ + i[∂²ψ + |ψ|²ψ]δt is not norm-conserving;
//! the evolution monitors the norm (and the boundary amplitude, since the
//! domain is truncated with Dirichlet walls) and aborts when either drifts
//! past its bound instead of silently producing garbage.

use num_complex::Complex64;
use thiserror::Error;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Error)]
pub enum GridError {
    #[error("norm drifted to {current:.8e} from {initial:.8e} at t = {t:.4} (relative bound {bound:.1e})")]
    NormDrift {
        t: f64,
        initial: f64,
        current: f64,
        bound: f64,
    },
    #[error("boundary amplitude {amplitude:.3e} exceeds {bound:.1e} at t = {t:.4}; enlarge the domain")]
    BoundaryLeak { t: f64, amplitude: f64, bound: f64 },
    #[error("dt = {dt:.3e} exceeds the stability bound {bound:.3e} for dx = {dx}")]
    UnstableStep { dt: f64, dx: f64, bound: f64 },
    #[error("output times must be strictly increasing, first at or after the state time")]
    BadSchedule,
    #[error("grid needs at least 3 points, got {0}")]
    TooFewPoints(usize),
}

/// Uniform lattice with complex amplitudes (Dirichlet boundaries).
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub x_min: f64,
    pub dx: f64,
    pub amplitudes: Vec<Complex64>,
    pub time: f64,
}

impl GridState {
    /// Sample `f` on the lattice x_j = x_min + j·dx, j = 0..n_points.
    pub fn sample(x_min: f64, dx: f64, n_points: usize, time: f64, f: impl Fn(f64) -> Complex64) -> Self {
        let amplitudes = (0..n_points).map(|j| f(x_min + j as f64 * dx)).collect();
        Self {
            x_min,
            dx,
            amplitudes,
            time,
        }
    }

    pub fn n_points(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Larger of the two edge amplitudes.
    pub fn boundary_amplitude(&self) -> f64 {
        match (self.amplitudes.first(), self.amplitudes.last()) {
            (Some(a), Some(b)) => a.norm().max(b.norm()),
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// First-order step of the truncated time-evolution operator.
    Euler,
    /// Classical fourth-order Runge-Kutta; cross-check mode only.
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSettings {
    pub dt: f64,
    pub scheme: Scheme,
    /// Steps between monitor records.
    pub norm_monitor_interval: usize,
    /// Relative norm-drift abort bound.
    pub norm_drift_bound: f64,
    /// Boundary-amplitude abort bound.
    pub boundary_bound: f64,
    /// Diagnostic hook: drop the |ψ|²ψ term to evolve the free equation.
    pub nonlinear: bool,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            dt: 2.5e-6,
            scheme: Scheme::Euler,
            norm_monitor_interval: 1000,
            norm_drift_bound: 1e-3,
            boundary_bound: 1e-4,
            nonlinear: true,
        }
    }
}

impl GridSettings {
    /// Hard step bound for the explicit schemes: dx²/8 for the first-order
    /// step, dx²/2 for rk4 (whose stability region covers the imaginary
    /// axis). Necessary, not sufficient; the norm monitor is the real guard.
    pub fn stability_bound(dx: f64, scheme: Scheme) -> f64 {
        match scheme {
            Scheme::Euler => dx * dx / 8.0,
            Scheme::Rk4 => dx * dx / 2.0,
        }
    }

    pub fn validate(&self, dx: f64) -> Result<(), GridError> {
        let bound = Self::stability_bound(dx, self.scheme);
        if !(self.dt > 0.0) || self.dt > bound {
            return Err(GridError::UnstableStep {
                dt: self.dt,
                dx,
                bound,
            });
        }
        Ok(())
    }
}

/// Central-difference Laplacian at site j; out-of-range neighbors are zero.
pub fn discrete_laplacian(state: &GridState, j: usize) -> Complex64 {
    let psi = &state.amplitudes;
    let left = if j > 0 { psi[j - 1] } else { ZERO };
    let right = if j + 1 < psi.len() { psi[j + 1] } else { ZERO };
    (left + right - 2.0 * psi[j]) / (state.dx * state.dx)
}

/// i·[∂²ψ + |ψ|²ψ] into `out`.
fn rhs_into(psi: &[Complex64], out: &mut [Complex64], inv_dx2: f64, nonlinear: bool) {
    let n = psi.len();
    for j in 0..n {
        let left = if j > 0 { psi[j - 1] } else { ZERO };
        let right = if j + 1 < n { psi[j + 1] } else { ZERO };
        let mut rhs = (left + right - 2.0 * psi[j]) * inv_dx2;
        if nonlinear {
            rhs += psi[j].norm_sqr() * psi[j];
        }
        out[j] = Complex64::i() * rhs;
    }
}

fn euler_kernel(cur: &[Complex64], next: &mut [Complex64], inv_dx2: f64, dt: f64, nonlinear: bool) {
    let n = cur.len();
    for j in 0..n {
        let left = if j > 0 { cur[j - 1] } else { ZERO };
        let right = if j + 1 < n { cur[j + 1] } else { ZERO };
        let mut rhs = (left + right - 2.0 * cur[j]) * inv_dx2;
        if nonlinear {
            rhs += cur[j].norm_sqr() * cur[j];
        }
        next[j] = cur[j] + Complex64::i() * (dt * rhs);
    }
}

struct Rk4Buffers {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    stage: Vec<Complex64>,
}

impl Rk4Buffers {
    fn new(n: usize) -> Self {
        Self {
            k1: vec![ZERO; n],
            k2: vec![ZERO; n],
            k3: vec![ZERO; n],
            k4: vec![ZERO; n],
            stage: vec![ZERO; n],
        }
    }
}

fn rk4_kernel(
    cur: &[Complex64],
    next: &mut [Complex64],
    buf: &mut Rk4Buffers,
    inv_dx2: f64,
    dt: f64,
    nonlinear: bool,
) {
    let n = cur.len();
    rhs_into(cur, &mut buf.k1, inv_dx2, nonlinear);
    for j in 0..n {
        buf.stage[j] = cur[j] + 0.5 * dt * buf.k1[j];
    }
    rhs_into(&buf.stage, &mut buf.k2, inv_dx2, nonlinear);
    for j in 0..n {
        buf.stage[j] = cur[j] + 0.5 * dt * buf.k2[j];
    }
    rhs_into(&buf.stage, &mut buf.k3, inv_dx2, nonlinear);
    for j in 0..n {
        buf.stage[j] = cur[j] + dt * buf.k3[j];
    }
    rhs_into(&buf.stage, &mut buf.k4, inv_dx2, nonlinear);
    for j in 0..n {
        next[j] = cur[j]
            + dt / 6.0 * (buf.k1[j] + 2.0 * buf.k2[j] + 2.0 * buf.k3[j] + buf.k4[j]);
    }
}

/// One first-order step applied to every site simultaneously.
pub fn euler_step(state: &GridState, dt: f64, nonlinear: bool) -> GridState {
    let mut next = vec![ZERO; state.n_points()];
    euler_kernel(
        &state.amplitudes,
        &mut next,
        1.0 / (state.dx * state.dx),
        dt,
        nonlinear,
    );
    GridState {
        x_min: state.x_min,
        dx: state.dx,
        amplitudes: next,
        time: state.time + dt,
    }
}

/// One classical RK4 step.
pub fn rk4_step(state: &GridState, dt: f64, nonlinear: bool) -> GridState {
    let n = state.n_points();
    let mut next = vec![ZERO; n];
    let mut buf = Rk4Buffers::new(n);
    rk4_kernel(
        &state.amplitudes,
        &mut next,
        &mut buf,
        1.0 / (state.dx * state.dx),
        dt,
        nonlinear,
    );
    GridState {
        x_min: state.x_min,
        dx: state.dx,
        amplitudes: next,
        time: state.time + dt,
    }
}

/// Trapezoidal ∫|ψ|² dx.
pub fn grid_norm(state: &GridState) -> f64 {
    let w: Vec<f64> = state.amplitudes.iter().map(|z| z.norm_sqr()).collect();
    trapezoid(&w, state.dx)
}

/// Trapezoidal ∫ [|∇ψ|² - ½|ψ|⁴] dx with the forward-difference gradient
/// squared averaged to sites (Dirichlet edge links).
pub fn grid_energy(state: &GridState) -> f64 {
    let psi = &state.amplitudes;
    let n = psi.len();
    let inv_dx = 1.0 / state.dx;
    let link = |j: isize| -> f64 {
        // |(psi_{j+1} - psi_j)/dx|^2 with psi_{-1} = psi_n = 0
        let a = if j >= 0 { psi[j as usize] } else { ZERO };
        let b = if (j + 1) as usize > n - 1 { ZERO } else { psi[(j + 1) as usize] };
        ((b - a) * inv_dx).norm_sqr()
    };
    let site: Vec<f64> = (0..n)
        .map(|j| {
            let grad_sq = 0.5 * (link(j as isize - 1) + link(j as isize));
            grad_sq - 0.5 * psi[j].norm_sqr().powi(2)
        })
        .collect();
    trapezoid(&site, state.dx)
}

fn trapezoid(values: &[f64], dx: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let sum: f64 = values.iter().sum();
    dx * (sum - 0.5 * (values[0] + values[values.len() - 1]))
}

#[derive(Debug, Clone, Copy)]
pub struct MonitorEntry {
    pub time: f64,
    pub norm: f64,
    pub energy: f64,
    pub boundary: f64,
}

#[derive(Debug, Clone)]
pub struct GridSample {
    pub state: GridState,
    pub norm: f64,
    pub energy: f64,
    pub boundary: f64,
}

#[derive(Debug, Clone, Default)]
pub struct GridTrajectory {
    pub samples: Vec<GridSample>,
    pub monitor: Vec<MonitorEntry>,
}

/// Repeated stepping with norm/energy/boundary monitoring; records a sample
/// at every output time (strictly increasing, first ≥ state.time).
pub fn evolve_grid(
    state: &GridState,
    output_times: &[f64],
    settings: &GridSettings,
) -> Result<GridTrajectory, GridError> {
    if state.n_points() < 3 {
        return Err(GridError::TooFewPoints(state.n_points()));
    }
    settings.validate(state.dx)?;
    if output_times.is_empty()
        || output_times[0] < state.time - 1e-12
        || output_times.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(GridError::BadSchedule);
    }
    let n = state.n_points();
    let inv_dx2 = 1.0 / (state.dx * state.dx);
    let monitor_interval = settings.norm_monitor_interval.max(1);
    let mut cur = state.amplitudes.clone();
    let mut next = vec![ZERO; n];
    let mut rk4_buf = match settings.scheme {
        Scheme::Rk4 => Some(Rk4Buffers::new(n)),
        Scheme::Euler => None,
    };
    let mut t = state.time;
    let initial_norm = grid_norm(state);
    let mut traj = GridTrajectory::default();
    let mut steps_since_monitor = 0usize;

    let check = |t: f64,
                     cur: &Vec<Complex64>,
                     traj: &mut GridTrajectory|
     -> Result<(f64, f64, f64), GridError> {
        let view = GridState {
            x_min: state.x_min,
            dx: state.dx,
            amplitudes: cur.clone(),
            time: t,
        };
        let norm = grid_norm(&view);
        let energy = grid_energy(&view);
        let boundary = view.boundary_amplitude();
        traj.monitor.push(MonitorEntry {
            time: t,
            norm,
            energy,
            boundary,
        });
        if (norm - initial_norm).abs() > settings.norm_drift_bound * initial_norm.max(1e-300) {
            return Err(GridError::NormDrift {
                t,
                initial: initial_norm,
                current: norm,
                bound: settings.norm_drift_bound,
            });
        }
        if boundary > settings.boundary_bound {
            return Err(GridError::BoundaryLeak {
                t,
                amplitude: boundary,
                bound: settings.boundary_bound,
            });
        }
        Ok((norm, energy, boundary))
    };

    check(t, &cur, &mut traj)?;

    for &t_out in output_times {
        let span = t_out - t;
        if span < -1e-12 {
            return Err(GridError::BadSchedule);
        }
        let n_full = (span / settings.dt + 1e-9).floor() as u64;
        let seg_start = t;
        for i in 0..n_full {
            match settings.scheme {
                Scheme::Euler => {
                    euler_kernel(&cur, &mut next, inv_dx2, settings.dt, settings.nonlinear)
                }
                Scheme::Rk4 => rk4_kernel(
                    &cur,
                    &mut next,
                    rk4_buf.as_mut().expect("rk4 buffers"),
                    inv_dx2,
                    settings.dt,
                    settings.nonlinear,
                ),
            }
            std::mem::swap(&mut cur, &mut next);
            steps_since_monitor += 1;
            if steps_since_monitor >= monitor_interval {
                steps_since_monitor = 0;
                check(seg_start + (i + 1) as f64 * settings.dt, &cur, &mut traj)?;
            }
        }
        t = seg_start + n_full as f64 * settings.dt;
        let remainder = t_out - t;
        if remainder > 1e-12 {
            match settings.scheme {
                Scheme::Euler => euler_kernel(&cur, &mut next, inv_dx2, remainder, settings.nonlinear),
                Scheme::Rk4 => rk4_kernel(
                    &cur,
                    &mut next,
                    rk4_buf.as_mut().expect("rk4 buffers"),
                    inv_dx2,
                    remainder,
                    settings.nonlinear,
                ),
            }
            std::mem::swap(&mut cur, &mut next);
        }
        t = t_out;
        let (norm, energy, boundary) = check(t, &cur, &mut traj)?;
        traj.samples.push(GridSample {
            state: GridState {
                x_min: state.x_min,
                dx: state.dx,
                amplitudes: cur.clone(),
                time: t,
            },
            norm,
            energy,
            boundary,
        });
    }
    Ok(traj)
}
