//! Soliton scenarios for both engines and cross-engine comparison metrics.
//!
//! A scenario lists per-soliton (x₀, p, φ, Gaussian count) plus lattice and
//! schedule settings. The variational initial state is the boosted stationary
//! Gaussian set per soliton; the lattice initial state samples the analytic
//! soliton profile.

use num_complex::Complex64;
use thiserror::Error;

use crate::gaussian::{moment_table, product_exponent, GaussianSum};
use crate::grid::{GridSettings, GridState, GridTrajectory};
use crate::variational::{self, Trajectory, VariationalState};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("solitons {i} and {j} overlap too strongly: |<psi_{i}|psi_{j}>| = {overlap:.3e} > {bound:.1e}; increase their separation")]
    Overlap {
        i: usize,
        j: usize,
        overlap: f64,
        bound: f64,
    },
    #[error("stationary state for a soliton failed: {0}")]
    Stationary(#[from] variational::StationaryError),
    #[error("scenario needs at least one soliton")]
    NoSolitons,
    #[error("invalid domain: x_min = {x_min}, x_max = {x_max}, dx = {dx}")]
    BadDomain { x_min: f64, x_max: f64, dx: f64 },
}

#[derive(Debug, Error)]
pub enum CompareError {
    #[error("scheduled time {0} is not present in both trajectories")]
    ScheduleMismatch(f64),
    #[error("trajectories sample different lattices")]
    LatticeMismatch,
}

/// Initial data of one soliton and the number of Gaussians allotted to it in
/// the variational engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonSpec {
    pub x0: f64,
    pub p: f64,
    pub phase: f64,
    pub gaussians: usize,
}

/// Full run configuration shared by both engines.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub solitons: Vec<SolitonSpec>,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub grid: GridSettings,
    pub var_tolerance: f64,
    pub output_times: Vec<f64>,
    /// Pairwise |⟨ψᵢ|ψⱼ⟩| allowed between the initial solitons.
    pub max_overlap: f64,
}

impl Scenario {
    pub fn n_points(&self) -> usize {
        ((self.x_max - self.x_min) / self.dx).round() as usize + 1
    }

    /// Two solitons at p = ±1 (well above the rest momentum √(1/48)),
    /// two Gaussians each, meeting at t = 8.
    pub fn high_energy_pair() -> Self {
        Self {
            solitons: vec![
                SolitonSpec {
                    x0: -16.0,
                    p: 1.0,
                    phase: 0.0,
                    gaussians: 2,
                },
                SolitonSpec {
                    x0: 16.0,
                    p: -1.0,
                    phase: 0.0,
                    gaussians: 2,
                },
            ],
            x_min: -80.0,
            x_max: 80.0,
            dx: 0.1,
            grid: GridSettings {
                dt: 2.5e-6,
                ..Default::default()
            },
            var_tolerance: 1e-10,
            output_times: vec![0.0, 4.0, 8.0, 12.0, 16.0, 20.0],
            max_overlap: 1e-2,
        }
    }

    /// Two solitons at p = ±0.05 (well below the rest momentum), one
    /// Gaussian each; the slow collision drives the engines apart.
    pub fn low_energy_pair() -> Self {
        Self {
            solitons: vec![
                SolitonSpec {
                    x0: -13.5,
                    p: 0.05,
                    phase: 0.0,
                    gaussians: 1,
                },
                SolitonSpec {
                    x0: 13.5,
                    p: -0.05,
                    phase: 0.0,
                    gaussians: 1,
                },
            ],
            x_min: -85.0,
            x_max: 85.0,
            dx: 0.25,
            grid: GridSettings {
                dt: 1e-5,
                ..Default::default()
            },
            var_tolerance: 1e-10,
            output_times: (0..=30).map(|k| 10.0 * k as f64).collect(),
            max_overlap: 1e-2,
        }
    }

    /// Two solitons at p = ±1.5 hitting one at rest, two Gaussians each.
    pub fn three_soliton() -> Self {
        Self {
            solitons: vec![
                SolitonSpec {
                    x0: -24.0,
                    p: 1.5,
                    phase: 0.0,
                    gaussians: 2,
                },
                SolitonSpec {
                    x0: 0.0,
                    p: 0.0,
                    phase: 0.0,
                    gaussians: 2,
                },
                SolitonSpec {
                    x0: 24.0,
                    p: -1.5,
                    phase: 0.0,
                    gaussians: 2,
                },
            ],
            x_min: -90.0,
            x_max: 90.0,
            dx: 0.1,
            grid: GridSettings {
                dt: 2.5e-6,
                ..Default::default()
            },
            var_tolerance: 1e-10,
            output_times: vec![0.0, 4.0, 8.0, 12.0, 18.0],
            max_overlap: 1e-2,
        }
    }

    /// One soliton at rest; mostly a fixture for fidelity tests.
    pub fn single_soliton_rest(gaussians: usize) -> Self {
        Self {
            solitons: vec![SolitonSpec {
                x0: 0.0,
                p: 0.0,
                phase: 0.0,
                gaussians,
            }],
            x_min: -60.0,
            x_max: 60.0,
            dx: 0.1,
            grid: GridSettings {
                dt: 5e-6,
                ..Default::default()
            },
            var_tolerance: 1e-10,
            output_times: vec![0.0, 5.0],
            max_overlap: 1e-2,
        }
    }
}

/// Analytic stationary soliton b/cosh(ax)·e^{-iμt}, a = √(-μ), b = √(-2μ).
pub fn analytic_ground_state(x: f64, t: f64, mu: f64) -> Result<Complex64, ScenarioError> {
    if !(mu < 0.0) {
        return Err(ScenarioError::BadDomain {
            x_min: mu,
            x_max: mu,
            dx: 0.0,
        });
    }
    let a = (-mu).sqrt();
    let b = (-2.0 * mu).sqrt();
    Ok(Complex64::new(b / (a * x).cosh(), 0.0) * (-Complex64::i() * (mu * t)).exp())
}

/// Moving unit-norm soliton √(1/8)·e^{ip(x-x₀)+iφ}/cosh[(x-x₀)/4] at t = 0.
pub fn analytic_moving_soliton(x: f64, spec: &SolitonSpec) -> Complex64 {
    let amp = (1.0f64 / 8.0).sqrt();
    let envelope = amp / ((x - spec.x0) / 4.0).cosh();
    (Complex64::i() * (spec.p * (x - spec.x0) + spec.phase)).exp() * envelope
}

/// The map g(x) → g(x-x₀)·e^{ip(x-x₀)+iφ} on every term:
/// α' = α, β' = β + 2αx₀ + ip, γ' = γ - αx₀² - βx₀ - ipx₀ + iφ.
pub fn boost_translate(psi: &GaussianSum, x0: f64, p: f64, phase: f64) -> GaussianSum {
    let i = Complex64::i();
    GaussianSum::new(
        psi.terms
            .iter()
            .map(|g| {
                let mut out = *g;
                out.beta = g.beta + 2.0 * g.alpha * x0 + i * p;
                out.gamma =
                    g.gamma - g.alpha * (x0 * x0) - g.beta * x0 - i * (p * x0) + i * phase;
                out
            })
            .collect(),
    )
}

/// Initial states for both engines plus the static soliton grouping of the
/// variational terms.
#[derive(Debug, Clone)]
pub struct InitialStates {
    pub variational: VariationalState,
    pub grouping: Vec<Vec<usize>>,
    pub grid: GridState,
}

/// Builds the variational state (boosted stationary Gaussians per soliton,
/// grouping fixed at seed order) and the sampled lattice state, after
/// checking that all pairwise soliton overlaps stay below the bound.
pub fn build_initial_states(scenario: &Scenario) -> Result<InitialStates, ScenarioError> {
    if scenario.solitons.is_empty() {
        return Err(ScenarioError::NoSolitons);
    }
    if !(scenario.dx > 0.0) || !(scenario.x_max > scenario.x_min) {
        return Err(ScenarioError::BadDomain {
            x_min: scenario.x_min,
            x_max: scenario.x_max,
            dx: scenario.dx,
        });
    }
    // one stationary solve per distinct Gaussian count
    let mut cache: std::collections::BTreeMap<usize, GaussianSum> = Default::default();
    for s in &scenario.solitons {
        if !cache.contains_key(&s.gaussians) {
            let sol = variational::stationary_state(s.gaussians, None)?;
            cache.insert(s.gaussians, sol.state.psi);
        }
    }
    let boosted: Vec<GaussianSum> = scenario
        .solitons
        .iter()
        .map(|s| boost_translate(&cache[&s.gaussians], s.x0, s.p, s.phase))
        .collect();

    for i in 0..boosted.len() {
        for j in i + 1..boosted.len() {
            let overlap = pair_overlap(&boosted[i], &boosted[j]);
            if overlap > scenario.max_overlap {
                return Err(ScenarioError::Overlap {
                    i,
                    j,
                    overlap,
                    bound: scenario.max_overlap,
                });
            }
        }
    }

    let mut terms = Vec::new();
    let mut grouping = Vec::new();
    for sub in &boosted {
        let start = terms.len();
        terms.extend(sub.terms.iter().copied());
        grouping.push((start..terms.len()).collect());
    }
    let variational = VariationalState::new(0.0, GaussianSum::new(terms));

    let solitons = scenario.solitons.clone();
    let grid = GridState::sample(
        scenario.x_min,
        scenario.dx,
        scenario.n_points(),
        0.0,
        move |x| solitons.iter().map(|s| analytic_moving_soliton(x, s)).sum(),
    );
    Ok(InitialStates {
        variational,
        grouping,
        grid,
    })
}

/// |⟨ψ₁|ψ₂⟩| between two (approximately unit-norm) Gaussian sums.
fn pair_overlap(a: &GaussianSum, b: &GaussianSum) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for gk in &a.terms {
        for gn in &b.terms {
            acc += moment_table(&product_exponent(&[*gk], &[*gn]))[0];
        }
    }
    acc.norm()
}

/// Per-schedule-time cross-engine mismatch record.
#[derive(Debug, Clone, Copy)]
pub struct ComparisonMetrics {
    pub time: f64,
    /// √∫(|ψ_var|² - |ψ_grid|²)² dx on the lattice.
    pub l2_density_mismatch: f64,
    pub sup_mismatch: f64,
    pub var_norm: f64,
    pub var_energy: f64,
    pub grid_norm: f64,
    pub grid_energy: f64,
}

/// Densities compared on the lattice (the variational ψ is evaluated
/// analytically at the lattice nodes; no interpolation error).
pub fn compare(
    var: &Trajectory,
    grid: &GridTrajectory,
    schedule: &[f64],
) -> Result<Vec<ComparisonMetrics>, CompareError> {
    let mut out = Vec::with_capacity(schedule.len());
    for &t in schedule {
        let vs = var
            .samples
            .iter()
            .find(|s| (s.state.time - t).abs() <= 1e-9 * t.abs().max(1.0))
            .ok_or(CompareError::ScheduleMismatch(t))?;
        let gs = grid
            .samples
            .iter()
            .find(|s| (s.state.time - t).abs() <= 1e-9 * t.abs().max(1.0))
            .ok_or(CompareError::ScheduleMismatch(t))?;
        let lattice = &gs.state;
        let mut sup: f64 = 0.0;
        let mut l2_acc = Vec::with_capacity(lattice.n_points());
        for (j, z) in lattice.amplitudes.iter().enumerate() {
            let x = lattice.x(j);
            let dv = vs.state.psi.evaluate(x).norm_sqr() - z.norm_sqr();
            sup = sup.max(dv.abs());
            l2_acc.push(dv * dv);
        }
        let l2 = trapezoid(&l2_acc, lattice.dx).sqrt();
        debug_assert!(l2.is_finite() && sup.is_finite());
        out.push(ComparisonMetrics {
            time: t,
            l2_density_mismatch: l2,
            sup_mismatch: sup,
            var_norm: vs.norm,
            var_energy: vs.energy,
            grid_norm: gs.norm,
            grid_energy: gs.energy,
        });
    }
    Ok(out)
}

fn trapezoid(values: &[f64], dx: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let sum: f64 = values.iter().sum();
    dx * (sum - 0.5 * (values[0] + values[values.len() - 1]))
}

/// Local density maxima above `frac`·max, as (position, height).
pub fn density_peaks(state: &GridState, frac: f64) -> Vec<(f64, f64)> {
    let rho = state.density();
    let max = rho.iter().cloned().fold(0.0, f64::max);
    let thr = frac * max;
    let mut peaks = Vec::new();
    for j in 1..rho.len().saturating_sub(1) {
        if rho[j] >= thr && rho[j] >= rho[j - 1] && rho[j] > rho[j + 1] {
            peaks.push((state.x(j), rho[j]));
        }
    }
    peaks
}

/// Half width of the integration window around each detected soliton.
const SOLITON_WINDOW: f64 = 12.0;
/// Minimal separation between distinct soliton peaks.
const PEAK_SEPARATION: f64 = 4.0;

/// Per-soliton (position, momentum) from the lattice state: the n_solitons
/// tallest well-separated density maxima define windows (peak ± 12, clipped
/// at half the distance to the neighbor peak); within each window, position
/// is the density-weighted mean and momentum is ∫Im(ψ̄ψ')dx / ∫|ψ|²dx.
///
/// When fewer than n_solitons separated peaks exist (merged packets), the
/// domain is split into n_solitons equal windows so the record stays total.
pub fn grid_soliton_observables(state: &GridState, n_solitons: usize) -> Vec<(f64, f64)> {
    assert!(n_solitons > 0);
    let all = density_peaks(state, 0.05);
    let mut by_height: Vec<(f64, f64)> = all;
    by_height.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.total_cmp(&b.0)));
    let mut kept: Vec<f64> = Vec::new();
    for (x, _) in by_height {
        if kept.len() >= n_solitons {
            break;
        }
        if kept.iter().all(|k| (k - x).abs() >= PEAK_SEPARATION) {
            kept.push(x);
        }
    }
    kept.sort_by(f64::total_cmp);

    let x_max = state.x(state.n_points() - 1);
    let windows: Vec<(f64, f64)> = if kept.len() == n_solitons {
        kept.iter()
            .enumerate()
            .map(|(i, &xc)| {
                let left_gap = if i > 0 {
                    (xc - kept[i - 1]) / 2.0
                } else {
                    SOLITON_WINDOW
                };
                let right_gap = if i + 1 < kept.len() {
                    (kept[i + 1] - xc) / 2.0
                } else {
                    SOLITON_WINDOW
                };
                (
                    (xc - left_gap.min(SOLITON_WINDOW)).max(state.x_min),
                    (xc + right_gap.min(SOLITON_WINDOW)).min(x_max),
                )
            })
            .collect()
    } else {
        let w = (x_max - state.x_min) / n_solitons as f64;
        (0..n_solitons)
            .map(|i| (state.x_min + i as f64 * w, state.x_min + (i + 1) as f64 * w))
            .collect()
    };

    let psi = &state.amplitudes;
    let n = psi.len();
    windows
        .iter()
        .map(|&(lo, hi)| {
            let mut mass = 0.0;
            let mut xw = 0.0;
            let mut pw = 0.0;
            for j in 0..n {
                let x = state.x(j);
                if x < lo || x > hi {
                    continue;
                }
                let rho = psi[j].norm_sqr();
                let left = if j > 0 { psi[j - 1] } else { Complex64::new(0.0, 0.0) };
                let right = if j + 1 < n {
                    psi[j + 1]
                } else {
                    Complex64::new(0.0, 0.0)
                };
                let deriv = (right - left) / (2.0 * state.dx);
                mass += rho;
                xw += x * rho;
                pw += (psi[j].conj() * deriv).im;
            }
            if mass <= 1e-300 {
                (0.5 * (lo + hi), 0.0)
            } else {
                (xw / mass, pw / mass)
            }
        })
        .collect()
}
