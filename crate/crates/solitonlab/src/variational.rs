//! Time-dependent variational principle over coupled Gaussians.
//!
//! The trial wave function ψ = Σ_n exp(-α_n x² + β_n x + γ_n) evolves by
//! projecting the equation of motion onto the tangent directions
//! ∂ψ/∂γ_k = g_k, ∂ψ/∂β_k = x·g_k, ∂ψ/∂α_k = -x²·g_k. The projection
//! yields per-term effective-potential coefficients (V₀ⁿ, V₁ⁿ, V₂ⁿ) from a
//! dense linear system, and the parameter equations of motion
//!
//!   α̇_n = -4iα_n² + iV₂ⁿ,  β̇_n = -4iα_nβ_n - iV₁ⁿ,
//!   γ̇_n = -2iα_n + iβ_n² - iV₀ⁿ.

use num_complex::Complex64;
use thiserror::Error;

use crate::gaussian::{moment_table, product_exponent, GaussianSum, GaussianTerm};
use crate::linalg::{self, CMatrix};
use crate::ode::{self, OdeError, OdeOptions};

/// Condition-number threshold beyond which the potential solve falls back to
/// minimum-norm least squares and flags the result as regularized.
pub const REGULARIZATION_COND: f64 = 1e12;

/// Acceptable linear-system residual: ‖Kv - r‖ ≤ RTOL·(‖K‖·‖v‖ + ‖r‖).
pub const SOLVE_RESIDUAL_RTOL: f64 = 1e-8;

/// Norm window enforced on evolutions started from normalized states.
pub const NORM_DRIFT_EPS: f64 = 1e-6;

/// Single-Gaussian stationary width, 1/(16π).
pub const SINGLE_GAUSSIAN_ALPHA: f64 = 1.0 / (16.0 * std::f64::consts::PI);

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("{source} ({regularized_steps} regularized solves up to the failure)")]
    Integration {
        source: OdeError,
        regularized_steps: u64,
    },
    #[error("variational state must contain at least one Gaussian")]
    EmptyState,
}

#[derive(Debug, Error)]
pub enum StationaryError {
    #[error("root search stalled at residual {residual:.3e} after {iterations} iterations (tolerance {tolerance:.1e})")]
    NonConvergence {
        residual: f64,
        iterations: usize,
        tolerance: f64,
    },
    #[error("need at least one Gaussian")]
    NoGaussians,
    #[error("seed widths must be positive, got {0}")]
    BadSeed(f64),
}

#[derive(Debug, Error)]
#[error("generalized coordinate must be positive, got q = {0}")]
pub struct DomainError(pub f64);

/// Full variational parameter vector at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalState {
    pub time: f64,
    pub psi: GaussianSum,
}

impl VariationalState {
    pub fn new(time: f64, psi: GaussianSum) -> Self {
        Self { time, psi }
    }
}

/// Per-term effective-potential coefficients [V₀ⁿ, V₁ⁿ, V₂ⁿ].
#[derive(Debug, Clone)]
pub struct PotentialCoefficients {
    pub values: Vec<[Complex64; 3]>,
    /// Set when the solve needed the least-squares fallback (near-coincident
    /// Gaussians make the overlap system singular).
    pub regularized: bool,
    pub residual: f64,
}

/// Projection system: K[(k,proj),(n,monomial)] V = r. Row order per term k is
/// (γ: g_k, β: x·g_k, α: -x²·g_k); column order per term n is (V₀, V₁, V₂).
pub fn assemble_system(state: &VariationalState) -> (CMatrix, Vec<Complex64>) {
    let terms = &state.psi.terms;
    let n = terms.len();
    let mut k_mat = CMatrix::zeros(3 * n, 3 * n);
    let mut r = vec![Complex64::new(0.0, 0.0); 3 * n];
    for (ki, gk) in terms.iter().enumerate() {
        for (ni, gn) in terms.iter().enumerate() {
            let m = moment_table(&product_exponent(&[*gk], &[*gn]));
            for (proj, sign) in [(0usize, 1.0), (1, 1.0), (2, -1.0)] {
                for mono in 0..3 {
                    k_mat[(3 * ki + proj, 3 * ni + mono)] = sign * m[proj + mono];
                }
            }
        }
        let mut acc = [Complex64::new(0.0, 0.0); 3];
        for gm in terms {
            for gl in terms {
                for gn in terms {
                    let m = moment_table(&product_exponent(&[*gk, *gm], &[*gl, *gn]));
                    acc[0] += m[0];
                    acc[1] += m[1];
                    acc[2] += m[2];
                }
            }
        }
        r[3 * ki] = -acc[0];
        r[3 * ki + 1] = -acc[1];
        r[3 * ki + 2] = acc[2];
    }
    (k_mat, r)
}

/// Direct solve with partial pivoting; least-squares fallback (with flag) on
/// an ill-conditioned or inconsistent system.
pub fn solve_potentials(k_mat: &CMatrix, r: &[Complex64]) -> PotentialCoefficients {
    let n_terms = r.len() / 3;
    let mut regularized = false;
    let mut v = match linalg::lu_factor(k_mat) {
        Some(lu) => {
            let cond = linalg::condition_estimate(k_mat);
            if cond.is_finite() && cond <= REGULARIZATION_COND {
                lu.solve(r)
            } else {
                regularized = true;
                linalg::min_norm_least_squares(k_mat, r, 1e-13)
            }
        }
        None => {
            regularized = true;
            linalg::min_norm_least_squares(k_mat, r, 1e-13)
        }
    };
    let mut residual = solve_residual(k_mat, &v, r);
    let bound =
        SOLVE_RESIDUAL_RTOL * (k_mat.norm_one() * linalg::vec_norm(&v) + linalg::vec_norm(r));
    if !regularized && !(residual <= bound) {
        regularized = true;
        v = linalg::min_norm_least_squares(k_mat, r, 1e-13);
        residual = solve_residual(k_mat, &v, r);
    }
    let values = (0..n_terms)
        .map(|i| [v[3 * i], v[3 * i + 1], v[3 * i + 2]])
        .collect();
    PotentialCoefficients {
        values,
        regularized,
        residual,
    }
}

fn solve_residual(k_mat: &CMatrix, v: &[Complex64], r: &[Complex64]) -> f64 {
    let kv = k_mat.mul_vec(v);
    kv.iter()
        .zip(r)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// dz/dt for every term.
#[derive(Debug, Clone)]
pub struct TimeDerivative {
    pub alpha_dot: Vec<Complex64>,
    pub beta_dot: Vec<Complex64>,
    pub gamma_dot: Vec<Complex64>,
    pub regularized: bool,
}

pub fn time_derivative(state: &VariationalState) -> TimeDerivative {
    let (k_mat, r) = assemble_system(state);
    let pot = solve_potentials(&k_mat, &r);
    let i = Complex64::i();
    let mut d = TimeDerivative {
        alpha_dot: Vec::with_capacity(state.psi.len()),
        beta_dot: Vec::with_capacity(state.psi.len()),
        gamma_dot: Vec::with_capacity(state.psi.len()),
        regularized: pot.regularized,
    };
    for (g, v) in state.psi.terms.iter().zip(&pot.values) {
        let (a, b) = (g.alpha, g.beta);
        d.alpha_dot.push(-4.0 * i * a * a + i * v[2]);
        d.beta_dot.push(-4.0 * i * a * b - i * v[1]);
        d.gamma_dot.push(-2.0 * i * a + i * b * b - i * v[0]);
    }
    d
}

/// One recorded point of an evolution.
#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub state: VariationalState,
    pub norm: f64,
    pub energy: f64,
    /// Cumulative count of regularized right-hand-side evaluations.
    pub regularized_steps: u64,
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
}

fn flatten(psi: &GaussianSum) -> Vec<Complex64> {
    let n = psi.len();
    let mut y = Vec::with_capacity(3 * n);
    y.extend(psi.terms.iter().map(|g| g.alpha));
    y.extend(psi.terms.iter().map(|g| g.beta));
    y.extend(psi.terms.iter().map(|g| g.gamma));
    y
}

fn unflatten(y: &[Complex64], n: usize) -> GaussianSum {
    GaussianSum::new(
        (0..n)
            .map(|i| GaussianTerm {
                alpha: y[i],
                beta: y[n + i],
                gamma: y[2 * n + i],
            })
            .collect(),
    )
}

/// Integrate the parameter equations of motion, sampling at `output_times`
/// (strictly increasing, first ≥ state.time). Norm, energy, and the
/// cumulative regularized-solve count are recorded at each sample.
pub fn evolve(
    state: &VariationalState,
    output_times: &[f64],
    tol: f64,
) -> Result<Trajectory, EvolveError> {
    let n = state.psi.len();
    if n == 0 {
        return Err(EvolveError::EmptyState);
    }
    let opts = OdeOptions {
        tol,
        ..Default::default()
    };
    let mut reg_steps: u64 = 0;
    let mut samples = Vec::with_capacity(output_times.len());
    let mut t = state.time;
    let mut y = flatten(&state.psi);
    for &t_out in output_times {
        let segment = ode::integrate(
            |_t, y: &[Complex64], dy: &mut [Complex64]| {
                let s = VariationalState::new(0.0, unflatten(y, n));
                let d = time_derivative(&s);
                if d.regularized {
                    reg_steps += 1;
                }
                for i in 0..n {
                    dy[i] = d.alpha_dot[i];
                    dy[n + i] = d.beta_dot[i];
                    dy[2 * n + i] = d.gamma_dot[i];
                }
            },
            t,
            &y,
            &[t_out],
            &opts,
        )
        .map_err(|source| EvolveError::Integration {
            source,
            regularized_steps: reg_steps,
        })?;
        let (t_new, y_new) = segment.into_iter().next().expect("one sample per segment");
        t = t_new;
        y = y_new;
        let psi = unflatten(&y, n);
        samples.push(TrajectorySample {
            norm: psi.norm_squared(),
            energy: psi.energy(),
            state: VariationalState::new(t, psi),
            regularized_steps: reg_steps,
        });
    }
    Ok(Trajectory { samples })
}

/// Stationary state from a damped-Newton root search.
#[derive(Debug, Clone)]
pub struct StationaryResult {
    pub state: VariationalState,
    /// Chemical potential (phase rotation rate e^{-iμt}).
    pub mu: f64,
    pub residual: f64,
}

const NEWTON_TOL: f64 = 1e-12;
const NEWTON_ACCEPT: f64 = 1e-6;
const NEWTON_MAX_ITER: usize = 200;

/// Ground state with `n_gaussians` coupled Gaussians, centered (β = 0), unit
/// norm, all width parameters real.
///
/// Seeds: geometric width ladder α_n = 1.13/(16π)·r^(n-(N-1)/2) with
/// r = 1 + 6.5/N (calibrated to the converged families), weights from a
/// least-squares fit of the ladder to the analytic sech profile. Unknowns are
/// (ln α_n, γ_n, μ); the residual stacks Im α̇_n, Im γ̇_n + μ, and ⟨ψ|ψ⟩ - 1.
pub fn stationary_state(
    n_gaussians: usize,
    seed_widths: Option<&[f64]>,
) -> Result<StationaryResult, StationaryError> {
    let n = n_gaussians;
    if n == 0 {
        return Err(StationaryError::NoGaussians);
    }
    let alphas: Vec<f64> = match seed_widths {
        Some(w) => {
            if w.len() != n {
                return Err(StationaryError::BadSeed(-1.0));
            }
            if let Some(&bad) = w.iter().find(|&&a| !(a > 0.0)) {
                return Err(StationaryError::BadSeed(bad));
            }
            w.to_vec()
        }
        None => {
            let ratio = 1.0 + 6.5 / n as f64;
            (0..n)
                .map(|i| {
                    1.13 * SINGLE_GAUSSIAN_ALPHA * ratio.powf(i as f64 - (n as f64 - 1.0) / 2.0)
                })
                .collect()
        }
    };
    let gammas: Vec<f64> = seed_log_weights(&alphas);

    let mut u: Vec<f64> = Vec::with_capacity(2 * n + 1);
    u.extend(alphas.iter().map(|a| a.ln()));
    u.extend(&gammas);
    u.push(-1.0 / 16.0);

    let residual_fn = |u: &[f64]| stationary_residual(u, n);
    let mut f = residual_fn(&u);
    let mut res = inf_norm(&f);
    let mut iterations = 0;
    while res > NEWTON_TOL && iterations < NEWTON_MAX_ITER {
        iterations += 1;
        let dim = 2 * n + 1;
        let mut jac = CMatrix::zeros(dim, dim);
        for j in 0..dim {
            let h = 1e-6 * u[j].abs().max(1e-2);
            let mut up = u.clone();
            let mut um = u.clone();
            up[j] += h;
            um[j] -= h;
            let (fp, fm) = (residual_fn(&up), residual_fn(&um));
            for i in 0..dim {
                jac[(i, j)] = Complex64::new((fp[i] - fm[i]) / (2.0 * h), 0.0);
            }
        }
        let rhs: Vec<Complex64> = f.iter().map(|&v| Complex64::new(-v, 0.0)).collect();
        let step: Vec<f64> = match linalg::lu_factor(&jac) {
            Some(lu) => lu.solve(&rhs).iter().map(|z| z.re).collect(),
            None => linalg::min_norm_least_squares(&jac, &rhs, 1e-13)
                .iter()
                .map(|z| z.re)
                .collect(),
        };
        // backtracking line search on the residual norm
        let f_norm = two_norm(&f);
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = u
                .iter()
                .zip(&step)
                .map(|(ui, si)| ui + lambda * si)
                .collect();
            if trial.iter().all(|v| v.is_finite() && v.abs() < 40.0) {
                let ft = residual_fn(&trial);
                if ft.iter().all(|v| v.is_finite()) && two_norm(&ft) < f_norm {
                    u = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
        res = inf_norm(&f);
    }
    if res > NEWTON_ACCEPT {
        return Err(StationaryError::NonConvergence {
            residual: res,
            iterations,
            tolerance: NEWTON_ACCEPT,
        });
    }
    let terms: Vec<GaussianTerm> = (0..n)
        .map(|i| GaussianTerm::real(u[i].exp(), 0.0, u[n + i]))
        .collect();
    Ok(StationaryResult {
        state: VariationalState::new(0.0, GaussianSum::new(terms)),
        mu: u[2 * n],
        residual: res,
    })
}

/// Linear least-squares fit of Σ w_n exp(-α_n x²) to the analytic soliton
/// profile √(1/8)/cosh(x/4); returns ln w_n (weights clipped positive).
fn seed_log_weights(alphas: &[f64]) -> Vec<f64> {
    let n = alphas.len();
    let xs: Vec<f64> = (0..1200).map(|i| i as f64 * 0.05).collect();
    let mut design = CMatrix::zeros(xs.len(), n);
    let mut target = Vec::with_capacity(xs.len());
    let amp = (1.0f64 / 8.0).sqrt();
    for (i, &x) in xs.iter().enumerate() {
        for (j, &a) in alphas.iter().enumerate() {
            design[(i, j)] = Complex64::new((-a * x * x).exp(), 0.0);
        }
        target.push(Complex64::new(amp / (x / 4.0).cosh(), 0.0));
    }
    let w = linalg::min_norm_least_squares(&design, &target, 1e-12);
    w.iter().map(|z| z.re.max(1e-8).ln()).collect()
}

fn stationary_residual(u: &[f64], n: usize) -> Vec<f64> {
    if u.iter().any(|v| !v.is_finite() || v.abs() > 40.0) {
        return vec![1e8; 2 * n + 1];
    }
    let terms: Vec<GaussianTerm> = (0..n)
        .map(|i| GaussianTerm::real(u[i].exp(), 0.0, u[n + i]))
        .collect();
    let psi = GaussianSum::new(terms);
    let state = VariationalState::new(0.0, psi);
    let d = time_derivative(&state);
    let mu = u[2 * n];
    let mut f = Vec::with_capacity(2 * n + 1);
    f.extend(d.alpha_dot.iter().map(|z| z.im));
    f.extend(d.gamma_dot.iter().map(|z| z.im + mu));
    f.push(state.psi.norm_squared() - 1.0);
    f
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn two_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Point of the single-Gaussian Hamiltonian picture
/// H(p, q) = p² + 1/(4q²) - 1/(4√π q).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianPoint {
    pub q: f64,
    pub p: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub hamiltonian: f64,
}

pub fn hamiltonian_picture(q: f64, p: f64) -> Result<HamiltonianPoint, DomainError> {
    if !(q > 0.0) {
        return Err(DomainError(q));
    }
    let kinetic = p * p;
    let potential = 0.25 / (q * q) - 0.25 / (std::f64::consts::PI.sqrt() * q);
    Ok(HamiltonianPoint {
        q,
        p,
        kinetic,
        potential,
        hamiltonian: kinetic + potential,
    })
}

/// Generalized coordinate q = 1/(2√Re α) and conjugate momentum of a single
/// Gaussian. The sign of p makes q̇ = +2p along the variational flow.
pub fn single_gaussian_phase_point(g: &GaussianTerm) -> (f64, f64) {
    let re = g.alpha.re;
    (0.5 / re.sqrt(), -g.alpha.im / re.sqrt())
}

/// Per-group and global observables of a variational state.
#[derive(Debug, Clone)]
pub struct GroupObservables {
    pub position: f64,
    pub momentum: f64,
    pub norm: f64,
}

#[derive(Debug, Clone)]
pub struct Observables {
    pub norm: f64,
    pub energy: f64,
    pub groups: Vec<GroupObservables>,
    /// Per-term (position, momentum) by the parameter formulas
    /// x_n = Re β_n / (2 Re α_n), p_n = Im β_n.
    pub terms: Vec<(f64, f64)>,
}

/// Observables with terms grouped into solitons. `grouping` must partition
/// the term indices. Group position and momentum are the quantum expectation
/// values ⟨x⟩ and Im⟨ψ_g|∂_x ψ_g⟩/⟨ψ_g|ψ_g⟩ over the group's sub-sum, which
/// reduce to the parameter formulas for a single real-width term.
pub fn extract_observables(state: &VariationalState, grouping: &[Vec<usize>]) -> Observables {
    let n = state.psi.len();
    let mut seen = vec![false; n];
    for g in grouping {
        for &i in g {
            assert!(
                i < n && !seen[i],
                "grouping must partition the term indices"
            );
            seen[i] = true;
        }
    }
    assert!(
        seen.iter().all(|&s| s),
        "grouping must partition the term indices"
    );
    let terms = &state.psi.terms;
    let groups = grouping
        .iter()
        .map(|idx| {
            let mut nrm = Complex64::new(0.0, 0.0);
            let mut xm = Complex64::new(0.0, 0.0);
            let mut pm = Complex64::new(0.0, 0.0);
            for &k in idx {
                for &ni in idx {
                    let m = moment_table(&product_exponent(&[terms[k]], &[terms[ni]]));
                    nrm += m[0];
                    xm += m[1];
                    pm += -2.0 * terms[ni].alpha * m[1] + terms[ni].beta * m[0];
                }
            }
            GroupObservables {
                position: (xm / nrm).re,
                momentum: pm.im / nrm.re,
                norm: nrm.re,
            }
        })
        .collect();
    Observables {
        norm: state.psi.norm_squared(),
        energy: state.psi.energy(),
        groups,
        terms: terms.iter().map(|g| (g.position(), g.momentum())).collect(),
    }
}
