//! Adaptive embedded Runge-Kutta integration for complex state vectors.
//!
//! Dormand-Prince 5(4) with the FSAL property; absolute and relative
//! tolerance share one value. Output times are hit exactly by clamping the
//! step at each requested time while keeping the adaptive step memory.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("step budget exhausted at t = {t} after {steps} steps")]
    MaxSteps { t: f64, steps: u64 },
    #[error("output times must be strictly increasing and start at or after t0")]
    BadSchedule,
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    /// Shared absolute and relative tolerance.
    pub tol: f64,
    /// Abort threshold for the step size.
    pub min_step: f64,
    pub max_steps: u64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            min_step: 1e-12,
            max_steps: 50_000_000,
        }
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
// b - b*: weights of the embedded error estimate
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrate `dy/dt = f(t, y)` from `t0`, returning the state at each
/// requested output time (which must be strictly increasing, first ≥ t0).
pub fn integrate<F>(
    mut f: F,
    t0: f64,
    y0: &[Complex64],
    output_times: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<(f64, Vec<Complex64>)>, OdeError>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let n = y0.len();
    if output_times.is_empty()
        || output_times[0] < t0 - 1e-12
        || output_times.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(OdeError::BadSchedule);
    }
    let mut out = Vec::with_capacity(output_times.len());
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![Complex64::new(0.0, 0.0); n];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut k5 = k1.clone();
    let mut k6 = k1.clone();
    let mut k7 = k1.clone();
    let mut stage = k1.clone();
    let mut y_new = k1.clone();
    f(t, &y, &mut k1);

    let mut h = initial_step(&k1, &y, opts.tol);
    let mut steps: u64 = 0;

    for &t_out in output_times {
        if (t_out - t).abs() <= 1e-13 * t_out.abs().max(1.0) {
            out.push((t_out, y.clone()));
            continue;
        }
        loop {
            if steps >= opts.max_steps {
                return Err(OdeError::MaxSteps { t, steps });
            }
            let h_step = h.min(t_out - t);
            if h_step < opts.min_step {
                return Err(OdeError::StepSizeUnderflow { t, h: h_step });
            }
            // stages
            for i in 0..n {
                stage[i] = y[i] + h_step * (A21 * k1[i]);
            }
            f(t + C2 * h_step, &stage, &mut k2);
            for i in 0..n {
                stage[i] = y[i] + h_step * (A31 * k1[i] + A32 * k2[i]);
            }
            f(t + C3 * h_step, &stage, &mut k3);
            for i in 0..n {
                stage[i] = y[i] + h_step * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            f(t + C4 * h_step, &stage, &mut k4);
            for i in 0..n {
                stage[i] =
                    y[i] + h_step * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            f(t + C5 * h_step, &stage, &mut k5);
            for i in 0..n {
                stage[i] = y[i]
                    + h_step
                        * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            f(t + h_step, &stage, &mut k6);
            for i in 0..n {
                y_new[i] = y[i]
                    + h_step * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
            }
            f(t + h_step, &y_new, &mut k7);
            steps += 1;

            // weighted RMS error of the embedded pair
            let mut err_sq = 0.0;
            for i in 0..n {
                let e = h_step
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                let sc = opts.tol + opts.tol * y[i].norm().max(y_new[i].norm());
                err_sq += (e.norm() / sc).powi(2);
            }
            let err = (err_sq / n as f64).sqrt();

            if err.is_finite() && err <= 1.0 {
                t += h_step;
                std::mem::swap(&mut y, &mut y_new);
                std::mem::swap(&mut k1, &mut k7); // FSAL
                let factor = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
                h = (h_step * factor).max(h * 0.2);
                if (t_out - t) <= 1e-13 * t_out.abs().max(1.0) {
                    out.push((t_out, y.clone()));
                    break;
                }
            } else {
                let factor = if err.is_finite() {
                    (0.9 * err.powf(-0.2)).clamp(0.1, 1.0)
                } else {
                    0.1
                };
                h = h_step * factor;
                if h < opts.min_step {
                    return Err(OdeError::StepSizeUnderflow { t, h });
                }
            }
        }
    }
    Ok(out)
}

fn initial_step(f0: &[Complex64], y0: &[Complex64], tol: f64) -> f64 {
    let d0 = f0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let y0n = y0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if d0 <= 1e-300 {
        return 1e-6;
    }
    (0.01 * (y0n + tol) / d0).clamp(1e-10, 0.1)
}
