//! Shared oracles for the integration suites: adaptive quadrature (kept
//! independent of the closed-form moment path) and a fixed-step RK4 for
//! Hamilton's equations.

use num_complex::Complex64;

/// Adaptive Simpson quadrature of a complex integrand.
pub fn adaptive_simpson<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64) -> Complex64 {
    fn simpson(fa: Complex64, fm: Complex64, fb: Complex64, h: f64) -> Complex64 {
        (h / 6.0) * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> Complex64>(
        f: &F,
        a: f64,
        b: f64,
        fa: Complex64,
        fm: Complex64,
        fb: Complex64,
        whole: Complex64,
        tol: f64,
        depth: u32,
    ) -> Complex64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        // the first levels always split so a localized bump between the
        // initial sample points cannot fake convergence
        let forced = depth > 40;
        if depth == 0 || (!forced && delta.norm() <= 15.0 * tol) {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fm = f(0.5 * (a + b));
    let fb = f(b);
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Fixed-step classical RK4 for a real two-component system; returns the
/// state at each requested output time (multiples of dt are assumed).
pub fn rk4_trajectory(
    rhs: impl Fn(f64, [f64; 2]) -> [f64; 2],
    y0: [f64; 2],
    dt: f64,
    output_times: &[f64],
) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(output_times.len());
    let mut t = 0.0;
    let mut y = y0;
    for &t_out in output_times {
        while t < t_out - 1e-12 {
            let h = dt.min(t_out - t);
            let k1 = rhs(t, y);
            let k2 = rhs(t + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
            let k3 = rhs(t + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
            let k4 = rhs(t + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
            y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
            y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
            t += h;
        }
        out.push(y);
    }
    out
}
