//! Exact complex-Gaussian algebra.
//!
//! Everything the variational engine needs reduces to moments of a single
//! combined exponent: products of (conjugated) Gaussians are again Gaussians,
//! and `∫ x^d exp(-a x² + b x + c) dx` has a closed form for d = 0..=4.

use num_complex::Complex64;
use thiserror::Error;

/// Relative tolerance for the Hermiticity residue of norm and energy sums.
/// A violation signals a broken integral implementation, not bad input.
pub const HERMITICITY_REL_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum GaussianError {
    #[error("moment order {0} unsupported (implemented for d = 0..=4)")]
    MomentOrder(usize),
    #[error("non-normalizable integrand: Re(a) = {0} must be positive")]
    NonNormalizable(f64),
}

/// One complex Gaussian `exp(-α x² + β x + γ)`.
///
/// `α` sets the width (Re α > 0 for normalizability), `β` the center and
/// momentum, `γ` the log-amplitude and phase jointly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTerm {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
}

impl GaussianTerm {
    pub fn new(
        alpha: Complex64,
        beta: Complex64,
        gamma: Complex64,
    ) -> Result<Self, GaussianError> {
        if !(alpha.re > 0.0) {
            return Err(GaussianError::NonNormalizable(alpha.re));
        }
        Ok(Self { alpha, beta, gamma })
    }

    /// Real-α shorthand used by seeds and tests.
    pub fn real(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self {
            alpha: Complex64::new(alpha, 0.0),
            beta: Complex64::new(beta, 0.0),
            gamma: Complex64::new(gamma, 0.0),
        }
    }

    pub fn evaluate(&self, x: f64) -> Complex64 {
        (-self.alpha * (x * x) + self.beta * x + self.gamma).exp()
    }

    /// Coefficients (c2, c1, c0) with d²/dx² g = (c2 x² + c1 x + c0) g.
    pub fn second_derivative_factor(&self) -> (Complex64, Complex64, Complex64) {
        let (a, b) = (self.alpha, self.beta);
        (4.0 * a * a, -4.0 * a * b, b * b - 2.0 * a)
    }

    /// Central position Re(β)/(2 Re α); exact for real α.
    pub fn position(&self) -> f64 {
        self.beta.re / (2.0 * self.alpha.re)
    }

    /// Momentum parameter Im(β); exact for real α.
    pub fn momentum(&self) -> f64 {
        self.beta.im
    }
}

/// Superposition ψ = Σ_n exp(-α_n x² + β_n x + γ_n).
///
/// Engine states carry at least one term; an empty sum is the zero function
/// (norm and energy 0) and is accepted by the algebra below.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GaussianSum {
    pub terms: Vec<GaussianTerm>,
}

impl GaussianSum {
    pub fn new(terms: Vec<GaussianTerm>) -> Self {
        Self { terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn evaluate(&self, x: f64) -> Complex64 {
        self.terms.iter().map(|g| g.evaluate(x)).sum()
    }

    /// ⟨ψ|ψ⟩ as the full double sum of pair overlaps. The imaginary residue
    /// must cancel by Hermiticity; a residue beyond tolerance panics.
    pub fn norm_squared(&self) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in &self.terms {
            for n in &self.terms {
                let e = product_exponent(&[*k], &[*n]);
                acc += moment_table(&e)[0];
            }
        }
        real_part_checked(acc, "norm_squared")
    }

    /// Mean-field energy ⟨-d²/dx² - ½|ψ|²⟩.
    pub fn energy(&self) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in &self.terms {
            for n in &self.terms {
                let e = product_exponent(&[*k], &[*n]);
                let m = moment_table(&e);
                let (c2, c1, c0) = n.second_derivative_factor();
                acc -= c2 * m[2] + c1 * m[1] + c0 * m[0];
            }
        }
        for k in &self.terms {
            for m2 in &self.terms {
                for l in &self.terms {
                    for n in &self.terms {
                        let e = product_exponent(&[*k, *m2], &[*l, *n]);
                        acc -= 0.5 * moment_table(&e)[0];
                    }
                }
            }
        }
        real_part_checked(acc, "energy")
    }
}

fn real_part_checked(z: Complex64, what: &str) -> f64 {
    assert!(
        z.im.abs() <= HERMITICITY_REL_TOL * z.re.abs() + 1e-14,
        "{what}: Hermiticity residue Im = {} vs Re = {}",
        z.im,
        z.re
    );
    z.re
}

/// Combined exponent of a product of Gaussians, `exp(-a x² + b x + c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentTriple {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

/// Exponent of `∏ conj(g_k) · ∏ g_n` over the two slices.
pub fn product_exponent(conjugated: &[GaussianTerm], plain: &[GaussianTerm]) -> ExponentTriple {
    assert!(
        !conjugated.is_empty() || !plain.is_empty(),
        "product of an empty set of Gaussians"
    );
    let mut e = ExponentTriple {
        a: Complex64::new(0.0, 0.0),
        b: Complex64::new(0.0, 0.0),
        c: Complex64::new(0.0, 0.0),
    };
    for g in conjugated {
        e.a += g.alpha.conj();
        e.b += g.beta.conj();
        e.c += g.gamma.conj();
    }
    for g in plain {
        e.a += g.alpha;
        e.b += g.beta;
        e.c += g.gamma;
    }
    e
}

/// All moments M_0..M_4 of the exponent in one recurrence pass.
///
/// M_0 = √(π/a)·exp(b²/4a + c); differentiating with respect to b gives
/// M_d = [b·M_{d-1} + (d-1)·M_{d-2}] / (2a).
///
/// Callers guarantee Re(a) > 0 (checked in [`moment_integral`], debug-checked
/// here); the principal square root never crosses the branch cut then.
pub(crate) fn moment_table(e: &ExponentTriple) -> [Complex64; 5] {
    debug_assert!(e.a.re > 0.0, "moment_table needs Re(a) > 0, got {}", e.a);
    let m0 = (std::f64::consts::PI / e.a).sqrt() * (e.b * e.b / (4.0 * e.a) + e.c).exp();
    let inv2a = 0.5 / e.a;
    let m1 = e.b * m0 * inv2a;
    let m2 = (e.b * m1 + m0) * inv2a;
    let m3 = (e.b * m2 + 2.0 * m1) * inv2a;
    let m4 = (e.b * m3 + 3.0 * m2) * inv2a;
    [m0, m1, m2, m3, m4]
}

/// `∫ x^d exp(-a x² + b x + c) dx` over the real line, d = 0..=4.
pub fn moment_integral(d: usize, e: &ExponentTriple) -> Result<Complex64, GaussianError> {
    if d > 4 {
        return Err(GaussianError::MomentOrder(d));
    }
    if !(e.a.re > 0.0) {
        return Err(GaussianError::NonNormalizable(e.a.re));
    }
    Ok(moment_table(e)[d])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn triple(a: Complex64, b: Complex64, cc: Complex64) -> ExponentTriple {
        ExponentTriple { a, b, c: cc }
    }

    #[test]
    fn moment_standard_gaussian() {
        let e = triple(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        let pi = std::f64::consts::PI;
        assert_relative_eq!(
            moment_integral(0, &e).unwrap().re,
            pi.sqrt(),
            max_relative = 1e-15
        );
        assert_eq!(moment_integral(1, &e).unwrap(), c(0.0, 0.0));
        assert_relative_eq!(
            moment_integral(2, &e).unwrap().re,
            pi.sqrt() / 2.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn moment_shifted_exponent() {
        // d = 0, a = 2, b = 1: sqrt(pi/2) e^{1/8}, frozen from adaptive quadrature
        let e = triple(c(2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        let expect = (std::f64::consts::PI / 2.0).sqrt() * (0.125f64).exp();
        assert_relative_eq!(
            moment_integral(0, &e).unwrap().re,
            expect,
            max_relative = 1e-15
        );
        assert_relative_eq!(expect, 1.420190975905843, max_relative = 1e-13);
    }

    #[test]
    fn moment_rejects_bad_input() {
        let e = triple(c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        assert_eq!(
            moment_integral(0, &e),
            Err(GaussianError::NonNormalizable(-1.0))
        );
        let ok = triple(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        assert_eq!(moment_integral(5, &ok), Err(GaussianError::MomentOrder(5)));
    }

    #[test]
    fn product_exponent_examples() {
        let g = GaussianTerm::real(1.0, 0.0, 0.0);
        let e = product_exponent(&[g], &[g]);
        assert_eq!(e.a, c(2.0, 0.0));
        assert_eq!(e.b, c(0.0, 0.0));

        let gc = GaussianTerm::new(c(1.0, 1.0), c(0.0, 1.0), c(0.0, 0.0)).unwrap();
        let e = product_exponent(&[gc], &[]);
        assert_eq!(e.a, c(1.0, -1.0));
        assert_eq!(e.b, c(0.0, -1.0));

        let e = product_exponent(&[g, g], &[g, g]);
        assert_eq!(e.a, c(4.0, 0.0));
    }

    #[test]
    fn evaluate_examples() {
        let g = GaussianTerm::real(1.0, 0.0, 0.0);
        let s = GaussianSum::new(vec![g]);
        assert_eq!(s.evaluate(0.0), c(1.0, 0.0));
        assert_relative_eq!(s.evaluate(1.0).re, (-1.0f64).exp(), max_relative = 1e-15);
        let two = GaussianSum::new(vec![g, g]);
        assert_eq!(two.evaluate(0.0), c(2.0, 0.0));
    }

    #[test]
    fn norm_squared_examples() {
        // alpha = 1/2: |psi|^2 = e^{-x^2}, integral sqrt(pi)
        let s = GaussianSum::new(vec![GaussianTerm::real(0.5, 0.0, 0.0)]);
        assert_relative_eq!(
            s.norm_squared(),
            std::f64::consts::PI.sqrt(),
            max_relative = 1e-14
        );
        // gamma chosen so the prefactor is pi^{-1/4}: unit norm
        let gamma = -0.25 * std::f64::consts::PI.ln();
        let s = GaussianSum::new(vec![GaussianTerm::real(0.5, 0.0, gamma)]);
        assert_relative_eq!(s.norm_squared(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn second_derivative_factor_examples() {
        let (c2, c1, c0) = GaussianTerm::real(1.0, 0.0, 0.0).second_derivative_factor();
        assert_eq!((c2, c1, c0), (c(4.0, 0.0), c(0.0, 0.0), c(-2.0, 0.0)));

        let (c2, c1, c0) = GaussianTerm::real(0.5, 1.0, 0.0).second_derivative_factor();
        assert_eq!((c2, c1, c0), (c(1.0, 0.0), c(-2.0, 0.0), c(0.0, 0.0)));

        let g = GaussianTerm::new(c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)).unwrap();
        let (c2, c1, c0) = g.second_derivative_factor();
        assert_eq!(c2, c(4.0, 0.0));
        assert_eq!(c1, c(0.0, -4.0));
        assert_eq!(c0, c(-3.0, 0.0));
    }

    #[test]
    fn energy_of_single_gaussian_ground_state() {
        // normalized width 1/(16 pi): E = -1/(16 pi)
        let alpha = 1.0 / (16.0 * std::f64::consts::PI);
        let gamma = -0.25 * (std::f64::consts::PI / (2.0 * alpha)).ln();
        let s = GaussianSum::new(vec![GaussianTerm::real(alpha, 0.0, gamma)]);
        assert_relative_eq!(s.norm_squared(), 1.0, max_relative = 1e-13);
        assert_relative_eq!(s.energy(), -alpha, max_relative = 1e-12);
    }

    #[test]
    fn energy_of_empty_state_is_zero() {
        let s = GaussianSum::default();
        assert_eq!(s.norm_squared(), 0.0);
        assert_eq!(s.energy(), 0.0);
    }

    #[test]
    fn hermiticity_of_pair_overlaps() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let mut term = || {
                GaussianTerm::new(
                    c(rng.gen_range(0.05..5.0), rng.gen_range(-1.0..1.0)),
                    c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
                    c(rng.gen_range(-1.0..1.0), rng.gen_range(-3.0..3.0)),
                )
                .unwrap()
            };
            let (g1, g2) = (term(), term());
            for d in 0..=4 {
                let kn = moment_integral(d, &product_exponent(&[g1], &[g2])).unwrap();
                let nk = moment_integral(d, &product_exponent(&[g2], &[g1])).unwrap();
                let scale = kn.norm().max(1e-300);
                assert!(
                    (kn - nk.conj()).norm() <= 1e-12 * scale,
                    "<g1|x^{d}|g2> = {kn} vs conj(<g2|x^{d}|g1>) = {}",
                    nk.conj()
                );
            }
        }
    }
}
