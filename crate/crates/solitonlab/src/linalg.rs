//! Small dense complex linear algebra for the variational engine.
//!
//! The systems are tiny (3·N_g ≤ a few dozen), so a direct LU with partial
//! pivoting plus an explicit-inverse condition estimate is the main path, and
//! a one-sided Jacobi SVD provides the minimum-norm least-squares fallback
//! for (near-)singular systems.

use num_complex::Complex64;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self[(i, j)] * x[j])
                    .sum::<Complex64>()
            })
            .collect()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting. `None` if a pivot is exactly or
/// nearly zero relative to the matrix scale.
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
}

pub fn lu_factor(a: &CMatrix) -> Option<Lu> {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let scale = lu.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    for k in 0..n {
        let (mut piv, mut pmag) = (k, lu[(k, k)].norm());
        for i in k + 1..n {
            let m = lu[(i, k)].norm();
            if m > pmag {
                piv = i;
                pmag = m;
            }
        }
        if pmag <= 1e-300 || pmag <= f64::EPSILON * scale * 1e-2 {
            return None;
        }
        if piv != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(piv, j)];
                lu[(piv, j)] = t;
            }
            perm.swap(k, piv);
        }
        let inv_piv = Complex64::new(1.0, 0.0) / lu[(k, k)];
        for i in k + 1..n {
            let f = lu[(i, k)] * inv_piv;
            lu[(i, k)] = f;
            for j in k + 1..n {
                let sub = f * lu[(k, j)];
                lu[(i, j)] -= sub;
            }
        }
    }
    Some(Lu { lu, perm })
}

impl Lu {
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.rows;
        assert_eq!(b.len(), n);
        let mut y: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                let sub = self.lu[(i, j)] * y[j];
                y[i] -= sub;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let sub = self.lu[(i, j)] * y[j];
                y[i] -= sub;
            }
            y[i] /= self.lu[(i, i)];
        }
        y
    }
}

/// 1-norm condition estimate via the explicit inverse (matrices are tiny).
/// `f64::INFINITY` when the factorization failed.
pub fn condition_estimate(a: &CMatrix) -> f64 {
    let n = a.rows;
    let Some(lu) = lu_factor(a) else {
        return f64::INFINITY;
    };
    let mut inv_norm: f64 = 0.0;
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    let mut col_sums = vec![0.0; n];
    for j in 0..n {
        e[j] = Complex64::new(1.0, 0.0);
        let col = lu.solve(&e);
        e[j] = Complex64::new(0.0, 0.0);
        for (i, z) in col.iter().enumerate() {
            col_sums[i] += z.norm();
        }
        let s: f64 = col.iter().map(|z| z.norm()).sum();
        inv_norm = inv_norm.max(s);
    }
    a.norm_one() * inv_norm
}

const JACOBI_SWEEPS: usize = 60;
const JACOBI_TOL: f64 = 1e-14;

/// Thin SVD A = U Σ Vᴴ by one-sided Jacobi on the columns. Returns
/// (u_columns, sigma, v_columns); columns with σ = 0 get a zero u column.
pub fn jacobi_svd(a: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let (m, n) = (a.rows, a.cols);
    let mut u = a.clone();
    let mut v = CMatrix::identity(n);
    for _ in 0..JACOBI_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let mut hpp = 0.0;
                let mut hqq = 0.0;
                let mut hpq = Complex64::new(0.0, 0.0);
                for i in 0..m {
                    let (up, uq) = (u[(i, p)], u[(i, q)]);
                    hpp += up.norm_sqr();
                    hqq += uq.norm_sqr();
                    hpq += up.conj() * uq;
                }
                let mag = hpq.norm();
                if mag <= JACOBI_TOL * (hpp * hqq).sqrt() || mag == 0.0 {
                    continue;
                }
                off = off.max(mag / (hpp * hqq).sqrt().max(1e-300));
                let phase = hpq / mag;
                // zero the rotated correlation: (1 - t²) + 2ζt = 0, stable root
                let zeta = (hqq - hpp) / (2.0 * mag);
                let t = -zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (up, uq) = (u[(i, p)], u[(i, q)]);
                    u[(i, p)] = c * up + s * phase.conj() * uq;
                    u[(i, q)] = -s * phase * up + c * uq;
                }
                for i in 0..n {
                    let (vp, vq) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * vp + s * phase.conj() * vq;
                    v[(i, q)] = -s * phase * vp + c * vq;
                }
            }
        }
        if off <= JACOBI_TOL {
            break;
        }
    }
    let mut sigma = vec![0.0; n];
    for j in 0..n {
        let norm = (0..m).map(|i| u[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        sigma[j] = norm;
        if norm > 0.0 {
            for i in 0..m {
                u[(i, j)] /= norm;
            }
        }
    }
    (u, sigma, v)
}

/// Minimum-norm least-squares solution of A x = b. Singular values below
/// `rcond · σ_max` are truncated.
pub fn min_norm_least_squares(a: &CMatrix, b: &[Complex64], rcond: f64) -> Vec<Complex64> {
    assert_eq!(b.len(), a.rows);
    let (u, sigma, v) = jacobi_svd(a);
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let mut x = vec![Complex64::new(0.0, 0.0); a.cols];
    if smax == 0.0 {
        return x;
    }
    for j in 0..a.cols {
        if sigma[j] <= rcond * smax {
            continue;
        }
        let mut coef = Complex64::new(0.0, 0.0);
        for i in 0..a.rows {
            coef += u[(i, j)].conj() * b[i];
        }
        coef /= sigma[j];
        for i in 0..a.cols {
            x[i] += coef * v[(i, j)];
        }
    }
    x
}

pub fn vec_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
        let mut a = CMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                a[(i, j)] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        a
    }

    #[test]
    fn lu_solves_known_system() {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 0)] = c(0.0, 1.0);
        a[(0, 1)] = c(2.0, 0.0);
        a[(1, 0)] = c(1.0, 0.0);
        a[(1, 1)] = c(0.0, -1.0);
        let x_true = vec![c(1.0, 2.0), c(-3.0, 0.5)];
        let b = a.mul_vec(&x_true);
        let x = lu_factor(&a).unwrap().solve(&b);
        for (xi, ti) in x.iter().zip(&x_true) {
            assert!((xi - ti).norm() < 1e-14);
        }
    }

    #[test]
    fn lu_random_residuals() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in [1usize, 3, 8, 18] {
            let a = random_matrix(&mut rng, n, n);
            let b: Vec<_> = (0..n)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let x = lu_factor(&a).unwrap().solve(&b);
            let r = a.mul_vec(&x);
            let res: f64 = r.iter().zip(&b).map(|(ri, bi)| (ri - bi).norm()).sum();
            assert!(res < 1e-11, "n={n} residual {res}");
        }
    }

    #[test]
    fn lu_detects_singular() {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 0)] = c(1.0, 0.0);
        a[(0, 1)] = c(2.0, 0.0);
        a[(1, 0)] = c(2.0, 0.0);
        a[(1, 1)] = c(4.0, 0.0);
        assert!(lu_factor(&a).is_none());
        assert!(condition_estimate(&a).is_infinite());
    }

    #[test]
    fn condition_of_identity() {
        let a = CMatrix::identity(5);
        assert_relative_eq!(condition_estimate(&a), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn svd_reconstructs_random_matrices() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for (m, n) in [(3usize, 3usize), (6, 4), (12, 12), (20, 9)] {
            let a = random_matrix(&mut rng, m, n);
            let (u, s, v) = jacobi_svd(&a);
            // reconstruct and compare entrywise
            for i in 0..m {
                for j in 0..n {
                    let mut z = Complex64::new(0.0, 0.0);
                    for k in 0..n {
                        z += u[(i, k)] * s[k] * v[(j, k)].conj();
                    }
                    assert!(
                        (z - a[(i, j)]).norm() < 1e-12,
                        "({m},{n}) entry ({i},{j}): {z} vs {}",
                        a[(i, j)]
                    );
                }
            }
            // U columns orthonormal where sigma > 0
            for p in 0..n {
                for q in 0..n {
                    if s[p] == 0.0 || s[q] == 0.0 {
                        continue;
                    }
                    let mut z = Complex64::new(0.0, 0.0);
                    for i in 0..m {
                        z += u[(i, p)].conj() * u[(i, q)];
                    }
                    let expect = if p == q { 1.0 } else { 0.0 };
                    assert!((z - expect).norm() < 1e-10, "UhU ({p},{q}) = {z}");
                }
            }
            // V unitary
            for p in 0..n {
                for q in 0..n {
                    let mut z = Complex64::new(0.0, 0.0);
                    for i in 0..n {
                        z += v[(i, p)].conj() * v[(i, q)];
                    }
                    let expect = if p == q { 1.0 } else { 0.0 };
                    assert!((z - expect).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn svd_matches_lu_on_well_conditioned() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let n = rng.gen_range(2..10);
            let a = random_matrix(&mut rng, n, n);
            let b: Vec<_> = (0..n)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let x1 = lu_factor(&a).unwrap().solve(&b);
            let x2 = min_norm_least_squares(&a, &b, 1e-13);
            for (p, q) in x1.iter().zip(&x2) {
                assert!((p - q).norm() < 1e-9, "{p} vs {q}");
            }
        }
    }

    #[test]
    fn min_norm_solution_of_rank_deficient_system() {
        // x1 + x2 = 2 twice: minimum-norm solution is (1, 1)
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 0)] = c(1.0, 0.0);
        a[(0, 1)] = c(1.0, 0.0);
        a[(1, 0)] = c(1.0, 0.0);
        a[(1, 1)] = c(1.0, 0.0);
        let x = min_norm_least_squares(&a, &[c(2.0, 0.0), c(2.0, 0.0)], 1e-13);
        assert!((x[0] - c(1.0, 0.0)).norm() < 1e-13);
        assert!((x[1] - c(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn identity_system_round_trip() {
        let a = CMatrix::identity(3);
        let b = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let x = lu_factor(&a).unwrap().solve(&b);
        assert_eq!(x, b);
    }
}
