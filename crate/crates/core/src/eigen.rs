//! Hermitian eigensolver (cyclic complex Jacobi).
//!
//! Jacobi is slow for large `n` but everything here is small, and it keeps
//! full relative accuracy for the tiny eigenvalues of the Rellich example.

use num_complex::Complex64;

use crate::types::CMatrix;

const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// `V diag(g(lambda)) V*`.
    pub fn apply(&self, g: impl Fn(f64) -> Complex64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let w = g(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// Eigen-decomposition of the Hermitian part of `a`.
pub fn hermitian_eigen(a: &CMatrix) -> HermitianEigen {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "square matrix expected");
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 || n == 0 {
        return HermitianEigen { values: vec![0.0; n], vectors: CMatrix::identity(n, n) };
    }
    let mut m = crate::types::hermitian_part(&a.map(|z| z / scale));
    let mut v = CMatrix::identity(n, n);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let b = m[(p, q)];
                let babs = b.norm();
                if babs == 0.0 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                if babs <= 1e-3 * f64::EPSILON * (app.abs() * aqq.abs()).sqrt() || babs < 1e-300 {
                    m[(p, q)] = Complex64::new(0.0, 0.0);
                    m[(q, p)] = Complex64::new(0.0, 0.0);
                    continue;
                }
                rotated = true;
                let phase = b / babs;
                let theta = (aqq - app) / (2.0 * babs);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                let ph = phase.conj();
                // J restricted to (p, q) is [[c, s], [-s ph, c ph]].
                for i in 0..n {
                    let xp = m[(i, p)];
                    let xq = m[(i, q)];
                    m[(i, p)] = xp * c - xq * (ph * s);
                    m[(i, q)] = xp * s + xq * (ph * c);
                }
                for j in 0..n {
                    let xp = m[(p, j)];
                    let xq = m[(q, j)];
                    m[(p, j)] = xp * c - xq * (phase * s);
                    m[(q, j)] = xp * s + xq * (phase * c);
                }
                m[(p, q)] = Complex64::new(0.0, 0.0);
                m[(q, p)] = Complex64::new(0.0, 0.0);
                m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
                for i in 0..n {
                    let xp = v[(i, p)];
                    let xq = v[(i, q)];
                    v[(i, p)] = xp * c - xq * (ph * s);
                    v[(i, q)] = xp * s + xq * (ph * c);
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re * scale).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        // Fix the phase so the largest component is real and positive.
        let mut best = 0;
        for r in 0..n {
            if v[(r, i)].norm() > v[(best, i)].norm() * (1.0 + 1e-12) {
                best = r;
            }
        }
        let ph = v[(best, i)].conj() / v[(best, i)].norm();
        for r in 0..n {
            vectors[(r, k)] = v[(r, i)] * ph;
        }
    }
    HermitianEigen { values, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let a = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        crate::types::hermitian_part(&a)
    }

    fn max_abs(a: &CMatrix) -> f64 {
        a.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn reconstructs_and_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..8 {
            let a = random_hermitian(n, &mut rng);
            let e = hermitian_eigen(&a);
            let rec = e.apply(|x| Complex64::new(x, 0.0));
            assert!(max_abs(&(rec - &a)) < 1e-13);
            let id = e.vectors.adjoint() * &e.vectors;
            assert!(max_abs(&(id - CMatrix::identity(n, n))) < 1e-13);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn agrees_with_nalgebra_on_real_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..7 {
            let r = DMatrix::<f64>::from_fn(n, n, |_, _| rng.random_range(-2.0..2.0));
            let s = &r + r.transpose();
            let mut reference: Vec<f64> = s.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
            reference.sort_by(f64::total_cmp);
            let e = hermitian_eigen(&s.map(|x| Complex64::new(x, 0.0)));
            for (a, b) in e.values.iter().zip(&reference) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn tiny_scale_keeps_relative_accuracy() {
        let eps = (-1.0f64 / 0.01).exp();
        let a = CMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(0.6 * eps, 0.0), Complex64::new(0.8 * eps, 0.0), Complex64::new(0.8 * eps, 0.0), Complex64::new(-0.6 * eps, 0.0)],
        );
        let e = hermitian_eigen(&a);
        assert!((e.values[0] / eps + 1.0).abs() < 1e-14);
        assert!((e.values[1] / eps - 1.0).abs() < 1e-14);
    }
}
