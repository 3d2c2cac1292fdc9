#![allow(dead_code)]

use commute_core::applications::haar_unitary;
use commute_core::types::{real_diagonal, CMatrix, CommutingTuple, HermitianMatrix, SelfAdjointTuple, Settings};
use commute_core::validate_commuting;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
    let m = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    HermitianMatrix::new(&m + m.adjoint()).unwrap()
}

/// `U diag(points[.][r]) U*` for each coordinate `r`.
pub fn planted(u: &CMatrix, points: &[Vec<f64>]) -> CommutingTuple {
    let d = points[0].len();
    let comps = (0..d)
        .map(|r| {
            let col: Vec<f64> = points.iter().map(|x| x[r]).collect();
            HermitianMatrix::new(u * real_diagonal(&col) * u.adjoint()).unwrap()
        })
        .collect();
    validate_commuting(&SelfAdjointTuple::new(comps).unwrap(), &Settings::default().tol).unwrap()
}

pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    haar_unitary(n, rng)
}

pub fn random_points(n: usize, d: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.random_range(lo..hi)).collect()).collect()
}

pub fn sorted_points(mut pts: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    pts.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    pts
}
