mod common;

use common::*;
use commute_core::curve::{curve_derivative, fd_tuple_derivative, sample, Curve};
use commute_core::tangency::{matrix_exponential, tangency_check, witness_curve};
use commute_core::types::{commutator, real_diagonal, CMatrix, HermitianMatrix, SelfAdjointTuple, Settings};
use commute_core::{joint_diagonalize, spectrum, validate_commuting, CommutingTuple, TolerancePolicy};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn identity_tuple(n: usize, d: usize) -> CommutingTuple {
    validate_commuting(&SelfAdjointTuple::new(vec![HermitianMatrix::identity(n); d]).unwrap(), &TolerancePolicy::default()).unwrap()
}

fn random_skew(n: usize, r: &mut ChaCha8Rng) -> CMatrix {
    let m = CMatrix::from_fn(n, n, |_, _| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)));
    (&m - m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// A tangent direction at `U diag(pts) U*` built from the curve `U e^{Yt}(D + t C)e^{-Yt}U*`,
/// with `Y` vanishing on equal joint eigenvalues and `C` diagonal.
fn planted_tangent(u: &CMatrix, pts: &[Vec<f64>], r: &mut ChaCha8Rng, y_scale: f64) -> SelfAdjointTuple {
    let n = pts.len();
    let d = pts[0].len();
    let mut y = random_skew(n, r) * Complex64::new(y_scale, 0.0);
    for i in 0..n {
        for j in 0..n {
            if pts[i] == pts[j] {
                y[(i, j)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    let comps = (0..d)
        .map(|k| {
            let dk = real_diagonal(&pts.iter().map(|x| x[k]).collect::<Vec<_>>());
            let c: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
            let inner = commutator(&y, &dk) + real_diagonal(&c);
            HermitianMatrix::new(u * inner * u.adjoint()).unwrap()
        })
        .collect();
    SelfAdjointTuple::new(comps).unwrap()
}

#[test]
fn identity_base_accepts_exactly_commuting_directions() {
    let mut r = rng(1);
    let s = identity_tuple(3, 2);
    let u = random_unitary(3, &mut r);
    let delta = planted(&u, &random_points(3, 2, -1.0, 1.0, &mut r));
    let rep = tangency_check(&s, &delta, &Settings::default()).unwrap();
    assert!(rep.tangent);
    let curve = witness_curve(rep.data.as_ref().unwrap()).unwrap();
    for t in [-0.5, 0.25, 0.9] {
        let want = s.as_tuple().add(&delta.scale(t)).unwrap();
        let got = curve.value(t);
        for k in 0..2 {
            assert!(max_diff(got.component(k).matrix(), want.component(k).matrix()) <= 1e-12);
        }
    }

    let sx = HermitianMatrix::from_real_rows(&[vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]]).unwrap();
    let sz = HermitianMatrix::diagonal(&[1.0, -1.0, 0.5]).unwrap();
    let bad = SelfAdjointTuple::new(vec![sx, sz]).unwrap();
    let rep = tangency_check(&s, &bad, &Settings::default()).unwrap();
    assert!(!rep.tangent);
    assert!(rep.block_residual > 1e-3);
    assert!(rep.data.is_none());
}

#[test]
fn zero_direction_gives_constant_curve() {
    let mut r = rng(2);
    let u = random_unitary(4, &mut r);
    let s = planted(&u, &random_points(4, 2, -1.0, 1.0, &mut r));
    let rep = tangency_check(&s, &SelfAdjointTuple::zeros(4, 2), &Settings::default()).unwrap();
    let curve = witness_curve(rep.data.as_ref().unwrap()).unwrap();
    for t in [-1.0, 0.3, 1.0] {
        let v = curve.value(t);
        assert!(max_diff(v.component(1).matrix(), s.component(1).matrix()) <= 1e-12);
    }
}

#[test]
fn pure_rotation_is_isospectral() {
    let mut r = rng(3);
    let pts = vec![vec![1.0, 0.0], vec![2.0, 1.0], vec![-1.0, 3.0]];
    let s = planted(&CMatrix::identity(3, 3), &pts);
    let y = random_skew(3, &mut r);
    let dirs = (0..2)
        .map(|k| {
            let dk = real_diagonal(&pts.iter().map(|x| x[k]).collect::<Vec<_>>());
            HermitianMatrix::new(commutator(&y, &dk)).unwrap()
        })
        .collect();
    let delta = SelfAdjointTuple::new(dirs).unwrap();
    let rep = tangency_check(&s, &delta, &Settings::default()).unwrap();
    assert!(rep.tangent);
    let curve = witness_curve(rep.data.as_ref().unwrap()).unwrap();
    let base = spectrum(&s, &Settings::default()).unwrap();
    for t in [-0.8, -0.1, 0.4, 1.0] {
        let sp = spectrum(&sample(&curve, t, &TolerancePolicy::default()).unwrap(), &Settings::default()).unwrap();
        for (a, b) in sp.iter().zip(&base) {
            assert!(a.iter().zip(b).all(|(p, q)| (p - q).abs() < 1e-10));
        }
    }
}

#[test]
fn exponential_is_unitary_with_inverse() {
    let mut r = rng(4);
    for n in 1..6 {
        let a = random_skew(n, &mut r);
        let e = matrix_exponential(&a).unwrap();
        let inv = matrix_exponential(&(-&a)).unwrap();
        assert!(max_diff(&(e * inv), &CMatrix::identity(n, n)) <= 1e-12);
    }
    let th = std::f64::consts::FRAC_PI_2;
    let a = CMatrix::from_row_slice(2, 2, &[0.0.into(), th.into(), (-th).into(), 0.0.into()]);
    let e = matrix_exponential(&a).unwrap();
    let want = CMatrix::from_row_slice(2, 2, &[th.cos().into(), th.sin().into(), (-th.sin()).into(), th.cos().into()]);
    assert!(max_diff(&e, &want) <= 1e-12);
    assert!(matrix_exponential(&CMatrix::identity(2, 2)).is_err());
}

#[test]
fn tangent_data_invariants() {
    let mut r = rng(5);
    let u = random_unitary(4, &mut r);
    let pts = vec![vec![0.5, 1.0], vec![-0.5, 1.0], vec![0.5, 1.0], vec![0.2, -0.4]];
    let s = planted(&u, &pts);
    let delta = planted_tangent(&u, &pts, &mut r, 1.0);
    let rep = tangency_check(&s, &delta, &Settings::default()).unwrap();
    assert!(rep.tangent, "{rep:?}");
    assert!(rep.q_spread <= 1e-8);
    let td = rep.data.unwrap();
    assert!(max_abs(&(&td.y + td.y.adjoint())) <= 1e-10);
    for i in 0..4 {
        for j in 0..4 {
            if td.diag.same_group(i, j) {
                assert_eq!(td.y[(i, j)], Complex64::new(0.0, 0.0));
            } else {
                assert!(td.gamma_tilde.iter().all(|g| g[(i, j)] == Complex64::new(0.0, 0.0)));
            }
        }
    }
    for k in 0..2 {
        assert!(max_diff(&td.reconstructed_direction(k), delta.component(k).matrix()) <= 1e-10);
    }
}

fn assert_witness(s: &CommutingTuple, delta: &SelfAdjointTuple) {
    let rep = tangency_check(s, delta, &Settings::default()).unwrap();
    assert!(rep.tangent, "{rep:?}");
    let curve = witness_curve(rep.data.as_ref().unwrap()).unwrap();
    let v0 = curve.value(0.0);
    for k in 0..s.d() {
        assert!(max_diff(v0.component(k).matrix(), s.component(k).matrix()) <= 1e-10);
    }
    for i in 0..20 {
        let t = -1.0 + 2.0 * i as f64 / 19.0;
        assert!(sample(&curve, t, &TolerancePolicy::default()).is_ok());
    }
    let exact = curve_derivative(&curve, 0.0, 1).unwrap();
    for k in 0..s.d() {
        assert!(max_diff(exact.component(k).matrix(), delta.component(k).matrix()) <= 1e-10 * (1.0 + max_abs(delta.component(k).matrix())));
    }
    let err = |h: f64| {
        let fd = fd_tuple_derivative(|t| curve.value(t), 0.0, 1, h).unwrap();
        (0..s.d()).map(|k| max_diff(fd.component(k).matrix(), delta.component(k).matrix())).fold(0.0, f64::max)
    };
    let (coarse, fine) = (err(1e-2), err(5e-3));
    if coarse <= 1e-12 {
        // Affine curve (no rotation): the difference quotient is already exact.
        return;
    }
    let order = (coarse / fine).log2();
    assert!(order >= 1.9, "observed order {order} from errors {coarse:e}, {fine:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn planted_directions_are_tangent(seed in 0u64..100_000, n in 2usize..6, d in 1usize..4, collide in proptest::bool::ANY) {
        let mut r = rng(seed);
        let u = random_unitary(n, &mut r);
        let mut pts = random_points(n, d, -1.0, 1.0, &mut r);
        if collide { pts[n - 1] = pts[0].clone(); }
        let s = planted(&u, &pts);
        let delta = planted_tangent(&u, &pts, &mut r, 0.5);
        assert_witness(&s, &delta);
    }

    #[test]
    fn generic_directions_are_rejected(seed in 0u64..100_000, n in 2usize..6, d in 2usize..4) {
        let mut r = rng(seed);
        let u = random_unitary(n, &mut r);
        let s = planted(&u, &random_points(n, d, -1.0, 1.0, &mut r));
        let delta = SelfAdjointTuple::new((0..d).map(|_| random_hermitian(n, &mut r)).collect()).unwrap();
        let rep = tangency_check(&s, &delta, &Settings::default()).unwrap();
        prop_assert!(!rep.tangent);
        prop_assert!(rep.commutation_residual.max(rep.block_residual) >= 1e-4);
    }

    #[test]
    fn identity_base_accepts_iff_commuting(seed in 0u64..100_000) {
        let mut r = rng(seed);
        let s = identity_tuple(3, 2);
        let u = random_unitary(3, &mut r);
        let good = planted(&u, &random_points(3, 2, -1.0, 1.0, &mut r));
        prop_assert!(tangency_check(&s, &good, &Settings::default()).unwrap().tangent);
        let bad = SelfAdjointTuple::new(vec![random_hermitian(3, &mut r), random_hermitian(3, &mut r)]).unwrap();
        prop_assert!(!tangency_check(&s, &bad, &Settings::default()).unwrap().tangent);
    }
}

#[test]
fn diagonal_base_recovers_groups() {
    let s = planted(&CMatrix::identity(3, 3), &[vec![1.0, 2.0], vec![1.0, 2.0], vec![3.0, 0.0]]);
    let jd = joint_diagonalize(&s, &Settings::default()).unwrap();
    assert_eq!(jd.groups.len(), 2);
}
