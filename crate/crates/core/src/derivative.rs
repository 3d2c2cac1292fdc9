//! First derivative of `F` along curves in the commuting variety.
//!
//! For tangent data `(U, D, GammaTilde, Y)` the derivative is
//! `U (sum_r GammaTilde^r d_r f(D) + [Y, F(D)]) U*`, or entrywise
//! `sum_r Gamma^r_ij d_r f(x_i)` inside a group and
//! `Gamma^q_ij (f(x_i) - f(x_j)) / (x_i^q - x_j^q)` across groups.

use num_complex::Complex64;

use crate::curve::{curve_derivative, sample, Curve};
use crate::error::{Error, Result};
use crate::function::ScalarFunction;
use crate::joint_diag::joint_diagonalize;
use crate::matfun::{eval_matfun, values_on_spectrum};
use crate::tangency::{tangency_check, tangency_check_with, TangencyReport, TangentData};
use crate::types::{commutator, real_diagonal, CMatrix, CommutingTuple, HermitianMatrix, SelfAdjointTuple, Settings};

/// Tangency tolerance applied when the curve velocity comes from finite differences.
pub const FD_TANGENCY_TOL: f64 = 1e-6;

fn not_tangent(rep: &TangencyReport) -> Error {
    Error::NotTangent { commutation: rep.commutation_residual, block: rep.block_residual }
}

/// The closed-form derivative from tangent data.
pub fn derivative_formula(td: &TangentData, f: &ScalarFunction) -> Result<HermitianMatrix> {
    f.require_order(1)?;
    let vals = values_on_spectrum(f, &td.diag)?;
    let n = td.n();
    let mut inner = commutator(&td.y, &real_diagonal(&vals));
    for r in 0..td.d() {
        let grad: Vec<f64> = td.diag.eigs.iter().map(|x| f.gradient_component(r, x)).collect();
        inner += &td.gamma_tilde[r] * real_diagonal(&grad);
    }
    debug_assert_eq!(inner.nrows(), n);
    Ok(HermitianMatrix::from_matrix_unchecked(td.diag.from_eigenbasis(&inner)))
}

/// The entrywise form of the same derivative, computed independently of `Y`.
pub fn derivative_entrywise(td: &TangentData, f: &ScalarFunction) -> Result<HermitianMatrix> {
    f.require_order(1)?;
    let vals = values_on_spectrum(f, &td.diag)?;
    let n = td.n();
    let eigs = &td.diag.eigs;
    let mut inner = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            inner[(i, j)] = match td.diag.separating_coordinate(i, j) {
                None => (0..td.d()).map(|r| td.gamma[r][(i, j)] * f.gradient_component(r, &eigs[i])).sum(),
                Some(q) => td.gamma[q][(i, j)] * ((vals[i] - vals[j]) / (eigs[i][q] - eigs[j][q])),
            };
        }
    }
    Ok(HermitianMatrix::from_matrix_unchecked(td.diag.from_eigenbasis(&inner)))
}

/// `DF(S, Delta)`: derivative of `F` along any curve through `S` with velocity `Delta`.
pub fn df_map(s: &CommutingTuple, delta: &SelfAdjointTuple, f: &ScalarFunction, settings: &Settings) -> Result<HermitianMatrix> {
    let rep = tangency_check(s, delta, settings)?;
    let td = rep.data.as_ref().ok_or_else(|| not_tangent(&rep))?;
    derivative_formula(td, f)
}

/// Tangent data for a curve at `t`, with the velocity checked for tangency.
pub fn curve_tangent_data(curve: &dyn Curve, t: f64, settings: &Settings) -> Result<TangentData> {
    let s = sample(curve, t, &settings.tol)?;
    let exact = curve.exact_derivative(t, 1).is_some();
    let v = curve_derivative(curve, t, 1)?;
    let jd = joint_diagonalize(&s, settings)?;
    let mut check = *settings;
    if !exact {
        check.tol.comm = check.tol.comm.max(FD_TANGENCY_TOL);
    }
    let rep = tangency_check_with(&s, &jd, &v, &check)?;
    if !rep.tangent {
        return Err(not_tangent(&rep));
    }
    TangentData::assemble(&s, &jd, &v)
}

/// `d/dt F(S(t))` at `t`.
pub fn derivative_along_curve(f: &ScalarFunction, curve: &dyn Curve, t: f64, settings: &Settings) -> Result<HermitianMatrix> {
    let td = curve_tangent_data(curve, t, settings)?;
    derivative_formula(&td, f)
}

/// `2 d n^3 M max_{s, x in E} |d_s f(x)|` with `M` the largest entry modulus of the `Gamma^r`.
///
/// `E` is a closed box; the maximum is taken over a grid of `E` together with
/// the joint eigenvalues.
pub fn derivative_bound(td: &TangentData, f: &ScalarFunction, e: &[(f64, f64)]) -> Result<f64> {
    f.require_order(1)?;
    let d = td.d();
    if e.len() != d {
        return Err(Error::DimensionMismatch(format!("box has {} sides, tuple has {} components", e.len(), d)));
    }
    for x in &td.diag.eigs {
        if x.iter().zip(e).any(|(v, (lo, hi))| v < lo || v > hi) {
            return Err(Error::InvalidInput(format!("joint eigenvalue {x:?} lies outside the box")));
        }
    }
    let m = td.gamma.iter().map(crate::types::max_entry_norm).fold(0.0, f64::max);
    const STEPS: usize = 20;
    let mut points: Vec<Vec<f64>> = td.diag.eigs.clone();
    let total = (STEPS + 1).pow(d as u32);
    for idx in 0..total {
        let mut k = idx;
        let mut x = Vec::with_capacity(d);
        for (lo, hi) in e {
            x.push(lo + (hi - lo) * (k % (STEPS + 1)) as f64 / STEPS as f64);
            k /= STEPS + 1;
        }
        points.push(x);
    }
    f.check_spectrum(&points)?;
    let mut grad_max = 0.0f64;
    for x in &points {
        for r in 0..d {
            grad_max = grad_max.max(f.gradient_component(r, x).abs());
        }
    }
    let n = td.n() as f64;
    Ok(2.0 * d as f64 * n.powi(3) * m * grad_max)
}

/// `(F(S(t+h)) - F(S(t-h))) / 2h`.
pub fn fd_derivative_oracle(f: &ScalarFunction, curve: &dyn Curve, t: f64, h: f64, settings: &Settings) -> Result<HermitianMatrix> {
    let plus = eval_matfun(f, &sample(curve, t + h, &settings.tol)?, settings)?;
    let minus = eval_matfun(f, &sample(curve, t - h, &settings.tol)?, settings)?;
    Ok(HermitianMatrix::from_matrix_unchecked(
        (plus.matrix() - minus.matrix()) / Complex64::new(2.0 * h, 0.0),
    ))
}

/// Richardson extrapolation `(4 D(h/2) - D(h)) / 3` of the central difference.
pub fn fd_derivative_richardson(f: &ScalarFunction, curve: &dyn Curve, t: f64, h: f64, settings: &Settings) -> Result<HermitianMatrix> {
    let coarse = fd_derivative_oracle(f, curve, t, h, settings)?;
    let fine = fd_derivative_oracle(f, curve, t, h / 2.0, settings)?;
    Ok(HermitianMatrix::from_matrix_unchecked(
        (fine.matrix() * Complex64::new(4.0, 0.0) - coarse.matrix()) / Complex64::new(3.0, 0.0),
    ))
}
