//! Higher derivatives of `F(S, T)` along curves of commuting pairs.
//!
//! The `l`-th derivative is a sum over pairs of index tuples
//! `(i_1..i_k) | (i_{k+1}..i_j)` with `i_1 + ... + i_j = l` of
//! `l!/(i_1!...i_j!) f^{[k, j-k]}(x_{s_1}..x_{s_{k+1}}; y_{s_{k+1}}..y_{s_{j+1}})
//!  Gamma^{i_1}_{s_1 s_2} ... Delta^{i_j}_{s_j s_{j+1}}`, summed over the inner
//! indices and conjugated back by `U`. Two oracles are provided: a Cauchy
//! integral over the derivative of the resolvent product, and finite
//! differences of `F` along the curve.

use num_complex::Complex64;

use crate::contour::{resolvent, ContourSpec, DEFAULT_NODES};
use crate::curve::{curve_derivative, sample, Curve};
use crate::divdiff::dd_unchecked;
use crate::error::{Error, Result};
use crate::function::ScalarFunction;
use crate::joint_diag::{joint_diagonalize, JointDiagonalization};
use crate::matfun::component_spectra;
use crate::types::{hermitian_defect, CMatrix, CommutingTuple, HermitianMatrix, SelfAdjointTuple, Settings};

pub const MAX_ORDER: u32 = 4;

/// One element `(i_1..i_k) | (i_{k+1}..i_j)` of the index set, with its multinomial weight.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexTuple {
    /// Orders of the `S` derivatives, `i_1..i_k`.
    pub left: Vec<u32>,
    /// Orders of the `T` derivatives, `i_{k+1}..i_j`.
    pub right: Vec<u32>,
    /// `l! / (i_1! ... i_j!)`.
    pub weight: f64,
}

impl IndexTuple {
    pub fn k(&self) -> usize {
        self.left.len()
    }

    pub fn j(&self) -> usize {
        self.left.len() + self.right.len()
    }
}

fn factorial(p: u32) -> f64 {
    (1..=p).map(|k| k as f64).product()
}

fn compositions(l: u32) -> Vec<Vec<u32>> {
    if l == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in (1..=l).rev() {
        for mut rest in compositions(l - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn check_order(l: u32) -> Result<()> {
    if l == 0 || l > MAX_ORDER {
        return Err(Error::OrderTooHigh { order: l as usize, max: MAX_ORDER as usize });
    }
    Ok(())
}

/// All index-tuple pairs for order `l`.
pub fn enumerate_index_tuples(l: u32) -> Result<Vec<IndexTuple>> {
    check_order(l)?;
    let lf = factorial(l);
    let mut out = Vec::new();
    for comp in compositions(l) {
        let weight = lf / comp.iter().map(|&i| factorial(i)).product::<f64>();
        for k in (0..=comp.len()).rev() {
            out.push(IndexTuple { left: comp[..k].to_vec(), right: comp[k..].to_vec(), weight });
        }
    }
    let left_sum = |t: &IndexTuple| t.left.iter().sum::<u32>();
    out.sort_by(|a, b| {
        left_sum(b)
            .cmp(&left_sum(a))
            .then_with(|| a.left.len().cmp(&b.left.len()))
            .then_with(|| b.right.len().cmp(&a.right.len()))
            .then_with(|| b.left.cmp(&a.left))
            .then_with(|| b.right.cmp(&a.right))
    });
    Ok(out)
}

/// Value and first `m` derivatives of a pair curve at a point.
#[derive(Debug, Clone)]
pub struct CurveJet {
    pub t: f64,
    pub value: CommutingTuple,
    /// `derivs[l - 1]` is the `l`-th derivative.
    pub derivs: Vec<SelfAdjointTuple>,
}

impl CurveJet {
    pub fn from_curve(curve: &dyn Curve, t: f64, m: u32, settings: &Settings) -> Result<Self> {
        check_order(m)?;
        if curve.d() != 2 {
            return Err(Error::DimensionMismatch(format!("higher derivatives need pairs, curve has d = {}", curve.d())));
        }
        let value = sample(curve, t, &settings.tol)?;
        let derivs = (1..=m).map(|l| curve_derivative(curve, t, l)).collect::<Result<Vec<_>>>()?;
        Ok(CurveJet { t, value, derivs })
    }

    pub fn order(&self) -> u32 {
        self.derivs.len() as u32
    }

    fn deriv(&self, l: u32, r: usize) -> &CMatrix {
        self.derivs[l as usize - 1].component(r).matrix()
    }
}

/// The derivative together with the Hermitian defect of the unsymmetrized sum.
#[derive(Debug, Clone)]
pub struct HigherDerivative {
    pub matrix: HermitianMatrix,
    pub raw_asymmetry: f64,
}

fn check_jet(f: &ScalarFunction, jet: &CurveJet, l: u32) -> Result<()> {
    check_order(l)?;
    if l > jet.order() {
        return Err(Error::InsufficientSmoothness { required: l as usize, available: jet.order() as usize });
    }
    if f.arity() != 2 {
        return Err(Error::DimensionMismatch(format!("higher derivatives need f of 2 variables, got {}", f.arity())));
    }
    f.require_order(l)
}

/// The divided-difference formula, from an existing joint diagonalization of `jet.value`.
pub fn higher_derivative_with(f: &ScalarFunction, jet: &CurveJet, jd: &JointDiagonalization, l: u32) -> Result<HigherDerivative> {
    check_jet(f, jet, l)?;
    let n = jet.value.n();
    let xs = jd.coordinate(0);
    let ys = jd.coordinate(1);
    let pairs: Vec<Vec<f64>> = xs.iter().flat_map(|&x| ys.iter().map(move |&y| vec![x, y])).collect();
    f.check_spectrum(&pairs)?;

    let gamma: Vec<CMatrix> = (1..=l).map(|i| jd.to_eigenbasis(jet.deriv(i, 0))).collect();
    let delta: Vec<CMatrix> = (1..=l).map(|i| jd.to_eigenbasis(jet.deriv(i, 1))).collect();

    let mut inner = CMatrix::zeros(n, n);
    let mut idx = Vec::new();
    for it in enumerate_index_tuples(l)? {
        let j = it.j();
        let k = it.k();
        let factors: Vec<&CMatrix> = it
            .left
            .iter()
            .map(|&i| &gamma[i as usize - 1])
            .chain(it.right.iter().map(|&i| &delta[i as usize - 1]))
            .collect();
        // Walk every index path s_1..s_{j+1}.
        idx.clear();
        idx.resize(j + 1, 0usize);
        loop {
            let mut prod = Complex64::new(it.weight, 0.0);
            for (q, m) in factors.iter().enumerate() {
                prod *= m[(idx[q], idx[q + 1])];
                if prod == Complex64::new(0.0, 0.0) {
                    break;
                }
            }
            if prod != Complex64::new(0.0, 0.0) {
                let xn: Vec<f64> = idx[..=k].iter().map(|&s| xs[s]).collect();
                let yn: Vec<f64> = idx[k..].iter().map(|&s| ys[s]).collect();
                inner[(idx[0], idx[j])] += prod * dd_unchecked(f, &xn, &yn);
            }
            let mut p = j;
            loop {
                idx[p] += 1;
                if idx[p] < n {
                    break;
                }
                idx[p] = 0;
                if p == 0 {
                    break;
                }
                p -= 1;
            }
            if idx.iter().all(|&s| s == 0) {
                break;
            }
        }
    }
    let raw = jd.from_eigenbasis(&inner);
    let raw_asymmetry = hermitian_defect(&raw);
    Ok(HigherDerivative { matrix: HermitianMatrix::from_matrix_unchecked(raw), raw_asymmetry })
}

/// `d^l/dt^l F(S(t), T(t))` at `jet.t` by the divided-difference formula.
pub fn higher_derivative_from_jet(f: &ScalarFunction, jet: &CurveJet, l: u32, settings: &Settings) -> Result<HigherDerivative> {
    let jd = joint_diagonalize(&jet.value, settings)?;
    higher_derivative_with(f, jet, &jd, l)
}

pub fn higher_derivative(f: &ScalarFunction, curve: &dyn Curve, t: f64, l: u32, settings: &Settings) -> Result<HermitianMatrix> {
    check_order(l)?;
    let jet = CurveJet::from_curve(curve, t, l, settings)?;
    Ok(higher_derivative_from_jet(f, &jet, l, settings)?.matrix)
}

/// `R_1 S^{i_1} R_1 ... S^{i_k} R_1` (or `R_2 T^.. R_2 ...` for `r = 1`).
fn resolvent_chain(r1: &CMatrix, jet: &CurveJet, orders: &[u32], r: usize) -> CMatrix {
    let mut acc = r1.clone();
    for &i in orders {
        acc = acc * jet.deriv(i, r) * r1;
    }
    acc
}

/// `d^l/dt^l (R_1 R_2)` with `R_1 = (zeta_1 - S)^-1`, `R_2 = (zeta_2 - T)^-1`.
pub fn resolvent_product_derivative(jet: &CurveJet, l: u32, z1: Complex64, z2: Complex64) -> Result<CMatrix> {
    check_order(l)?;
    if l > jet.order() {
        return Err(Error::InsufficientSmoothness { required: l as usize, available: jet.order() as usize });
    }
    let r1 = resolvent(jet.value.component(0).matrix(), z1)?;
    let r2 = resolvent(jet.value.component(1).matrix(), z2)?;
    let n = r1.nrows();
    let mut acc = CMatrix::zeros(n, n);
    for it in enumerate_index_tuples(l)? {
        let left = resolvent_chain(&r1, jet, &it.left, 0);
        let right = resolvent_chain(&r2, jet, &it.right, 1);
        acc += left * right * Complex64::new(it.weight, 0.0);
    }
    Ok(acc)
}

/// Default circles around the spectra of `S(t)` and `T(t)`.
pub fn default_contour(f: &ScalarFunction, jet: &CurveJet) -> Result<ContourSpec> {
    ContourSpec::enclosing(&component_spectra(&jet.value), Some(f.domain()), DEFAULT_NODES)
}

/// `(2 pi i)^-2 \oint \oint f(z1, z2) d^l(R_1 R_2) dz1 dz2`, factorized per index tuple.
pub fn contour_higher_derivative(f: &ScalarFunction, jet: &CurveJet, l: u32, spec: &ContourSpec) -> Result<HermitianMatrix> {
    check_jet(f, jet, l)?;
    if !f.has_complex_extension() {
        return Err(Error::NotAnalytic);
    }
    spec.check(&component_spectra(&jet.value), Some(f.domain()))?;
    let n1 = spec.circles[0].nodes(spec.nodes);
    let n2 = spec.circles[1].nodes(spec.nodes);
    let r1s = n1.iter().map(|(z, _)| resolvent(jet.value.component(0).matrix(), *z)).collect::<Result<Vec<_>>>()?;
    let r2s = n2.iter().map(|(z, _)| resolvent(jet.value.component(1).matrix(), *z)).collect::<Result<Vec<_>>>()?;
    let mut fv = vec![Complex64::new(0.0, 0.0); n1.len() * n2.len()];
    for (a, (z1, _)) in n1.iter().enumerate() {
        for (b, (z2, _)) in n2.iter().enumerate() {
            fv[a * n2.len() + b] = f.complex_eval(&[*z1, *z2])?;
        }
    }
    let n = jet.value.n();
    let mut total = CMatrix::zeros(n, n);
    for it in enumerate_index_tuples(l)? {
        let lefts: Vec<CMatrix> = r1s.iter().zip(&n1).map(|(r, (_, w))| resolvent_chain(r, jet, &it.left, 0) * *w).collect();
        let rights: Vec<CMatrix> = r2s.iter().zip(&n2).map(|(r, (_, w))| resolvent_chain(r, jet, &it.right, 1) * *w).collect();
        for (a, la) in lefts.iter().enumerate() {
            let mut inner = CMatrix::zeros(n, n);
            for (b, rb) in rights.iter().enumerate() {
                inner += rb * fv[a * n2.len() + b];
            }
            total += la * inner * Complex64::new(it.weight, 0.0);
        }
    }
    Ok(HermitianMatrix::from_matrix_unchecked(total))
}

/// Central finite difference of order `l` of `t -> F(S(t), T(t))`.
pub fn fd_higher_derivative(f: &ScalarFunction, curve: &dyn Curve, t: f64, l: u32, h: f64, settings: &Settings) -> Result<HermitianMatrix> {
    let g = |s: f64| -> Result<HermitianMatrix> {
        let st = sample(curve, s, &settings.tol)?;
        crate::matfun::eval_matfun(f, &st, settings)
    };
    let (offs, ws) = crate::curve::central_stencil(l)?;
    let n = curve.n();
    let mut acc = CMatrix::zeros(n, n);
    for (o, w) in offs.iter().zip(&ws) {
        acc += g(t + *o as f64 * h)?.matrix() * Complex64::new(*w, 0.0);
    }
    Ok(HermitianMatrix::from_matrix_unchecked(acc / Complex64::new(h.powi(l as i32), 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_set_of_order_two() {
        let set = enumerate_index_tuples(2).unwrap();
        let shapes: Vec<(Vec<u32>, Vec<u32>, f64)> = set.iter().map(|t| (t.left.clone(), t.right.clone(), t.weight)).collect();
        assert_eq!(
            shapes,
            vec![
                (vec![2], vec![], 1.0),
                (vec![1, 1], vec![], 2.0),
                (vec![1], vec![1], 2.0),
                (vec![], vec![1, 1], 2.0),
                (vec![], vec![2], 1.0),
            ]
        );
    }

    #[test]
    fn order_one_and_limits() {
        assert_eq!(enumerate_index_tuples(1).unwrap().len(), 2);
        assert!(matches!(enumerate_index_tuples(5), Err(Error::OrderTooHigh { .. })));
        assert!(matches!(enumerate_index_tuples(0), Err(Error::OrderTooHigh { .. })));
    }
}
