//! Induced matrix functions `F(S) = U diag(f(x_i)) U*` and two oracles.

use num_complex::Complex64;

use crate::contour::{resolvent, ContourSpec};
use crate::eigen::hermitian_eigen;
use crate::error::{Error, Result};
use crate::function::{Polynomial, ScalarFunction};
use crate::joint_diag::{joint_diagonalize, JointDiagonalization};
use crate::types::{real_diagonal, CMatrix, CommutingTuple, HermitianMatrix, SelfAdjointTuple, Settings};

fn check_arity(f: &ScalarFunction, d: usize) -> Result<()> {
    if f.arity() != d {
        return Err(Error::DimensionMismatch(format!("function has {} variables, tuple has {} components", f.arity(), d)));
    }
    Ok(())
}

/// `f(x_i)` for every joint eigenvalue, after the domain check.
pub fn values_on_spectrum(f: &ScalarFunction, jd: &JointDiagonalization) -> Result<Vec<f64>> {
    check_arity(f, jd.d())?;
    f.check_spectrum(&jd.eigs)?;
    Ok(jd.eigs.iter().map(|x| f.eval(x)).collect())
}

/// `F(S)` from an existing joint diagonalization.
pub fn eval_with_diag(f: &ScalarFunction, jd: &JointDiagonalization) -> Result<HermitianMatrix> {
    let vals = values_on_spectrum(f, jd)?;
    Ok(HermitianMatrix::from_matrix_unchecked(jd.from_eigenbasis(&real_diagonal(&vals))))
}

pub fn eval_matfun(f: &ScalarFunction, s: &CommutingTuple, settings: &Settings) -> Result<HermitianMatrix> {
    check_arity(f, s.d())?;
    let jd = joint_diagonalize(s, settings)?;
    eval_with_diag(f, &jd)
}

/// `sum_alpha c_alpha (S^1)^alpha_1 ... (S^d)^alpha_d` by repeated multiplication.
pub fn eval_poly_direct(p: &Polynomial, s: &SelfAdjointTuple) -> Result<HermitianMatrix> {
    if p.arity != s.d() {
        return Err(Error::DimensionMismatch(format!("polynomial has {} variables, tuple has {} components", p.arity, s.d())));
    }
    let n = s.n();
    let deg = p.degree() as usize;
    let powers: Vec<Vec<CMatrix>> = s
        .components()
        .iter()
        .map(|c| {
            let mut pw = vec![CMatrix::identity(n, n)];
            for k in 1..=deg {
                let next = &pw[k - 1] * c.matrix();
                pw.push(next);
            }
            pw
        })
        .collect();
    let mut acc = CMatrix::zeros(n, n);
    for (e, c) in &p.terms {
        let mut term = CMatrix::identity(n, n);
        for (r, &k) in e.iter().enumerate() {
            if k > 0 {
                term *= &powers[r][k as usize];
            }
        }
        acc += term * Complex64::new(*c, 0.0);
    }
    Ok(HermitianMatrix::from_matrix_unchecked(acc))
}

/// Eigenvalues of each component separately, for contour placement.
pub fn component_spectra(s: &SelfAdjointTuple) -> Vec<Vec<f64>> {
    s.components().iter().map(|c| hermitian_eigen(c.matrix()).values).collect()
}

/// Default contour for `f` around the spectra of `s`.
pub fn default_contour(f: &ScalarFunction, s: &SelfAdjointTuple, nodes: usize) -> Result<ContourSpec> {
    ContourSpec::enclosing(&component_spectra(s), Some(f.domain()), nodes)
}

/// `(2 pi i)^-d \oint ... \oint f(zeta) prod_r (zeta^r I - S^r)^-1 d zeta` by trapezoid quadrature.
pub fn eval_contour(f: &ScalarFunction, s: &SelfAdjointTuple, spec: &ContourSpec) -> Result<HermitianMatrix> {
    check_arity(f, s.d())?;
    if !f.has_complex_extension() {
        return Err(Error::NotAnalytic);
    }
    spec.check(&component_spectra(s), Some(f.domain()))?;
    let d = s.d();
    let nodes: Vec<Vec<(Complex64, Complex64)>> = spec.circles.iter().map(|c| c.nodes(spec.nodes)).collect();
    let resolvents: Vec<Vec<CMatrix>> = s
        .components()
        .iter()
        .zip(&nodes)
        .map(|(c, ns)| ns.iter().map(|(z, w)| resolvent(c.matrix(), *z).map(|r| r * *w)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let mut zeta = vec![Complex64::new(0.0, 0.0); d];
    let total = nested_sum(f, &nodes, &resolvents, 0, &mut zeta)?;
    Ok(HermitianMatrix::from_matrix_unchecked(total))
}

/// Sum over the nodes of variable `r` and deeper, with earlier variables fixed in `zeta`.
fn nested_sum(
    f: &ScalarFunction,
    nodes: &[Vec<(Complex64, Complex64)>],
    resolvents: &[Vec<CMatrix>],
    r: usize,
    zeta: &mut Vec<Complex64>,
) -> Result<CMatrix> {
    let n = resolvents[r][0].nrows();
    let mut acc = CMatrix::zeros(n, n);
    let last = r + 1 == nodes.len();
    for (k, (z, _)) in nodes[r].iter().enumerate() {
        zeta[r] = *z;
        if last {
            acc += &resolvents[r][k] * f.complex_eval(zeta)?;
        } else {
            let inner = nested_sum(f, nodes, resolvents, r + 1, zeta)?;
            acc += &resolvents[r][k] * inner;
        }
    }
    Ok(acc)
}
