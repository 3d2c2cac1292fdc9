//! Curves of Hermitian tuples and their derivatives.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tangency::SkewExp;
use crate::types::{commutator, validate_commuting, CMatrix, CommutingTuple, HermitianMatrix, SelfAdjointTuple, TolerancePolicy};

/// A curve `t -> S(t)` of `d`-tuples on a closed interval.
pub trait Curve: Send + Sync {
    fn n(&self) -> usize;
    fn d(&self) -> usize;
    fn domain(&self) -> (f64, f64);
    /// Number of continuous derivatives; `u32::MAX` for analytic curves.
    fn smoothness(&self) -> u32;
    fn value(&self, t: f64) -> SelfAdjointTuple;
    /// Exact `l`-th derivative, if the curve knows it.
    fn exact_derivative(&self, _t: f64, _l: u32) -> Option<SelfAdjointTuple> {
        None
    }
}

fn check_domain(curve: &dyn Curve, t: f64) -> Result<()> {
    let (lo, hi) = curve.domain();
    if !(t >= lo && t <= hi) {
        return Err(Error::OutsideCurveDomain { t, lo, hi });
    }
    Ok(())
}

/// `S(t)`, validated as a commuting tuple.
pub fn sample(curve: &dyn Curve, t: f64, tol: &TolerancePolicy) -> Result<CommutingTuple> {
    check_domain(curve, t)?;
    validate_commuting(&curve.value(t), tol)
}

/// Central difference weights `(offsets, weights)` for the `l`-th derivative, unit step.
pub fn central_stencil(l: u32) -> Result<(Vec<i32>, Vec<f64>)> {
    Ok(match l {
        1 => (vec![-1, 1], vec![-0.5, 0.5]),
        2 => (vec![-1, 0, 1], vec![1.0, -2.0, 1.0]),
        3 => (vec![-2, -1, 1, 2], vec![-0.5, 1.0, -1.0, 0.5]),
        4 => (vec![-2, -1, 0, 1, 2], vec![1.0, -4.0, 6.0, -4.0, 1.0]),
        _ => return Err(Error::OrderTooHigh { order: l as usize, max: 4 }),
    })
}

/// Step used when a curve derivative has to be estimated: `eps^{1/(l+2)} (1 + |t|)`.
pub fn default_step(l: u32, t: f64) -> f64 {
    f64::EPSILON.powf(1.0 / (l as f64 + 2.0)) * (1.0 + t.abs())
}

/// `l`-th derivative of an arbitrary tuple-valued map by a central difference.
pub fn fd_tuple_derivative(g: impl Fn(f64) -> SelfAdjointTuple, t: f64, l: u32, h: f64) -> Result<SelfAdjointTuple> {
    let (offs, ws) = central_stencil(l)?;
    let mut acc: Option<Vec<CMatrix>> = None;
    for (o, w) in offs.iter().zip(&ws) {
        let v = g(t + *o as f64 * h);
        let scaled: Vec<CMatrix> = v.components().iter().map(|c| c.matrix() * Complex64::new(*w, 0.0)).collect();
        acc = Some(match acc {
            None => scaled,
            Some(a) => a.into_iter().zip(scaled).map(|(x, y)| x + y).collect(),
        });
    }
    let denom = h.powi(l as i32);
    SelfAdjointTuple::from_matrices(acc.unwrap().into_iter().map(|m| m / Complex64::new(denom, 0.0)).collect())
}

/// `S^{(l)}(t)`: exact when available, else a central difference with [`default_step`].
pub fn curve_derivative(curve: &dyn Curve, t: f64, l: u32) -> Result<SelfAdjointTuple> {
    check_domain(curve, t)?;
    if l > curve.smoothness() {
        return Err(Error::InsufficientSmoothness { required: l as usize, available: curve.smoothness() as usize });
    }
    if let Some(v) = curve.exact_derivative(t, l) {
        return Ok(v);
    }
    let h = default_step(l, t);
    let (offs, _) = central_stencil(l)?;
    let reach = *offs.iter().max().unwrap() as f64 * h;
    let (lo, hi) = curve.domain();
    if t - reach < lo || t + reach > hi {
        return Err(Error::OutsideCurveDomain { t: if t - reach < lo { t - reach } else { t + reach }, lo, hi });
    }
    fd_tuple_derivative(|s| curve.value(s), t, l, h)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `S^r(t) = U e^{Yt} P_r(t) e^{-Yt} U*` with `P_r(t) = sum_k t^k C_{r,k}`.
///
/// Commutation holds for all `t` when the `P_r(t)` commute, which callers arrange
/// (diagonal coefficients, or scalar-plus-commuting-block coefficients).
#[derive(Debug, Clone)]
pub struct RotatingCurve {
    u: CMatrix,
    y: CMatrix,
    exp: SkewExp,
    coeffs: Vec<Vec<CMatrix>>,
    domain: (f64, f64),
}

impl RotatingCurve {
    pub fn new(u: CMatrix, y: CMatrix, coeffs: Vec<Vec<CMatrix>>, domain: (f64, f64)) -> Result<Self> {
        let n = u.nrows();
        if coeffs.is_empty() || coeffs.iter().flatten().any(|c| c.nrows() != n || c.ncols() != n) || y.nrows() != n {
            return Err(Error::DimensionMismatch("curve coefficients must all be n x n".into()));
        }
        let exp = SkewExp::new(&y)?;
        Ok(RotatingCurve { u, y, exp, coeffs, domain })
    }

    /// `V diag(p_{r,i}(t)) V*`, where `polys[r][i]` lists polynomial coefficients in `t`.
    pub fn diagonal_polynomial(v: CMatrix, polys: &[Vec<Vec<f64>>], domain: (f64, f64)) -> Result<Self> {
        let n = v.nrows();
        let coeffs = polys
            .iter()
            .map(|per_entry| {
                if per_entry.len() != n {
                    return Err(Error::DimensionMismatch(format!("{} polynomials for n = {}", per_entry.len(), n)));
                }
                let deg = per_entry.iter().map(|p| p.len()).max().unwrap_or(1).max(1);
                Ok((0..deg)
                    .map(|k| {
                        let diag: Vec<f64> = per_entry.iter().map(|p| p.get(k).copied().unwrap_or(0.0)).collect();
                        crate::types::real_diagonal(&diag)
                    })
                    .collect())
            })
            .collect::<Result<Vec<_>>>()?;
        RotatingCurve::new(v, CMatrix::zeros(n, n), coeffs, domain)
    }

    /// `P_r^{(j)}(t)`.
    fn inner_derivative(&self, r: usize, t: f64, j: u32) -> CMatrix {
        let n = self.u.nrows();
        let mut acc = CMatrix::zeros(n, n);
        for (k, c) in self.coeffs[r].iter().enumerate() {
            let k = k as u32;
            if k < j {
                continue;
            }
            let w: f64 = (0..j).map(|i| (k - i) as f64).product::<f64>() * t.powi((k - j) as i32);
            acc += c * Complex64::new(w, 0.0);
        }
        acc
    }

    fn wrap(&self, t: f64, inner: &CMatrix) -> CMatrix {
        let e = &self.u * self.exp.at(t);
        &e * inner * e.adjoint()
    }
}

impl Curve for RotatingCurve {
    fn n(&self) -> usize {
        self.u.nrows()
    }

    fn d(&self) -> usize {
        self.coeffs.len()
    }

    fn domain(&self) -> (f64, f64) {
        self.domain
    }

    fn smoothness(&self) -> u32 {
        u32::MAX
    }

    fn value(&self, t: f64) -> SelfAdjointTuple {
        let comps = (0..self.d())
            .map(|r| HermitianMatrix::from_matrix_unchecked(self.wrap(t, &self.inner_derivative(r, t, 0))))
            .collect();
        SelfAdjointTuple::new(comps).expect("shapes checked at construction")
    }

    /// `e^{Yt} (sum_a C(l,a) ad_Y^a P^{(l-a)}(t)) e^{-Yt}`, conjugated by `U`.
    fn exact_derivative(&self, t: f64, l: u32) -> Option<SelfAdjointTuple> {
        let comps = (0..self.d())
            .map(|r| {
                let n = self.u.nrows();
                let mut inner = CMatrix::zeros(n, n);
                for a in 0..=l {
                    let mut term = self.inner_derivative(r, t, l - a);
                    for _ in 0..a {
                        term = commutator(&self.y, &term);
                    }
                    inner += term * Complex64::new(binomial(l, a), 0.0);
                }
                HermitianMatrix::from_matrix_unchecked(self.wrap(t, &inner))
            })
            .collect();
        Some(SelfAdjointTuple::new(comps).expect("shapes checked at construction"))
    }
}

/// `S(t) = S_0 + t V`, commuting only when the caller's data makes it so.
#[derive(Debug, Clone)]
pub struct LinearCurve {
    pub start: SelfAdjointTuple,
    pub velocity: SelfAdjointTuple,
    pub domain: (f64, f64),
}

impl LinearCurve {
    pub fn new(start: SelfAdjointTuple, velocity: SelfAdjointTuple, domain: (f64, f64)) -> Result<Self> {
        start.check_shape(&velocity)?;
        Ok(LinearCurve { start, velocity, domain })
    }

    /// `A + t (B - A)` on `[0, 1]`.
    pub fn segment(a: &SelfAdjointTuple, b: &SelfAdjointTuple) -> Result<Self> {
        LinearCurve::new(a.clone(), b.sub(a)?, (0.0, 1.0))
    }
}

impl Curve for LinearCurve {
    fn n(&self) -> usize {
        self.start.n()
    }

    fn d(&self) -> usize {
        self.start.d()
    }

    fn domain(&self) -> (f64, f64) {
        self.domain
    }

    fn smoothness(&self) -> u32 {
        u32::MAX
    }

    fn value(&self, t: f64) -> SelfAdjointTuple {
        self.start.add(&self.velocity.scale(t)).expect("shapes checked at construction")
    }

    fn exact_derivative(&self, _t: f64, l: u32) -> Option<SelfAdjointTuple> {
        Some(match l {
            0 => self.start.clone(),
            1 => self.velocity.clone(),
            _ => SelfAdjointTuple::zeros(self.n(), self.d()),
        })
    }
}

/// The 2x2 matrix `e^{-1/t^2} [[cos(2/t), sin(2/t)], [sin(2/t), -cos(2/t)]]`, zero at `t = 0`.
pub fn rellich_matrix(t: f64) -> HermitianMatrix {
    if t == 0.0 {
        return HermitianMatrix::zeros(2);
    }
    let a = (-1.0 / (t * t)).exp();
    let (s, c) = (2.0 / t).sin_cos();
    HermitianMatrix::from_real_rows(&[vec![a * c, a * s], vec![a * s, -a * c]]).expect("2x2")
}

fn rellich_derivative(t: f64) -> HermitianMatrix {
    if t == 0.0 {
        return HermitianMatrix::zeros(2);
    }
    let a = (-1.0 / (t * t)).exp();
    let (s, c) = (2.0 / t).sin_cos();
    let t2 = t * t;
    let t3 = t2 * t;
    // d/dt e^{-1/t^2} = (2/t^3) e^{-1/t^2}; d/dt cos(2/t) = (2/t^2) sin(2/t).
    let dc = a * (2.0 / t3 * c + 2.0 / t2 * s);
    let ds = a * (2.0 / t3 * s - 2.0 / t2 * c);
    HermitianMatrix::from_real_rows(&[vec![dc, ds], vec![ds, -dc]]).expect("2x2")
}

/// `(R(t), c I)` with `R` the smooth curve whose eigenvectors have no limit at 0.
#[derive(Debug, Clone, Copy)]
pub struct RellichPair {
    pub c: f64,
    pub domain: (f64, f64),
}

impl Default for RellichPair {
    fn default() -> Self {
        RellichPair { c: 0.0, domain: (-1.0, 1.0) }
    }
}

impl Curve for RellichPair {
    fn n(&self) -> usize {
        2
    }

    fn d(&self) -> usize {
        2
    }

    fn domain(&self) -> (f64, f64) {
        self.domain
    }

    fn smoothness(&self) -> u32 {
        u32::MAX
    }

    fn value(&self, t: f64) -> SelfAdjointTuple {
        SelfAdjointTuple::new(vec![rellich_matrix(t), HermitianMatrix::identity(2).scale(self.c)]).expect("2x2 pair")
    }

    fn exact_derivative(&self, t: f64, l: u32) -> Option<SelfAdjointTuple> {
        match l {
            0 => Some(self.value(t)),
            1 => Some(SelfAdjointTuple::new(vec![rellich_derivative(t), HermitianMatrix::zeros(2)]).expect("2x2 pair")),
            _ => None,
        }
    }
}

/// A curve given by a closure; derivatives by finite differences.
#[derive(Clone)]
pub struct ClosureCurve {
    f: Arc<dyn Fn(f64) -> SelfAdjointTuple + Send + Sync>,
    n: usize,
    d: usize,
    domain: (f64, f64),
    smoothness: u32,
}

impl ClosureCurve {
    pub fn new(f: impl Fn(f64) -> SelfAdjointTuple + Send + Sync + 'static, domain: (f64, f64), smoothness: u32) -> Self {
        let probe = f(domain.0);
        ClosureCurve { n: probe.n(), d: probe.d(), f: Arc::new(f), domain, smoothness }
    }
}

impl Curve for ClosureCurve {
    fn n(&self) -> usize {
        self.n
    }

    fn d(&self) -> usize {
        self.d
    }

    fn domain(&self) -> (f64, f64) {
        self.domain
    }

    fn smoothness(&self) -> u32 {
        self.smoothness
    }

    fn value(&self, t: f64) -> SelfAdjointTuple {
        (self.f)(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::max_entry_norm;

    #[test]
    fn rellich_at_two_over_pi() {
        let r = rellich_matrix(2.0 / std::f64::consts::PI);
        let a = (-std::f64::consts::PI.powi(2) / 4.0).exp();
        let expect = crate::types::real_diagonal(&[-a, a]);
        assert!(max_entry_norm(&(r.matrix() - expect)) < 1e-16);
        assert_eq!(rellich_matrix(0.0), HermitianMatrix::zeros(2));
    }

    #[test]
    fn rellich_derivative_matches_difference() {
        let t = 0.37;
        let h = 1e-6;
        let fd = (rellich_matrix(t + h).matrix() - rellich_matrix(t - h).matrix()) / Complex64::new(2.0 * h, 0.0);
        assert!(max_entry_norm(&(fd - rellich_derivative(t).matrix())) < 1e-8);
    }

    #[test]
    fn stencils_are_exact_on_polynomials() {
        for l in 1..=4u32 {
            let (offs, ws) = central_stencil(l).unwrap();
            // p(t) = t^l / l! has l-th derivative 1.
            let fact: f64 = (1..=l).map(|k| k as f64).product();
            let v: f64 = offs.iter().zip(&ws).map(|(o, w)| w * (*o as f64).powi(l as i32) / fact).sum();
            assert!((v - 1.0).abs() < 1e-12, "l={l}: {v}");
        }
    }

    #[test]
    fn linear_curve_derivatives() {
        let a = SelfAdjointTuple::new(vec![HermitianMatrix::diagonal(&[1.0, 2.0]).unwrap()]).unwrap();
        let b = SelfAdjointTuple::new(vec![HermitianMatrix::diagonal(&[3.0, -2.0]).unwrap()]).unwrap();
        let c = LinearCurve::segment(&a, &b).unwrap();
        assert_eq!(c.value(1.0), b);
        let v = curve_derivative(&c, 0.5, 1).unwrap();
        assert_eq!(v.component(0), &HermitianMatrix::diagonal(&[2.0, -4.0]).unwrap());
    }
}
