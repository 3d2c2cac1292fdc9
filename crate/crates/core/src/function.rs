//! Scalar functions on open rectangles, with partial derivatives.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidInput(format!("empty interval ({lo}, {hi})")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn real_line() -> Self {
        Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    pub fn positive() -> Self {
        Interval { lo: 0.0, hi: f64::INFINITY }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    /// Distance from `x` to the complement of the interval.
    pub fn margin(&self, x: f64) -> f64 {
        (x - self.lo).min(self.hi - x)
    }

    /// A bounded subinterval used for sampling test points.
    pub fn sample_box(&self) -> (f64, f64) {
        let a = if self.lo.is_finite() { self.lo } else { (-1.5f64).min(self.hi - 3.0) };
        let b = if self.hi.is_finite() { self.hi } else { 1.5f64.max(self.lo + 3.0) };
        let w = b - a;
        (a + 0.1 * w, b - 0.1 * w)
    }
}

/// Product of open intervals.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Rectangle(pub Vec<Interval>);

impl Rectangle {
    pub fn whole(d: usize) -> Self {
        Rectangle(vec![Interval::real_line(); d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.0.len() && self.0.iter().zip(x).all(|(i, v)| i.contains(*v))
    }
}

/// Evaluator behind a [`ScalarFunction`].
pub trait FunctionBody: Send + Sync + fmt::Debug {
    /// `d^alpha f(x)`; `alpha` has one entry per variable.
    fn partial(&self, alpha: &[u32], x: &[f64]) -> f64;

    /// Value of the analytic extension at a complex point, if one is known.
    fn complex_value(&self, _z: &[Complex64]) -> Option<Complex64> {
        None
    }

    /// Whether [`Self::complex_value`] is implemented.
    fn is_analytic(&self) -> bool {
        false
    }
}

/// A real function of `arity` variables with partials up to `order`.
#[derive(Clone)]
pub struct ScalarFunction {
    arity: usize,
    domain: Rectangle,
    order: u32,
    body: Arc<dyn FunctionBody>,
    label: String,
}

impl fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFunction")
            .field("label", &self.label)
            .field("arity", &self.arity)
            .field("order", &self.order)
            .field("domain", &self.domain)
            .finish()
    }
}

impl ScalarFunction {
    pub fn new(domain: Rectangle, order: u32, body: Arc<dyn FunctionBody>, label: impl Into<String>) -> Self {
        ScalarFunction { arity: domain.dim(), domain, order, body, label: label.into() }
    }

    pub fn from_polynomial(p: Polynomial) -> Self {
        let label = p.to_string();
        ScalarFunction::new(Rectangle::whole(p.arity), u32::MAX, Arc::new(p), label)
    }

    /// A function given by a closure for its partials; no complex extension.
    pub fn from_closure<P>(domain: Rectangle, order: u32, partial: P, label: &str) -> Self
    where
        P: Fn(&[u32], &[f64]) -> f64 + Send + Sync + 'static,
    {
        let complex: Option<fn(&[Complex64]) -> Complex64> = None;
        ScalarFunction::new(domain, order, Arc::new(ClosureBody { partial, complex }), label)
    }

    /// A function given by closures for its partials and its analytic extension.
    pub fn from_analytic_closures<P, C>(domain: Rectangle, order: u32, partial: P, complex: C, label: &str) -> Self
    where
        P: Fn(&[u32], &[f64]) -> f64 + Send + Sync + 'static,
        C: Fn(&[Complex64]) -> Complex64 + Send + Sync + 'static,
    {
        ScalarFunction::new(domain, order, Arc::new(ClosureBody { partial, complex: Some(complex) }), label)
    }

    /// `f(x) = x^r`.
    pub fn coordinate(arity: usize, r: usize) -> Self {
        let mut e = vec![0; arity];
        e[r] = 1;
        Self::from_polynomial(Polynomial::from_terms(arity, [(e, 1.0)]))
    }

    pub fn constant(arity: usize, c: f64) -> Self {
        Self::from_polynomial(Polynomial::from_terms(arity, [(vec![0; arity], c)]))
    }

    pub fn with_domain(mut self, domain: Rectangle) -> Result<Self> {
        if domain.dim() != self.arity {
            return Err(Error::DimensionMismatch(format!(
                "domain has {} intervals, function has {} variables",
                domain.dim(),
                self.arity
            )));
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn domain(&self) -> &Rectangle {
        &self.domain
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn require_order(&self, m: u32) -> Result<()> {
        if m > self.order {
            return Err(Error::InsufficientSmoothness { required: m as usize, available: self.order as usize });
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let alpha = vec![0; self.arity];
        self.body.partial(&alpha, x)
    }

    /// `d^alpha f(x)`. Callers check the order with [`Self::require_order`].
    pub fn partial(&self, alpha: &[u32], x: &[f64]) -> f64 {
        debug_assert!(alpha.iter().sum::<u32>() <= self.order);
        self.body.partial(alpha, x)
    }

    /// First partial in variable `r`.
    pub fn gradient_component(&self, r: usize, x: &[f64]) -> f64 {
        let mut alpha = vec![0; self.arity];
        alpha[r] = 1;
        self.body.partial(&alpha, x)
    }

    pub fn has_complex_extension(&self) -> bool {
        self.body.is_analytic()
    }

    pub fn complex_eval(&self, z: &[Complex64]) -> Result<Complex64> {
        self.body.complex_value(z).ok_or(Error::NotAnalytic)
    }

    pub fn check_spectrum(&self, points: &[Vec<f64>]) -> Result<()> {
        let bad: Vec<Vec<f64>> = points.iter().filter(|x| !self.domain.contains(x)).cloned().collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::SpectrumOutsideDomain { points: bad })
        }
    }
}

struct ClosureBody<P, C> {
    partial: P,
    complex: Option<C>,
}

impl<P, C> fmt::Debug for ClosureBody<P, C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ClosureBody")
    }
}

impl<P, C> FunctionBody for ClosureBody<P, C>
where
    P: Fn(&[u32], &[f64]) -> f64 + Send + Sync,
    C: Fn(&[Complex64]) -> Complex64 + Send + Sync,
{
    fn partial(&self, alpha: &[u32], x: &[f64]) -> f64 {
        (self.partial)(alpha, x)
    }

    fn complex_value(&self, z: &[Complex64]) -> Option<Complex64> {
        self.complex.as_ref().map(|c| c(z))
    }

    fn is_analytic(&self) -> bool {
        self.complex.is_some()
    }
}

/// Multivariate polynomial with real coefficients.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Polynomial {
    pub arity: usize,
    /// Exponent multi-index to coefficient; zero coefficients are dropped.
    pub terms: BTreeMap<Vec<u32>, f64>,
}

fn falling_factorial(e: u32, k: u32) -> f64 {
    (0..k).map(|i| (e - i) as f64).product()
}

impl Polynomial {
    pub fn zero(arity: usize) -> Self {
        Polynomial { arity, terms: BTreeMap::new() }
    }

    pub fn from_terms(arity: usize, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Self {
        let mut p = Polynomial::zero(arity);
        for (e, c) in terms {
            assert_eq!(e.len(), arity, "exponent length must equal arity");
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, e: Vec<u32>, c: f64) {
        let entry = self.terms.entry(e).or_insert(0.0);
        *entry += c;
        self.terms.retain(|_, v| *v != 0.0);
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(x).map(|(&k, &v)| v.powi(k as i32)).product::<f64>())
            .sum()
    }

    pub fn derivative(&self, alpha: &[u32]) -> Polynomial {
        let mut out = Polynomial::zero(self.arity);
        for (e, c) in &self.terms {
            if e.iter().zip(alpha).any(|(k, a)| a > k) {
                continue;
            }
            let w: f64 = e.iter().zip(alpha).map(|(&k, &a)| falling_factorial(k, a)).product();
            let ne: Vec<u32> = e.iter().zip(alpha).map(|(k, a)| k - a).collect();
            out.add_term(ne, c * w);
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.arity);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                out.add_term(e1.iter().zip(e2).map(|(a, b)| a + b).collect(), c1 * c2);
            }
        }
        out
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }

    pub fn scale(&self, a: f64) -> Polynomial {
        let mut out = Polynomial::zero(self.arity);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * a);
        }
        out
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        const NAMES: [&str; 3] = ["x", "y", "z"];
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (r, k) in e.iter().enumerate() {
                let name = NAMES.get(r).map(|s| s.to_string()).unwrap_or_else(|| format!("x{}", r + 1));
                match k {
                    0 => {}
                    1 => write!(f, "*{name}")?,
                    _ => write!(f, "*{name}^{k}")?,
                }
            }
        }
        Ok(())
    }
}

impl FunctionBody for Polynomial {
    fn partial(&self, alpha: &[u32], x: &[f64]) -> f64 {
        if alpha.iter().all(|&a| a == 0) {
            self.eval(x)
        } else {
            self.derivative(alpha).eval(x)
        }
    }

    fn complex_value(&self, z: &[Complex64]) -> Option<Complex64> {
        Some(
            self.terms
                .iter()
                .map(|(e, c)| e.iter().zip(z).map(|(&k, v)| v.powu(k)).product::<Complex64>() * c)
                .sum(),
        )
    }

    fn is_analytic(&self) -> bool {
        true
    }
}
