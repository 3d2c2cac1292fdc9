//! Circular contours and trapezoid quadrature for Cauchy integrals.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::function::Rectangle;
use crate::types::CMatrix;

pub const DEFAULT_NODES: usize = 128;
pub const MIN_NODES: usize = 32;
const RESOLVENT_COND_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Complex64,
    pub radius: f64,
}

impl Circle {
    /// Quadrature nodes `zeta_k` and weights `w_k` with
    /// `(2 pi i)^-1 \oint g(zeta) d zeta ~ sum_k w_k g(zeta_k)`.
    pub fn nodes(&self, n: usize) -> Vec<(Complex64, Complex64)> {
        (0..n)
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
                let offset = Complex64::from_polar(self.radius, theta);
                (self.center + offset, offset / n as f64)
            })
            .collect()
    }
}

/// One circle per variable plus a node count.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourSpec {
    pub circles: Vec<Circle>,
    pub nodes: usize,
}

impl ContourSpec {
    pub fn new(circles: Vec<Circle>, nodes: usize) -> Result<Self> {
        if nodes < MIN_NODES {
            return Err(Error::InvalidInput(format!("contour needs at least {MIN_NODES} nodes, got {nodes}")));
        }
        if circles.iter().any(|c| !(c.radius > 0.0 && c.radius.is_finite())) {
            return Err(Error::InvalidInput("contour radius must be positive".into()));
        }
        Ok(ContourSpec { circles, nodes })
    }

    /// Circles centered on each variable's point spread, wide enough that the
    /// points sit well inside and, where possible, inside the domain strip.
    pub fn enclosing(points: &[Vec<f64>], domain: Option<&Rectangle>, nodes: usize) -> Result<Self> {
        let mut circles = Vec::with_capacity(points.len());
        for (r, pts) in points.iter().enumerate() {
            let lo = pts.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = pts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let center = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            let mut radius = (2.0 * half).max(1.0);
            if let Some(iv) = domain.map(|d| d.0[r]) {
                let room = iv.margin(center);
                if radius >= room {
                    radius = 0.95 * room;
                }
            }
            circles.push(Circle { center: Complex64::new(center, 0.0), radius });
        }
        let spec = ContourSpec::new(circles, nodes)?;
        spec.check(points, domain)?;
        Ok(spec)
    }

    /// Every point must lie inside its circle with margin at least `radius / 10`,
    /// and every circle must stay inside the domain strip.
    pub fn check(&self, points: &[Vec<f64>], domain: Option<&Rectangle>) -> Result<()> {
        if points.len() != self.circles.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} circles for {} variables",
                self.circles.len(),
                points.len()
            )));
        }
        for (r, (c, pts)) in self.circles.iter().zip(points).enumerate() {
            for &x in pts {
                let distance = c.radius - (Complex64::new(x, 0.0) - c.center).norm();
                if distance < c.radius / 10.0 {
                    return Err(Error::ContourTooClose { variable: r, distance, radius: c.radius });
                }
            }
            if let Some(iv) = domain.map(|d| d.0[r]) {
                let distance = iv.margin(c.center.re) - c.radius;
                if !(distance > 0.0) {
                    return Err(Error::ContourTooClose { variable: r, distance, radius: c.radius });
                }
            }
        }
        Ok(())
    }
}

/// `(zeta I - A)^-1`, rejecting ill-conditioned shifts.
pub fn resolvent(a: &CMatrix, zeta: Complex64) -> Result<CMatrix> {
    let n = a.nrows();
    let shifted = CMatrix::from_fn(n, n, |i, j| if i == j { zeta - a[(i, j)] } else { -a[(i, j)] });
    let inv = shifted.clone().lu().try_inverse().ok_or(Error::ResolventIllConditioned { condition: f64::INFINITY })?;
    let condition = one_norm(&shifted) * one_norm(&inv);
    if !(condition <= RESOLVENT_COND_LIMIT) {
        return Err(Error::ResolventIllConditioned { condition });
    }
    Ok(inv)
}

fn one_norm(a: &DMatrix<Complex64>) -> f64 {
    (0..a.ncols()).map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}
