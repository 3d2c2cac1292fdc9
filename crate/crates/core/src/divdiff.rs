//! Two-variable divided differences `f^{[k, j-k]}` with confluent nodes.
//!
//! The one-variable Hermite recursion (equal nodes contribute
//! `g^{(p)}(z) / p!`) is applied in `x` for every needed `y`-derivative, then in
//! `y`. Node equality is exact floating-point equality; callers pass grouped
//! (snapped) eigenvalues.

use num_complex::Complex64;

use crate::contour::{ContourSpec, DEFAULT_NODES};
use crate::error::{Error, Result};
use crate::function::ScalarFunction;

fn factorial(p: usize) -> f64 {
    (1..=p).map(|k| k as f64).product()
}

fn max_multiplicity(nodes: &[f64]) -> usize {
    nodes.iter().map(|a| nodes.iter().filter(|b| *b == a).count()).max().unwrap_or(0)
}

/// One-variable divided difference over `nodes`; `deriv(p, z)` returns `g^{(p)}(z)`.
pub fn divided_difference_1d(nodes: &[f64], deriv: &dyn Fn(usize, f64) -> f64) -> f64 {
    let mut z = nodes.to_vec();
    z.sort_by(f64::total_cmp);
    let m = z.len();
    // Column p of the triangular table holds dd[i..=i+p] in row i.
    let mut col: Vec<f64> = z.iter().map(|&v| deriv(0, v)).collect();
    for p in 1..m {
        let mut next = Vec::with_capacity(m - p);
        for i in 0..(m - p) {
            let (a, b) = (z[i], z[i + p]);
            next.push(if a == b { deriv(p, a) / factorial(p) } else { (col[i + 1] - col[i]) / (b - a) });
        }
        col = next;
    }
    col[0]
}

fn validate(f: &ScalarFunction, k: usize, j: usize, xs: &[f64], ys: &[f64]) -> Result<()> {
    if f.arity() != 2 {
        return Err(Error::DimensionMismatch(format!("divided differences need 2 variables, function has {}", f.arity())));
    }
    if k > j {
        return Err(Error::InvalidInput(format!("k = {k} exceeds j = {j}")));
    }
    if xs.len() != k + 1 || ys.len() != j - k + 1 {
        return Err(Error::DimensionMismatch(format!(
            "order ({k}, {}) needs {} x-nodes and {} y-nodes, got {} and {}",
            j - k,
            k + 1,
            j - k + 1,
            xs.len(),
            ys.len()
        )));
    }
    let dom = &f.domain().0;
    let bad: Vec<Vec<f64>> = xs
        .iter()
        .flat_map(|&x| ys.iter().map(move |&y| vec![x, y]))
        .filter(|p| !(dom[0].contains(p[0]) && dom[1].contains(p[1])))
        .collect();
    if !bad.is_empty() {
        return Err(Error::SpectrumOutsideDomain { points: bad });
    }
    Ok(())
}

/// `f^{[k, j-k]}(x_1, ..., x_{k+1}; y_1, ..., y_{j-k+1})`.
pub fn divided_difference(f: &ScalarFunction, k: usize, j: usize, xs: &[f64], ys: &[f64]) -> Result<f64> {
    validate(f, k, j, xs, ys)?;
    let need = (max_multiplicity(xs) - 1) + (max_multiplicity(ys) - 1);
    f.require_order(need as u32)?;
    Ok(dd_unchecked(f, xs, ys))
}

/// The tensorized divided difference without validation; used in inner loops.
pub(crate) fn dd_unchecked(f: &ScalarFunction, xs: &[f64], ys: &[f64]) -> f64 {
    divided_difference_1d(ys, &|q, y| {
        divided_difference_1d(xs, &|p, x| f.partial(&[p as u32, q as u32], &[x, y]))
    })
}

/// `(2 pi i)^-2 \oint \oint f(z1, z2) / (prod (z1 - x_q) prod (z2 - y_r)) dz1 dz2`.
pub fn contour_dd(f: &ScalarFunction, k: usize, j: usize, xs: &[f64], ys: &[f64], spec: &ContourSpec) -> Result<f64> {
    validate(f, k, j, xs, ys)?;
    if !f.has_complex_extension() {
        return Err(Error::NotAnalytic);
    }
    spec.check(&[xs.to_vec(), ys.to_vec()], Some(f.domain()))?;
    let n1 = spec.circles[0].nodes(spec.nodes);
    let n2 = spec.circles[1].nodes(spec.nodes);
    let wy: Vec<Complex64> = n2
        .iter()
        .map(|(z, w)| w / ys.iter().map(|y| z - y).product::<Complex64>())
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    for (z1, w1) in &n1 {
        let wx = w1 / xs.iter().map(|x| z1 - x).product::<Complex64>();
        let mut inner = Complex64::new(0.0, 0.0);
        for ((z2, _), w) in n2.iter().zip(&wy) {
            inner += f.complex_eval(&[*z1, *z2])? * w;
        }
        total += wx * inner;
    }
    Ok(total.re)
}

/// [`contour_dd`] on circles fitted around the nodes.
pub fn contour_dd_auto(f: &ScalarFunction, k: usize, j: usize, xs: &[f64], ys: &[f64]) -> Result<f64> {
    validate(f, k, j, xs, ys)?;
    let spec = ContourSpec::enclosing(&[xs.to_vec(), ys.to_vec()], Some(f.domain()), DEFAULT_NODES)?;
    contour_dd(f, k, j, xs, ys, &spec)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct MeanValueReport {
    pub dd: f64,
    /// `dd * k! (j-k)!`, which must be a value of `f^{(k, j-k)}` on the box.
    pub scaled: f64,
    pub grid_min: f64,
    pub grid_max: f64,
    /// Largest jump between adjacent grid values, allowed as resolution slack.
    pub slack: f64,
    pub certified: bool,
}

const MEAN_VALUE_GRID: usize = 101;

/// Checks that `dd * k!(j-k)!` lies in the range of `f^{(k, j-k)}` over `jx x jy`.
pub fn mean_value_check(
    f: &ScalarFunction,
    k: usize,
    j: usize,
    xs: &[f64],
    ys: &[f64],
    jx: (f64, f64),
    jy: (f64, f64),
) -> Result<MeanValueReport> {
    let dd = divided_difference(f, k, j, xs, ys)?;
    f.require_order(j as u32)?;
    let inside = |v: &f64, (a, b): (f64, f64)| *v >= a && *v <= b;
    if !xs.iter().all(|v| inside(v, jx)) || !ys.iter().all(|v| inside(v, jy)) {
        return Err(Error::InvalidInput("nodes must lie in the given subintervals".into()));
    }
    let alpha = [k as u32, (j - k) as u32];
    let m = MEAN_VALUE_GRID;
    let grid = |(a, b): (f64, f64), i: usize| a + (b - a) * i as f64 / (m - 1) as f64;
    let mut vals = vec![0.0; m * m];
    for a in 0..m {
        for b in 0..m {
            vals[a * m + b] = f.partial(&alpha, &[grid(jx, a), grid(jy, b)]);
        }
    }
    let grid_min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let grid_max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut slack = 0.0f64;
    for a in 0..m {
        for b in 0..m {
            if a + 1 < m {
                slack = slack.max((vals[(a + 1) * m + b] - vals[a * m + b]).abs());
            }
            if b + 1 < m {
                slack = slack.max((vals[a * m + b + 1] - vals[a * m + b]).abs());
            }
        }
    }
    let scaled = dd * factorial(k) * factorial(j - k);
    let round = 1e-10 * (1.0 + scaled.abs());
    let certified = scaled >= grid_min - slack - round && scaled <= grid_max + slack + round;
    Ok(MeanValueReport { dd, scaled, grid_min, grid_max, slack, certified })
}
