//! Joint-eigenvalue tracking along sampled curves, and eigenvector-angle diagnostics.

use crate::curve::{sample, Curve};
use crate::eigen::hermitian_eigen;
use crate::error::{Error, Result};
use crate::joint_diag::{joint_diagonalize, JointDiagonalization};
use crate::types::{CMatrix, HermitianMatrix, Settings};

pub use crate::curve::rellich_matrix as rellich_fixture;

/// `max_r |a_r - b_r|`.
pub fn max_metric(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Perfect matching in the bipartite graph `allowed[i][j]`, as `row -> column`.
fn perfect_matching(allowed: &[Vec<bool>]) -> Option<Vec<usize>> {
    let n = allowed.len();
    let mut col_owner: Vec<Option<usize>> = vec![None; n];
    fn augment(i: usize, allowed: &[Vec<bool>], seen: &mut [bool], col_owner: &mut [Option<usize>]) -> bool {
        for j in 0..allowed.len() {
            if allowed[i][j] && !seen[j] {
                seen[j] = true;
                if col_owner[j].is_none_or(|o| augment(o, allowed, seen, col_owner)) {
                    col_owner[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    for i in 0..n {
        let mut seen = vec![false; n];
        if !augment(i, allowed, &mut seen, &mut col_owner) {
            return None;
        }
    }
    let mut row_to_col = vec![0; n];
    for (j, o) in col_owner.iter().enumerate() {
        row_to_col[o.expect("perfect")] = j;
    }
    Some(row_to_col)
}

/// Minimum-sum assignment (Hungarian algorithm, potentials form), as `row -> column`.
fn min_sum_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0; n];
    for j in 1..=n {
        row_to_col[p[j] - 1] = j - 1;
    }
    row_to_col
}

/// Permutation minimizing `max_i cost[i][perm[i]]`, ties broken by the smallest sum.
pub fn bottleneck_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let mut levels: Vec<f64> = cost.iter().flatten().copied().collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let feasible = |th: f64| perfect_matching(&cost.iter().map(|row| row.iter().map(|&c| c <= th).collect()).collect::<Vec<_>>());
    let (mut lo, mut hi) = (0, levels.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(levels[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let th = levels[lo];
    let total: f64 = cost.iter().flatten().map(|c| c.abs()).sum::<f64>() + 1.0;
    let big = total * (n as f64 + 1.0);
    let restricted: Vec<Vec<f64>> = cost.iter().map(|row| row.iter().map(|&c| if c <= th { c } else { big }).collect()).collect();
    min_sum_assignment(&restricted)
}

pub fn assignment_cost(cost: &[Vec<f64>], perm: &[usize]) -> f64 {
    perm.iter().enumerate().map(|(i, &j)| cost[i][j]).fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct EigenPathBundle {
    pub grid: Vec<f64>,
    /// `paths[i][k]` is the joint eigenvalue carried by path `i` at `grid[k]`.
    pub paths: Vec<Vec<Vec<f64>>>,
    /// `labels[k][i]`: column of the diagonalization at `grid[k]` carried by path `i`.
    pub labels: Vec<Vec<usize>>,
    /// Joint diagonalization at each grid point.
    pub frames: Vec<JointDiagonalization>,
    /// `max_k max_i ||x_i(t_{k+1}) - x_i(t_k)||_max / (t_{k+1} - t_k)`.
    pub lipschitz_estimate: f64,
}

impl EigenPathBundle {
    pub fn n(&self) -> usize {
        self.paths.len()
    }

    /// Largest per-path displacement over step `k`, divided by the step length.
    pub fn step_rate(&self, k: usize) -> f64 {
        let dt = self.grid[k + 1] - self.grid[k];
        self.paths.iter().map(|p| max_metric(&p[k + 1], &p[k])).fold(0.0, f64::max) / dt
    }
}

/// Tracks joint eigenvalues along `grid` by bottleneck matching between consecutive samples.
pub fn track_eigenvalues(curve: &dyn Curve, grid: &[f64], settings: &Settings) -> Result<EigenPathBundle> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("grid must be strictly increasing".into()));
    }
    let frames = grid
        .iter()
        .map(|&t| joint_diagonalize(&sample(curve, t, &settings.tol)?, settings))
        .collect::<Result<Vec<_>>>()?;
    let n = curve.n();
    let mut labels: Vec<Vec<usize>> = vec![(0..n).collect()];
    for k in 0..grid.len() - 1 {
        let prev = &labels[k];
        let cost: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|c| max_metric(&frames[k + 1].eigs[c], &frames[k].eigs[prev[i]])).collect())
            .collect();
        labels.push(bottleneck_assignment(&cost));
    }
    let paths: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|i| (0..grid.len()).map(|k| frames[k].eigs[labels[k][i]].clone()).collect())
        .collect();
    let mut bundle = EigenPathBundle { grid: grid.to_vec(), paths, labels, frames, lipschitz_estimate: 0.0 };
    bundle.lipschitz_estimate = (0..grid.len() - 1).map(|k| bundle.step_rate(k)).fold(0.0, f64::max);
    Ok(bundle)
}

fn group_basis(jd: &JointDiagonalization, col: usize) -> CMatrix {
    let range = jd.groups.iter().find(|g| g.contains(&col)).expect("column in some group").clone();
    jd.u.columns(range.start, range.len()).into_owned()
}

/// Sine of the largest principal angle from the smaller subspace into the larger.
pub fn subspace_sine(a: &CMatrix, b: &CMatrix) -> f64 {
    let (small, big) = if a.ncols() <= b.ncols() { (a, b) } else { (b, a) };
    let residual = small - big * (big.adjoint() * small);
    let gram = residual.adjoint() * &residual;
    let top = hermitian_eigen(&gram).values.last().copied().unwrap_or(0.0);
    top.max(0.0).sqrt().min(1.0)
}

#[derive(Debug, Clone, Copy)]
pub struct DetectorConfig {
    /// Flag when the angle rate exceeds this multiple of the eigenvalue Lipschitz estimate.
    pub rate_factor: f64,
    /// Angle rates below this are never flagged.
    pub min_rate: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig { rate_factor: 10.0, min_rate: 1.0 }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct StepAngle {
    pub t0: f64,
    pub t1: f64,
    /// Largest principal angle between matched eigenspaces, in radians.
    pub angle: f64,
    pub angle_rate: f64,
    pub eigen_rate: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct DiscontinuityReport {
    pub steps: Vec<StepAngle>,
    pub lipschitz_estimate: f64,
    pub max_angle_rate: f64,
    pub flagged_steps: usize,
}

pub fn eigenvector_discontinuity_report(bundle: &EigenPathBundle, config: &DetectorConfig) -> DiscontinuityReport {
    let mut steps = Vec::new();
    for k in 0..bundle.grid.len().saturating_sub(1) {
        let dt = bundle.grid[k + 1] - bundle.grid[k];
        let mut angle = 0.0f64;
        for i in 0..bundle.n() {
            let a = group_basis(&bundle.frames[k], bundle.labels[k][i]);
            let b = group_basis(&bundle.frames[k + 1], bundle.labels[k + 1][i]);
            angle = angle.max(subspace_sine(&a, &b).asin());
        }
        let angle_rate = angle / dt;
        let eigen_rate = bundle.step_rate(k);
        let flagged = angle_rate > config.min_rate && angle_rate > config.rate_factor * bundle.lipschitz_estimate;
        steps.push(StepAngle { t0: bundle.grid[k], t1: bundle.grid[k + 1], angle, angle_rate, eigen_rate, flagged });
    }
    let max_angle_rate = steps.iter().map(|s| s.angle_rate).fold(0.0, f64::max);
    let flagged_steps = steps.iter().filter(|s| s.flagged).count();
    DiscontinuityReport { steps, lipschitz_estimate: bundle.lipschitz_estimate, max_angle_rate, flagged_steps }
}

/// Angle in `[0, pi)` of the line spanned by the eigenvector of the larger eigenvalue of a real 2x2 matrix.
pub fn leading_eigenvector_angle(m: &HermitianMatrix) -> f64 {
    let e = hermitian_eigen(m.matrix());
    let v = e.vectors.column(1);
    let angle = v[1].re.atan2(v[0].re);
    angle.rem_euclid(std::f64::consts::PI)
}

/// `count` evenly spaced points from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if count < 2 || !(hi > lo) {
        return Err(Error::InvalidInput(format!("grid {lo}:{hi}:{count} needs lo < hi and at least 2 points")));
    }
    Ok((0..count).map(|k| if k + 1 == count { hi } else { lo + (hi - lo) * k as f64 / (count - 1) as f64 }).collect())
}
