//! Simultaneous diagonalization of commuting Hermitian tuples.
//!
//! A random combination of the (centered, normalized) components is
//! diagonalized; each eigenvalue cluster is recursed into with the compressed
//! components until every compression is scalar. Joint eigenvalues are then
//! snapped per coordinate so that equal eigenvalues are bit-identical, and
//! columns are ordered so equal joint eigenvalues sit in consecutive blocks.

use std::ops::Range;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::eigen::hermitian_eigen;
use crate::error::{Error, Result};
use crate::types::{max_entry_norm, CMatrix, CommutingTuple, Settings};

const MAX_ATTEMPTS: usize = 5;
const CLUSTER_GAP: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct JointDiagonalization {
    /// Unitary whose columns are joint eigenvectors.
    pub u: CMatrix,
    /// Row `i` is the joint eigenvalue `x_i`, snapped so equal values are identical.
    pub eigs: Vec<Vec<f64>>,
    /// Unsnapped Rayleigh quotients `u_i* S^r u_i`.
    pub raw_eigs: Vec<Vec<f64>>,
    /// Consecutive index ranges of equal joint eigenvalues.
    pub groups: Vec<Range<usize>>,
    /// Base grouping tolerance.
    pub tol_used: f64,
    /// Effective per-coordinate tolerance, `tol_used * min(1, ||S^r||)`.
    pub coord_tol: Vec<f64>,
}

impl JointDiagonalization {
    pub fn n(&self) -> usize {
        self.eigs.len()
    }

    pub fn d(&self) -> usize {
        self.coord_tol.len()
    }

    /// Group index of every eigenvalue.
    pub fn group_index(&self) -> Vec<usize> {
        let mut out = vec![0; self.n()];
        for (g, range) in self.groups.iter().enumerate() {
            for i in range.clone() {
                out[i] = g;
            }
        }
        out
    }

    pub fn same_group(&self, i: usize, j: usize) -> bool {
        self.eigs[i] == self.eigs[j]
    }

    /// Column `r` of the eigenvalue table, i.e. the diagonal of `D^r`.
    pub fn coordinate(&self, r: usize) -> Vec<f64> {
        self.eigs.iter().map(|x| x[r]).collect()
    }

    /// `U diag(x^r) U*`.
    pub fn reconstruct(&self, r: usize) -> CMatrix {
        let d = crate::types::real_diagonal(&self.coordinate(r));
        &self.u * d * self.u.adjoint()
    }

    /// `U* A U`.
    pub fn to_eigenbasis(&self, a: &CMatrix) -> CMatrix {
        self.u.adjoint() * a * &self.u
    }

    /// `U A U*`.
    pub fn from_eigenbasis(&self, a: &CMatrix) -> CMatrix {
        &self.u * a * self.u.adjoint()
    }

    /// The smallest coordinate in which `x_i` and `x_j` differ, if any.
    pub fn separating_coordinate(&self, i: usize, j: usize) -> Option<usize> {
        (0..self.d()).find(|&r| self.eigs[i][r] != self.eigs[j][r])
    }
}

fn compress(s: &CMatrix, basis: &CMatrix) -> CMatrix {
    crate::types::hermitian_part(&(basis.adjoint() * s * basis))
}

fn mean_diagonal(c: &CMatrix) -> f64 {
    let m = c.nrows();
    (0..m).map(|i| c[(i, i)].re).sum::<f64>() / m as f64
}

struct Splitter<'a> {
    comps: &'a [CMatrix],
    coord_tol: &'a [f64],
    rng: ChaCha8Rng,
}

impl Splitter<'_> {
    /// Splits the column space of `basis` into joint eigenspaces.
    fn split(&mut self, basis: CMatrix, out: &mut Vec<CMatrix>) -> Result<()> {
        let m = basis.ncols();
        if m == 1 {
            out.push(basis);
            return Ok(());
        }
        let mut active = Vec::new();
        for (r, s) in self.comps.iter().enumerate() {
            let mut c = compress(s, &basis);
            let mu = mean_diagonal(&c);
            for i in 0..m {
                c[(i, i)] -= Complex64::new(mu, 0.0);
            }
            let spread = max_entry_norm(&c);
            if spread > self.coord_tol[r] {
                active.push(c.map(|z| z / spread));
            }
        }
        if active.is_empty() {
            out.push(basis);
            return Ok(());
        }

        let mut last_gap = 0.0;
        for _ in 0..MAX_ATTEMPTS {
            let mut comb = CMatrix::zeros(m, m);
            for c in &active {
                let w: f64 = StandardNormal.sample(&mut self.rng);
                comb += c.map(|z| z * w);
            }
            let e = hermitian_eigen(&comb);
            let scale = e.values.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
            let threshold = CLUSTER_GAP * scale;
            let mut clusters: Vec<std::ops::Range<usize>> = std::iter::once(0..1).collect();
            for i in 1..m {
                if e.values[i] - e.values[i - 1] > threshold {
                    clusters.push(i..i + 1);
                } else {
                    clusters.last_mut().unwrap().end = i + 1;
                }
            }
            if clusters.len() == 1 {
                last_gap = e.values[m - 1] - e.values[0];
                continue;
            }
            let vectors = &basis * &e.vectors;
            for range in clusters {
                let sub = vectors.columns(range.start, range.len()).into_owned();
                self.split(sub, out)?;
            }
            return Ok(());
        }
        Err(Error::GroupingAmbiguous { gap: last_gap, tol: CLUSTER_GAP })
    }
}

/// Clusters values by single linkage at `tol` and replaces each by its cluster mean.
fn snap_coordinate(values: &[f64], tol: f64) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] - values[order[end - 1]] <= tol {
            end += 1;
        }
        let mean = order[start..end].iter().map(|&i| values[i]).sum::<f64>() / (end - start) as f64;
        for &i in &order[start..end] {
            out[i] = mean;
        }
        start = end;
    }
    out
}

/// Joint diagonalization with grouped, consecutive joint eigenvalues.
pub fn joint_diagonalize(s: &CommutingTuple, settings: &Settings) -> Result<JointDiagonalization> {
    let n = s.n();
    let d = s.d();
    let tol = settings.tol.group;
    let norms: Vec<f64> = s.components().iter().map(|c| c.spectral_norm()).collect();
    let coord_tol: Vec<f64> = norms.iter().map(|&nr| tol * nr.min(1.0)).collect();
    let comps: Vec<CMatrix> = s.components().iter().map(|c| c.matrix().clone()).collect();

    let mut splitter = Splitter { comps: &comps, coord_tol: &coord_tol, rng: ChaCha8Rng::seed_from_u64(settings.seed) };
    let mut blocks = Vec::new();
    splitter.split(CMatrix::identity(n, n), &mut blocks)?;

    let mut u = CMatrix::zeros(n, n);
    let mut col = 0;
    for b in &blocks {
        for k in 0..b.ncols() {
            u.set_column(col, &b.column(k));
            col += 1;
        }
    }

    let raw: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let ui = u.column(i);
            comps.iter().map(|c| (ui.adjoint() * c * ui)[(0, 0)].re).collect()
        })
        .collect();

    for i in 0..n {
        for j in (i + 1)..n {
            for r in 0..d {
                let diff = (raw[i][r] - raw[j][r]).abs();
                if coord_tol[r] > 0.0 && diff > coord_tol[r] / 10.0 && diff < coord_tol[r] * 10.0 {
                    return Err(Error::GroupingAmbiguous { gap: diff, tol: coord_tol[r] });
                }
            }
        }
    }

    let snapped_cols: Vec<Vec<f64>> = (0..d)
        .map(|r| {
            let col: Vec<f64> = raw.iter().map(|x| x[r]).collect();
            snap_coordinate(&col, coord_tol[r])
        })
        .collect();
    let snapped: Vec<Vec<f64>> = (0..n).map(|i| (0..d).map(|r| snapped_cols[r][i]).collect()).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        snapped[a].iter().zip(&snapped[b]).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut u_sorted = CMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        u_sorted.set_column(k, &u.column(i));
    }
    let eigs: Vec<Vec<f64>> = order.iter().map(|&i| snapped[i].clone()).collect();
    let raw_eigs: Vec<Vec<f64>> = order.iter().map(|&i| raw[i].clone()).collect();

    let mut groups: Vec<std::ops::Range<usize>> = std::iter::once(0..1).collect();
    for i in 1..n {
        if eigs[i] == eigs[i - 1] {
            groups.last_mut().unwrap().end = i + 1;
        } else {
            groups.push(i..i + 1);
        }
    }

    Ok(JointDiagonalization { u: u_sorted, eigs, raw_eigs, groups, tol_used: tol, coord_tol })
}

/// The joint spectrum with multiplicity, sorted lexicographically.
pub fn spectrum(s: &CommutingTuple, settings: &Settings) -> Result<Vec<Vec<f64>>> {
    Ok(joint_diagonalize(s, settings)?.eigs)
}
