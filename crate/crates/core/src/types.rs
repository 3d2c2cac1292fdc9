//! Matrix and tuple carriers, norms and the tolerance policy.

use std::ops::Deref;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::eigen::hermitian_eigen;
use crate::error::{CommutationReport, CommutatorViolation, Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Largest entry modulus.
pub fn max_entry_norm(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Returns `(A + A*) / 2` with an exactly real diagonal.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let mut out = a.clone();
    for i in 0..n {
        out[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let v = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            out[(i, j)] = v;
            out[(j, i)] = v.conj();
        }
    }
    out
}

/// Largest deviation from Hermitian symmetry, `max |A - A*|`.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    max_entry_norm(&(a - a.adjoint()))
}

pub fn real_diagonal(values: &[f64]) -> CMatrix {
    let n = values.len();
    let mut m = CMatrix::zeros(n, n);
    for (i, v) in values.iter().enumerate() {
        m[(i, i)] = Complex64::new(*v, 0.0);
    }
    m
}

/// An `n x n` complex Hermitian matrix.
///
/// Construction symmetrizes, so the stored matrix is Hermitian to the last bit.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidInput("matrix dimension must be positive".into()));
        }
        Ok(HermitianMatrix(hermitian_part(&m)))
    }

    /// Symmetrizes without checks; callers guarantee a square nonempty input.
    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        HermitianMatrix(hermitian_part(&m))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("rows of unequal length".into()));
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j], 0.0)))
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::new(real_diagonal(values))
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix(CMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        HermitianMatrix(CMatrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// Operator (spectral) norm: the largest eigenvalue modulus.
    pub fn spectral_norm(&self) -> f64 {
        hermitian_eigen(&self.0)
            .values
            .iter()
            .fold(0.0, |m, v| f64::max(m, v.abs()))
    }

    pub fn max_entry_norm(&self) -> f64 {
        max_entry_norm(&self.0)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.0).values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn scale(&self, a: f64) -> Self {
        HermitianMatrix(self.0.map(|z| z * a))
    }

    pub fn add(&self, other: &Self) -> Self {
        HermitianMatrix(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        HermitianMatrix(&self.0 - &other.0)
    }

    /// `V A V*` for a unitary `V`.
    pub fn conjugate_by(&self, v: &CMatrix) -> Self {
        Self::from_matrix_unchecked(v * &self.0 * v.adjoint())
    }
}

/// A `d`-tuple of Hermitian matrices of common dimension, with no commutation
/// requirement. Used for directions and for unvalidated input.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfAdjointTuple {
    components: Vec<HermitianMatrix>,
}

impl SelfAdjointTuple {
    pub fn new(components: Vec<HermitianMatrix>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::InvalidInput("tuple needs at least one component".into()));
        };
        let n = first.dim();
        if let Some((r, c)) = components.iter().enumerate().find(|(_, c)| c.dim() != n) {
            return Err(Error::DimensionMismatch(format!(
                "component {} has dimension {}, expected {}",
                r + 1,
                c.dim(),
                n
            )));
        }
        Ok(SelfAdjointTuple { components })
    }

    pub fn from_matrices(ms: Vec<CMatrix>) -> Result<Self> {
        Self::new(ms.into_iter().map(HermitianMatrix::new).collect::<Result<Vec<_>>>()?)
    }

    pub fn zeros(n: usize, d: usize) -> Self {
        SelfAdjointTuple { components: vec![HermitianMatrix::zeros(n); d] }
    }

    pub fn d(&self) -> usize {
        self.components.len()
    }

    pub fn n(&self) -> usize {
        self.components[0].dim()
    }

    pub fn components(&self) -> &[HermitianMatrix] {
        &self.components
    }

    pub fn component(&self, r: usize) -> &HermitianMatrix {
        &self.components[r]
    }

    pub fn max_entry_norm(&self) -> f64 {
        self.components.iter().map(|c| c.max_entry_norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, a: f64) -> Self {
        SelfAdjointTuple { components: self.components.iter().map(|c| c.scale(a)).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        Ok(SelfAdjointTuple {
            components: self.components.iter().zip(&other.components).map(|(a, b)| a.add(b)).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        Ok(SelfAdjointTuple {
            components: self.components.iter().zip(&other.components).map(|(a, b)| a.sub(b)).collect(),
        })
    }

    /// Simultaneous conjugation `V S^r V*`.
    pub fn conjugate_by(&self, v: &CMatrix) -> Self {
        SelfAdjointTuple { components: self.components.iter().map(|c| c.conjugate_by(v)).collect() }
    }

    pub fn check_shape(&self, other: &Self) -> Result<()> {
        if self.d() != other.d() || self.n() != other.n() {
            return Err(Error::DimensionMismatch(format!(
                "tuple shapes (d={}, n={}) and (d={}, n={}) differ",
                self.d(),
                self.n(),
                other.d(),
                other.n()
            )));
        }
        Ok(())
    }
}

/// A tuple that passed [`validate_commuting`]: a point of the commuting variety.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutingTuple(SelfAdjointTuple);

impl CommutingTuple {
    pub fn as_tuple(&self) -> &SelfAdjointTuple {
        &self.0
    }

    pub fn into_tuple(self) -> SelfAdjointTuple {
        self.0
    }
}

impl Deref for CommutingTuple {
    type Target = SelfAdjointTuple;

    fn deref(&self) -> &SelfAdjointTuple {
        &self.0
    }
}

/// Thresholds shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TolerancePolicy {
    /// Hermitian symmetry after construction.
    pub herm: f64,
    /// Relative commutator bound.
    pub comm: f64,
    /// Joint-eigenvalue grouping.
    pub group: f64,
    /// Cutoff below which an eigenvalue counts as a PSD violation.
    pub psd: f64,
    /// Agreement between a formula and its oracle.
    pub oracle: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        TolerancePolicy { herm: 1e-12, comm: 1e-10, group: 1e-8, psd: 1e-9, oracle: 1e-8 }
    }
}

impl TolerancePolicy {
    pub fn new(herm: f64, comm: f64, group: f64, psd: f64, oracle: f64) -> Result<Self> {
        let t = TolerancePolicy { herm, comm, group, psd, oracle };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.herm, self.comm, self.group, self.psd, self.oracle];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidInput("tolerances must be positive and finite".into()));
        }
        if self.group < self.comm {
            return Err(Error::InvalidInput("grouping tolerance must be at least the commutator tolerance".into()));
        }
        Ok(())
    }
}

/// Tolerances plus the seed for the randomized joint diagonalization.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Settings {
    pub tol: TolerancePolicy,
    pub seed: u64,
}

impl Settings {
    pub fn with_seed(seed: u64) -> Self {
        Settings { tol: TolerancePolicy::default(), seed }
    }
}

/// `max_r ||S^r||` with the operator norm.
pub fn tuple_norm(s: &SelfAdjointTuple) -> f64 {
    s.components().iter().map(|c| c.spectral_norm()).fold(0.0, f64::max)
}

/// Accepts `s` iff `||[S^r, S^s]||_max <= tau_comm (1 + ||S^r|| ||S^s||)` for every pair.
pub fn validate_commuting(s: &SelfAdjointTuple, tol: &TolerancePolicy) -> Result<CommutingTuple> {
    let norms: Vec<f64> = s.components().iter().map(|c| c.spectral_norm()).collect();
    let mut offenders = Vec::new();
    for r in 0..s.d() {
        for q in (r + 1)..s.d() {
            let c = commutator(s.component(r).matrix(), s.component(q).matrix());
            let norm = max_entry_norm(&c);
            let bound = tol.comm * (1.0 + norms[r] * norms[q]);
            if norm > bound {
                offenders.push(CommutatorViolation { r, s: q, norm, bound });
            }
        }
    }
    if offenders.is_empty() {
        Ok(CommutingTuple(s.clone()))
    } else {
        Err(Error::NotCommuting(CommutationReport { offenders }))
    }
}
