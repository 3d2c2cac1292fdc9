//! Tangent directions to the commuting variety and their witness curves.
//!
//! With `U` diagonalizing the base point `S` and `Gamma^r = U* Delta^r U`, a
//! direction `Delta` is tangent iff `[D^r, Gamma^s] = [D^s, Gamma^r]` and the
//! group-block parts `GammaTilde^r` pairwise commute. The curve
//! `U e^{Yt} (D^r + t GammaTilde^r) e^{-Yt} U*` then realizes `Delta`.

use num_complex::Complex64;

use crate::curve::RotatingCurve;
use crate::eigen::{hermitian_eigen, HermitianEigen};
use crate::error::{Error, Result};
use crate::joint_diag::{joint_diagonalize, JointDiagonalization};
use crate::types::{
    commutator, max_entry_norm, real_diagonal, tuple_norm, CMatrix, CommutingTuple, SelfAdjointTuple, Settings,
};

/// `e^{At}` for a fixed skew-Hermitian `A`, via the eigendecomposition of `iA`.
#[derive(Debug, Clone)]
pub struct SkewExp {
    eig: HermitianEigen,
}

impl SkewExp {
    pub fn new(a: &CMatrix) -> Result<Self> {
        let defect = max_entry_norm(&(a + a.adjoint()));
        if defect > 1e-10 * (1.0 + max_entry_norm(a)) {
            return Err(Error::InvalidInput(format!("matrix is not skew-Hermitian (defect {defect:e})")));
        }
        let ia = a.map(|z| z * Complex64::i());
        Ok(SkewExp { eig: hermitian_eigen(&ia) })
    }

    /// `e^{At}`; `A = -i W L W*` gives `e^{At} = W e^{-i L t} W*`.
    pub fn at(&self, t: f64) -> CMatrix {
        self.eig.apply(|lambda| Complex64::from_polar(1.0, -lambda * t))
    }
}

pub fn matrix_exponential(a: &CMatrix) -> Result<CMatrix> {
    Ok(SkewExp::new(a)?.at(1.0))
}

/// `Gamma`, `GammaTilde` and `Y` for a base point and a direction.
#[derive(Debug, Clone)]
pub struct TangentData {
    pub base: CommutingTuple,
    pub diag: JointDiagonalization,
    pub direction: SelfAdjointTuple,
    /// `Gamma^r = U* Delta^r U`.
    pub gamma: Vec<CMatrix>,
    /// `Gamma^r` restricted to the diagonal blocks of equal joint eigenvalues.
    pub gamma_tilde: Vec<CMatrix>,
    /// `Y_ij = Gamma^q_ij / (x_j^q - x_i^q)` with `q` the first separating coordinate; zero within groups.
    pub y: CMatrix,
}

impl TangentData {
    /// Builds the data without judging tangency.
    pub fn assemble(base: &CommutingTuple, diag: &JointDiagonalization, direction: &SelfAdjointTuple) -> Result<Self> {
        base.check_shape(direction)?;
        let n = base.n();
        let gamma: Vec<CMatrix> = direction.components().iter().map(|c| diag.to_eigenbasis(c.matrix())).collect();
        let mut gamma_tilde = vec![CMatrix::zeros(n, n); base.d()];
        let mut y = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                match diag.separating_coordinate(i, j) {
                    None => {
                        for (gt, g) in gamma_tilde.iter_mut().zip(&gamma) {
                            gt[(i, j)] = g[(i, j)];
                        }
                    }
                    Some(q) => {
                        y[(i, j)] = gamma[q][(i, j)] / (diag.eigs[j][q] - diag.eigs[i][q]);
                    }
                }
            }
        }
        Ok(TangentData { base: base.clone(), diag: diag.clone(), direction: direction.clone(), gamma, gamma_tilde, y })
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn d(&self) -> usize {
        self.base.d()
    }

    /// `D^r` in the eigenbasis.
    pub fn d_matrix(&self, r: usize) -> CMatrix {
        real_diagonal(&self.diag.coordinate(r))
    }

    /// `U ([Y, D^r] + GammaTilde^r) U*`, which equals `Delta^r` for tangent data.
    pub fn reconstructed_direction(&self, r: usize) -> CMatrix {
        let inner = commutator(&self.y, &self.d_matrix(r)) + &self.gamma_tilde[r];
        self.diag.from_eigenbasis(&inner)
    }
}

#[derive(Debug, Clone)]
pub struct TangencyReport {
    pub tangent: bool,
    /// `max_{r<s} ||[D^r, Gamma^s] - [D^s, Gamma^r]||_max`, normalized.
    pub commutation_residual: f64,
    /// `max_{r<s} ||[GammaTilde^r, GammaTilde^s]||_max`, normalized.
    pub block_residual: f64,
    /// Largest disagreement between candidate `Y_ij` over admissible coordinates.
    pub q_spread: f64,
    /// The normalization `(1 + ||S||)(1 + ||Delta||)`.
    pub scale: f64,
    /// Present iff `tangent`.
    pub data: Option<TangentData>,
}

/// Decides whether `delta` is tangent to the commuting variety at `s`.
pub fn tangency_check(s: &CommutingTuple, delta: &SelfAdjointTuple, settings: &Settings) -> Result<TangencyReport> {
    s.check_shape(delta)?;
    let jd = joint_diagonalize(s, settings)?;
    tangency_check_with(s, &jd, delta, settings)
}

/// As [`tangency_check`], reusing a joint diagonalization of `s`.
pub fn tangency_check_with(
    s: &CommutingTuple,
    jd: &JointDiagonalization,
    delta: &SelfAdjointTuple,
    settings: &Settings,
) -> Result<TangencyReport> {
    let td = TangentData::assemble(s, jd, delta)?;
    let n = s.n();
    let d = s.d();
    let scale = (1.0 + tuple_norm(s)) * (1.0 + tuple_norm(delta));

    let mut comm = 0.0f64;
    let mut block = 0.0f64;
    for r in 0..d {
        for q in (r + 1)..d {
            for i in 0..n {
                for j in 0..n {
                    let lhs = td.gamma[q][(i, j)] * (jd.eigs[i][r] - jd.eigs[j][r]);
                    let rhs = td.gamma[r][(i, j)] * (jd.eigs[i][q] - jd.eigs[j][q]);
                    comm = comm.max((lhs - rhs).norm());
                }
            }
            block = block.max(max_entry_norm(&commutator(&td.gamma_tilde[r], &td.gamma_tilde[q])));
        }
    }

    let mut q_spread = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let mut first: Option<Complex64> = None;
            for q in 0..d {
                let gap = jd.eigs[j][q] - jd.eigs[i][q];
                if gap == 0.0 {
                    continue;
                }
                let cand = td.gamma[q][(i, j)] / gap;
                match first {
                    None => first = Some(cand),
                    Some(c0) => q_spread = q_spread.max((cand - c0).norm()),
                }
            }
        }
    }

    let commutation_residual = comm / scale;
    let block_residual = block / scale;
    let tangent = commutation_residual <= settings.tol.comm && block_residual <= settings.tol.comm;
    Ok(TangencyReport {
        tangent,
        commutation_residual,
        block_residual,
        q_spread,
        scale,
        data: tangent.then_some(td),
    })
}

/// `t -> U e^{Yt} (D^r + t GammaTilde^r) e^{-Yt} U*` on `[-1, 1]`.
pub fn witness_curve(td: &TangentData) -> Result<RotatingCurve> {
    let coeffs = (0..td.d()).map(|r| vec![td.d_matrix(r), td.gamma_tilde[r].clone()]).collect();
    RotatingCurve::new(td.diag.u.clone(), td.y.clone(), coeffs, (-1.0, 1.0))
}
