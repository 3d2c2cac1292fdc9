//! JSON representations of matrices, tuples and diagonalizations.
//!
//! Floats are written in shortest round-trip form, so reading back a written
//! file reproduces every entry bit for bit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::joint_diag::JointDiagonalization;
use crate::types::{CMatrix, HermitianMatrix, SelfAdjointTuple};

/// `{"n": int, "re": [[...]], "im": [[...]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let n = m.nrows();
        MatrixJson {
            n,
            re: (0..n).map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect()).collect(),
            im: (0..n).map(|i| (0..m.ncols()).map(|j| m[(i, j)].im).collect()).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.n;
        let square = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if n == 0 || !square(&self.re) || !square(&self.im) {
            return Err(Error::InvalidInput(format!("matrix with n = {n} needs {n}x{n} \"re\" and \"im\" arrays")));
        }
        if self.re.iter().chain(&self.im).flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        Ok(CMatrix::from_fn(n, n, |i, j| Complex64::new(self.re[i][j], self.im[i][j])))
    }

    pub fn to_hermitian(&self) -> Result<HermitianMatrix> {
        HermitianMatrix::new(self.to_matrix()?)
    }
}

/// `{"d": int, "components": [matrix, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleJson {
    pub d: usize,
    pub components: Vec<MatrixJson>,
}

impl TupleJson {
    pub fn from_tuple(t: &SelfAdjointTuple) -> Self {
        TupleJson { d: t.d(), components: t.components().iter().map(|c| MatrixJson::from_matrix(c.matrix())).collect() }
    }

    pub fn to_tuple(&self) -> Result<SelfAdjointTuple> {
        if self.d != self.components.len() {
            return Err(Error::InvalidInput(format!("\"d\" is {} but {} components are given", self.d, self.components.len())));
        }
        SelfAdjointTuple::new(self.components.iter().map(|m| m.to_hermitian()).collect::<Result<Vec<_>>>()?)
    }
}

/// `{"U_re", "U_im", "eigs", "groups"}`; `groups` lists 0-based indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct DiagJson {
    pub U_re: Vec<Vec<f64>>,
    pub U_im: Vec<Vec<f64>>,
    pub eigs: Vec<Vec<f64>>,
    pub groups: Vec<Vec<usize>>,
}

impl DiagJson {
    pub fn from_diag(jd: &JointDiagonalization) -> Self {
        let m = MatrixJson::from_matrix(&jd.u);
        DiagJson {
            U_re: m.re,
            U_im: m.im,
            eigs: jd.eigs.clone(),
            groups: jd.groups.iter().map(|g| g.clone().collect()).collect(),
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable value") + "\n"
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("malformed JSON: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuple_round_trip_is_exact() {
        let m = CMatrix::from_fn(3, 3, |i, j| Complex64::new(0.1 * (i + j) as f64 / 3.0, if i == j { 0.0 } else { (i as f64 - j as f64) / 7.0 }));
        let t = SelfAdjointTuple::from_matrices(vec![m.clone(), m * Complex64::new(std::f64::consts::PI, 0.0)]).unwrap();
        let text = to_json(&TupleJson::from_tuple(&t));
        let back: TupleJson = from_json(&text).unwrap();
        assert_eq!(back.to_tuple().unwrap(), t);
    }

    #[test]
    fn rejects_bad_shapes() {
        let bad = MatrixJson { n: 2, re: vec![vec![1.0, 0.0]], im: vec![vec![0.0, 0.0], vec![0.0, 0.0]] };
        assert!(bad.to_matrix().is_err());
        let t = TupleJson { d: 2, components: vec![] };
        assert!(t.to_tuple().is_err());
        assert!(from_json::<TupleJson>("{\"d\": 1}").is_err());
    }
}
