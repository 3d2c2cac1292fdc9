//! Built-in curve families, selected by the `"family"` field of a curve file.

use serde::{Deserialize, Serialize};

use commute_core::curve::{Curve, LinearCurve, RellichPair, RotatingCurve};
use commute_core::io::{MatrixJson, TupleJson};
use commute_core::tangency::{tangency_check, witness_curve};
use commute_core::{validate_commuting, CMatrix, Error, Result, Settings};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CurveSpec {
    /// The witness curve through `base` with velocity `dir`; `dir` must be tangent.
    Witness { base: TupleJson, dir: TupleJson },
    /// `S(t) = a + t (b - a)` on `[0, 1]`.
    Linear { a: TupleJson, b: TupleJson },
    /// `(R(t), c I)` on `[-1, 1]` with `R` the smooth 2x2 curve whose eigenvectors have no limit at 0.
    RellichPair {
        #[serde(default)]
        c: f64,
    },
    /// `V diag(p_{r,i}(t)) V*`; `polys[r][i]` lists coefficients of `p_{r,i}` in increasing degree.
    DiagonalPolynomial {
        #[serde(default)]
        unitary: Option<MatrixJson>,
        polys: Vec<Vec<Vec<f64>>>,
        #[serde(default = "default_domain")]
        domain: (f64, f64),
    },
}

fn default_domain() -> (f64, f64) {
    (-1.0, 1.0)
}

impl CurveSpec {
    /// Shape and finiteness problems surface as `InvalidInput`; commutation and
    /// tangency failures as their own variants.
    pub fn build(&self, settings: &Settings) -> Result<Box<dyn Curve>> {
        match self {
            CurveSpec::Witness { base, dir } => {
                let base = validate_commuting(&base.to_tuple()?, &settings.tol)?;
                let report = tangency_check(&base, &dir.to_tuple()?, settings)?;
                let td = report.data.ok_or(Error::NotTangent {
                    commutation: report.commutation_residual,
                    block: report.block_residual,
                })?;
                Ok(Box::new(witness_curve(&td)?))
            }
            CurveSpec::Linear { a, b } => {
                let (a, b) = (a.to_tuple()?, b.to_tuple()?);
                validate_commuting(&a, &settings.tol)?;
                validate_commuting(&b, &settings.tol)?;
                Ok(Box::new(LinearCurve::segment(&a, &b)?))
            }
            CurveSpec::RellichPair { c } => {
                if !c.is_finite() {
                    return Err(Error::InvalidInput("rellich-pair constant must be finite".into()));
                }
                Ok(Box::new(RellichPair { c: *c, domain: (-1.0, 1.0) }))
            }
            CurveSpec::DiagonalPolynomial { unitary, polys, domain } => {
                let n = polys.first().map_or(0, |p| p.len());
                if n == 0 || !(domain.1 > domain.0) || polys.iter().flatten().flatten().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidInput("diagonal-polynomial needs n >= 1 finite polynomials and lo < hi".into()));
                }
                let v = match unitary {
                    Some(m) => check_unitary(m.to_matrix()?)?,
                    None => CMatrix::identity(n, n),
                };
                Ok(Box::new(RotatingCurve::diagonal_polynomial(v, polys, *domain)?))
            }
        }
    }
}

fn check_unitary(v: CMatrix) -> Result<CMatrix> {
    let n = v.nrows();
    let defect = (v.adjoint() * &v - CMatrix::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if defect > 1e-10 {
        return Err(Error::InvalidInput(format!("\"unitary\" is not unitary (defect {defect:.3e})")));
    }
    Ok(v)
}
