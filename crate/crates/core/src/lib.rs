//! Matrix functions induced on tuples of pairwise-commuting Hermitian matrices.
//!
//! A real function `f` on a rectangle in `R^d` acts on a commuting tuple
//! `S = (S^1, ..., S^d)` through a common unitary eigenbasis:
//! `F(S) = U diag(f(x_1), ..., f(x_n)) U*`, where `x_i` are the joint eigenvalues.
//! This crate evaluates such functions, decides which directions are tangent to
//! the commuting variety, differentiates `F` along curves (first and higher
//! order), tracks joint eigenvalues along curves, and certifies monotonicity and
//! convexity by census. Every closed-form route ships with an independent
//! oracle (direct polynomial evaluation, Cauchy contour quadrature, finite
//! differences) so results can be cross-checked.

// `!(a <= b)` style tests are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod applications;
pub mod contour;
pub mod curve;
pub mod derivative;
pub mod divdiff;
pub mod eigen;
pub mod error;
pub mod expr;
pub mod function;
pub mod higher;
pub mod io;
pub mod joint_diag;
pub mod matfun;
pub mod spectral_flow;
pub mod tangency;
pub mod types;

pub use error::{Error, Result};
pub use function::{Interval, Polynomial, Rectangle, ScalarFunction};
pub use joint_diag::{joint_diagonalize, spectrum, JointDiagonalization};
pub use types::{
    tuple_norm, validate_commuting, CMatrix, CommutingTuple, HermitianMatrix, SelfAdjointTuple,
    Settings, TolerancePolicy,
};

pub use num_complex::Complex64;
