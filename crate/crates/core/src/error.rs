use std::fmt;

use thiserror::Error;

/// One pair `(r, s)` whose commutator exceeds the admissible bound.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CommutatorViolation {
    pub r: usize,
    pub s: usize,
    pub norm: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CommutationReport {
    pub offenders: Vec<CommutatorViolation>,
}

impl fmt::Display for CommutationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .offenders
            .iter()
            .map(|v| format!("[S^{},S^{}] = {:.3e} > {:.3e}", v.r + 1, v.s + 1, v.norm, v.bound))
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("tuple does not commute: {0}")]
    NotCommuting(CommutationReport),

    #[error("eigenvalue grouping is tolerance-sensitive: gap {gap:.3e} against tolerance {tol:.3e}")]
    GroupingAmbiguous { gap: f64, tol: f64 },

    #[error("joint spectrum leaves the domain of f at {points:?}")]
    SpectrumOutsideDomain { points: Vec<Vec<f64>> },

    #[error("contour for variable {variable} is too close to the spectrum (distance {distance:.3e}, radius {radius:.3e})")]
    ContourTooClose { variable: usize, distance: f64, radius: f64 },

    #[error("resolvent is ill-conditioned at a quadrature node (condition number {condition:.3e})")]
    ResolventIllConditioned { condition: f64 },

    #[error("direction is not tangent to the commuting variety (residuals {commutation:.3e}, {block:.3e})")]
    NotTangent { commutation: f64, block: f64 },

    #[error("function provides derivatives to order {available}, but order {required} is needed")]
    InsufficientSmoothness { required: usize, available: usize },

    #[error("derivative order {order} exceeds the supported maximum {max}")]
    OrderTooHigh { order: usize, max: usize },

    #[error("parameter {t} leaves the curve domain [{lo}, {hi}]")]
    OutsideCurveDomain { t: f64, lo: f64, hi: f64 },

    #[error("function has no analytic extension to complex arguments")]
    NotAnalytic,

    #[error("rejection sampling budget of {0} attempts exhausted")]
    RejectionBudgetExhausted(usize),

    #[error("segment leaves the commuting variety at lambda = {lambda}")]
    SegmentNotCommuting { lambda: f64 },

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NotCommuting(_) => "NotCommuting",
            Error::GroupingAmbiguous { .. } => "GroupingAmbiguous",
            Error::SpectrumOutsideDomain { .. } => "SpectrumOutsideDomain",
            Error::ContourTooClose { .. } => "ContourTooClose",
            Error::ResolventIllConditioned { .. } => "ResolventIllConditioned",
            Error::NotTangent { .. } => "NotTangent",
            Error::InsufficientSmoothness { .. } => "InsufficientSmoothness",
            Error::OrderTooHigh { .. } => "OrderTooHigh",
            Error::OutsideCurveDomain { .. } => "OutsideCurveDomain",
            Error::NotAnalytic => "NotAnalytic",
            Error::RejectionBudgetExhausted(_) => "RejectionBudgetExhausted",
            Error::SegmentNotCommuting { .. } => "SegmentNotCommuting",
            Error::Parse { .. } => "Parse",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
