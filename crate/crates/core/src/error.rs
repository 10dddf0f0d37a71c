use thiserror::Error;

/// Errors raised while building or checking geometric data.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("sector dimension mismatch in {sector}: {left} vs {right}")]
    DimensionMismatch {
        sector: String,
        left: usize,
        right: usize,
    },

    #[error("component {sector} violates ∂_{var}² = 0 (coefficient magnitude {magnitude:e})")]
    Nilpotency {
        sector: String,
        var: String,
        magnitude: f64,
    },

    #[error("component {sector} depends on {var}, which it must not")]
    ForbiddenDependence { sector: String, var: String },

    #[error("odd Grassmann monomial {monomial} carries a nonzero component")]
    OddComponent { monomial: String },

    #[error("field `{name}` is missing from the geometry bundle")]
    MissingField { name: String },

    #[error("division by `{what}`, which vanishes at node ({s:.4}, {t:.4})")]
    Singular { what: String, s: f64, t: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("constraint {constraint} violated at node ({s:.4}, {t:.4}): margin {margin:e}")]
    Constraint {
        constraint: String,
        s: f64,
        t: f64,
        margin: f64,
    },

    #[error("field `{name}` must be real-valued; imaginary defect {defect:e}")]
    NotReal { name: String, defect: f64 },

    #[error("grid mismatch: {0}")]
    Grid(String),

    #[error("initial frame: {0}")]
    Frame(String),

    #[error("non-finite value during {0}")]
    NonFinite(String),

    #[error("path dependence {found:e} exceeds tolerance {tol:e}")]
    PathDependence { found: f64, tol: f64 },

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
