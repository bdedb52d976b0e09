use thiserror::Error;

/// Errors shared across the crate.
///
/// Numerical *outcomes* (a solver that did not converge, a trajectory that
/// blew up) are not errors; they are reported in the corresponding result
/// structs. Errors mean the computation could not proceed at all.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("parse error at byte {offset}: {msg}")]
    Parse { offset: usize, msg: String },

    #[error("domain error in {op} at x = {point:?} (operand {operand})")]
    Domain {
        op: &'static str,
        operand: f64,
        point: Vec<f64>,
    },

    #[error("non-finite value evaluating a field at x = {point:?}")]
    NonFinite { point: Vec<f64> },

    #[error("point has {got} coordinates, field expects {expect}")]
    DimensionMismatch { expect: usize, got: usize },

    #[error("Lorentz certificate violated: H = {h:.6e} <= 0 at x = {point:?}")]
    LorentzViolation { h: f64, point: Vec<f64> },

    #[error("degenerate fiber reduction: |ell| = {ell:.6e} at or below floor {floor:.6e}")]
    DegenerateL { ell: f64, floor: f64 },

    #[error("base metric is not positive definite at x = {point:?}")]
    MetricNotPositive { point: Vec<f64> },

    #[error("invalid parameter {name}: {msg}")]
    InvalidParameter { name: &'static str, msg: String },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
