use thiserror::Error;

use crate::kcontact::StructureCondition;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("k-contact structure violated at {point:?}: condition {condition}")]
    StructureViolated {
        condition: StructureCondition,
        point: Vec<f64>,
    },

    #[error("Reeb system residual {residual:e} exceeds tolerance {tol:e}")]
    ReebResidual { residual: f64, tol: f64 },

    #[error("outside open set O: |H| = {value:e} is below {threshold:e}")]
    OutsideOpenSet { value: f64, threshold: f64 },

    #[error("system `{0}` has no Darboux layout")]
    MissingLayout(String),

    #[error("operation requires k = {expected}, system has k = {got}")]
    WrongK { expected: usize, got: usize },

    #[error("stability bound violated: dt = {dt:e} exceeds {bound:e} ({rule})")]
    Stability {
        dt: f64,
        bound: f64,
        rule: &'static str,
    },

    #[error("solution blew up at t = {t}")]
    BlowUp { t: f64 },

    #[error("grid node (time {time}, space {space}) is not interior")]
    BoundaryNode { time: usize, space: usize },

    #[error("oracle unavailable: {0}")]
    Oracle(String),
}
