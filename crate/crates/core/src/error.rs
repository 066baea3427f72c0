use thiserror::Error;

/// Errors produced by the geometry, flow and estimation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid isometry: determinant {det} is not 1")]
    InvalidIsometry { det: f64 },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("element is not hyperbolic (|trace| = {trace})")]
    NotHyperbolic { trace: f64 },

    #[error("fundamental-domain reduction did not terminate after {iterations} steps")]
    ReductionFailed { iterations: usize },

    #[error("enumeration incomplete: only certified up to length {certified}")]
    IncompleteEnumeration { certified: f64 },

    #[error("invalid collar profile: {0}")]
    InvalidProfile(String),

    #[error("operation needs a {expected} model")]
    ModelMismatch { expected: &'static str },

    #[error("integration failed at t = {t_reached}: {reason}")]
    IntegrationFailure { t_reached: f64, reason: String },

    #[error("Riccati solution blew up (T_back cap {t_back} reached)")]
    RiccatiBlowUp { t_back: f64 },

    #[error("no heteroclinic connector: backward endpoint of the first vector equals forward endpoint of the second")]
    NoConnector,

    #[error("pseudo-orbit jump {jump} at index {index} exceeds target {target}")]
    PseudoOrbitJump { index: usize, jump: f64, target: f64 },

    #[error("segments too short to stabilize endpoints; increase the minimal segment time")]
    EndpointUnstable,

    #[error("periodic closing failed (residual {residual})")]
    ClosingFailed { residual: f64 },

    #[error("budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported: {0}")]
    Unsupported(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
