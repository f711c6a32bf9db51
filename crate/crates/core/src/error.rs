use thiserror::Error;

/// Errors raised by the geometry engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("stencil node {node:?} leaves the domain of `{field}`")]
    DomainViolation { field: String, node: Vec<[f64; 2]> },

    #[error("metric `{field}` is not Hermitian at the evaluation point (residual {residual:.3e})")]
    NonHermitian { field: String, residual: f64 },

    #[error("finite-difference refinement did not reduce the error estimate ({coarse:.3e} -> {fine:.3e})")]
    NotConverged { coarse: f64, fine: f64 },

    #[error("metric is singular or ill-conditioned (condition number {condition:.3e})")]
    SingularMetric { condition: f64 },

    #[error("jet of order {have} supplied, order {need} required")]
    InsufficientJet { have: usize, need: usize },

    #[error("Chern-Ricci form is indefinite (eigenvalue {eigenvalue:.3e})")]
    IndefiniteRho { eigenvalue: f64 },

    #[error("parallel transport failed to converge at s = {at:.6}")]
    IntegrationDiverged { at: f64 },

    #[error("vector fields are linearly dependent (smallest singular value {sigma_min:.3e})")]
    DependentFields { sigma_min: f64 },

    #[error("subalgebra has full dimension, quotient is trivial")]
    DegenerateQuotient,

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("bad parameters: {0}")]
    BadParams(String),

    #[error("metric lost positivity between t = {t_lo:.6} and t = {t_hi:.6}")]
    PositivityLost { t_lo: f64, t_hi: f64 },

    #[error("variation step too large: difference quotients are not in the O(eps^2) regime (order {observed:.2})")]
    StepTooLarge { observed: f64 },

    #[error("invalid Lie algebra data: {0}")]
    InvalidAlgebra(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
