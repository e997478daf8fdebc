use alloc::boxed::Box;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("array must contain at least one waveguide")]
    EmptyArray,

    #[error("{what}: expected length {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("coupling C_{index} = {value} is not strictly positive")]
    NonPositiveCoupling { index: usize, value: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid pump: {0}")]
    InvalidPump(&'static str),

    #[error("invalid disorder specification: {0}")]
    InvalidDisorder(&'static str),

    #[error("invalid z grid: {0}")]
    InvalidGrid(&'static str),

    #[error("tridiagonal eigensolver did not converge for eigenvalue {index}")]
    NoConvergence { index: usize },

    #[error("biphoton amplitude is identically zero; photon distribution undefined")]
    ZeroAmplitude,

    #[error("invalid photon-number distribution: {0}")]
    InvalidDistribution(&'static str),

    #[error("sigma must be positive for gamma, found {value} at grid index {index}")]
    NonPositiveSigma { index: usize, value: f64 },

    #[error("amplitude is in the wrong basis for this operation")]
    BasisMismatch,

    #[error("{steps} RK4 steps under-resolve the fastest phase; need at least {required}")]
    UnderResolved { steps: usize, required: usize },

    #[error("realization {index} failed: {source}")]
    Realization { index: usize, source: Box<Error> },
}
