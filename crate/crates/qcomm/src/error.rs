use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state vector not normalized (squared norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("matrix is not Hermitian (max deviation {deviation})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("trace {trace} differs from 1")]
    BadTrace { trace: f64 },
    #[error("matrix is not unitary (max deviation {deviation})")]
    NotUnitary { deviation: f64 },
    #[error("measurement family incomplete (residual {residual})")]
    Incomplete { residual: f64 },
    #[error("effect spectrum outside [-1, 1] (extreme eigenvalue {eigenvalue})")]
    EffectOutOfRange { eigenvalue: f64 },
    #[error("cannot combine a {left} with a {right}")]
    MixedKinds {
        left: &'static str,
        right: &'static str,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("planting infeasible after {attempts} rejections")]
    PlantingInfeasible { attempts: u64 },
    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
