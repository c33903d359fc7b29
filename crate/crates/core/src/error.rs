use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by zero quaternion")]
    DivisionByZero,

    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("conjugate pairing of adjoint eigenvalues failed (residual {residual:.3e})")]
    PairingFailure { residual: f64 },

    #[error("eigenvalue solver did not converge")]
    EigenFailure,

    #[error("{value} is not a standard eigenvalue (nearest at distance {distance:.3e})")]
    NotAnEigenvalue { value: String, distance: f64 },

    #[error("eigenvector recovery failed: best residual {residual:.3e}")]
    RecoveryFailure { residual: f64 },

    #[error("adjoint block structure violated (residue {residue:.3e})")]
    OmegaViolation { residue: f64 },

    #[error("matrix is singular (q-determinant {qdet:.3e})")]
    Singular { qdet: f64 },

    #[error("matrix logarithm failed: residual {residual:.3e}")]
    LogFailure { residual: f64 },

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),

    #[error("{func} requires a real argument, got {arg}")]
    Domain { func: &'static str, arg: String },

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },

    #[error("coefficients are not {period}-periodic (residual {residual:.3e})")]
    NotPeriodic { period: f64, residual: f64 },

    #[error("P(t) periodicity residual {residual:.3e} exceeds {tolerance:.3e}")]
    PeriodicityViolation { residual: f64, tolerance: f64 },

    #[error("characteristic multiplier is zero")]
    ZeroMultiplier,

    #[error("coefficient is not real-valued (|Ve(a)| = {magnitude:.3e} at t = {t})")]
    NotRealCoefficient { t: f64, magnitude: f64 },

    #[error("system has no finite period")]
    MissingPeriod,
}

impl Error {
    /// Failures of the numerical pipeline, as opposed to malformed input.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::Syntax { .. }
                | Error::UnknownIdentifier { .. }
                | Error::UnboundParameter(_)
                | Error::InvalidConfig(_)
                | Error::NonSquare { .. }
                | Error::DimensionMismatch { .. }
                | Error::MissingPeriod
                | Error::NotRealCoefficient { .. }
                | Error::NotPeriodic { .. }
        )
    }
}
