use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module of the engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operands live on different bases")]
    BasisMismatch,

    #[error("operator is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("Runge-Kutta step size underflow at t = {t:.6e} (h = {h:.3e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("generator has a non-decaying subspace (max Re eigenvalue {max_real:.6e})")]
    NonDecaying { max_real: f64 },

    #[error("singular linear system: {0}")]
    Singular(&'static str),

    #[error("spectral density evaluated outside its tabulated band at omega = {omega:.6e} rad/s")]
    OutOfBand { omega: f64 },

    #[error("parameters outside the formula's regime: {0}")]
    OutOfRegime(String),

    #[error("pure-state factorization requires kappa_ST = 0 (got {kappa_st:.6e} 1/s)")]
    FactorizationUnavailable { kappa_st: f64 },

    #[error("noise time step {dt:.3e} s exceeds tau_c/20 = {limit:.3e} s")]
    TimeStepTooCoarse { dt: f64, limit: f64 },

    #[error("perturbative window violated: {0}")]
    PerturbativeWindow(String),

    #[error("ensemble of {found} paths is below the required {required}")]
    InsufficientEnsemble { found: usize, required: usize },

    #[error("no linear window with at least {required} samples")]
    NoLinearWindow { required: usize },
}
