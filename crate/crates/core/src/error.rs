use thiserror::Error;

/// Error type shared by all toolkit modules.
///
/// Numeric diagnostics are carried as `f64` regardless of the working
/// scalar.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian: max |M - M^H| entry is {violation:.3e}")]
    NotHermitian { violation: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("state must have unit trace: got {trace:.17}")]
    TraceNotOne { trace: f64 },

    #[error("operands belong to different Jordan algebras")]
    AlgebraMismatch,

    #[error("eigenvalue crossing along the family at g = {g:.6}: gap {gap:.3e}")]
    EigenvalueCrossing { g: f64, gap: f64 },

    #[error("spectrum is not simple: minimal gap {gap:.3e}")]
    DegenerateSpectrum { gap: f64 },

    #[error("element is not in the kernel: residual {residual:.3e}")]
    NotInKernel { residual: f64 },

    #[error("matrix does not satisfy the Leibniz rule: relative residual {residual:.3e}")]
    NotADerivation { residual: f64 },

    #[error("observables {first} and {second} do not commute: commutator norm {violation:.3e}")]
    NotCommuting {
        first: usize,
        second: usize,
        violation: f64,
    },

    #[error("outside the truncation validity region: |alpha|^2 max(1,<n>)/hbar = {value:.3} > {bound:.3}")]
    TruncationViolation { value: f64, bound: f64 },

    #[error("wavepacket support touches the grid boundary (aliasing)")]
    SupportTouchesBoundary,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
