use thiserror::Error;

/// Errors raised by the simulator.
///
/// Numeric payloads are reported as `f64` regardless of the scalar type the
/// computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("zero or non-positive detuning: {0}")]
    ZeroDetuning(String),

    #[error("dispersive condition violated: |delta|/g = {ratio:.3} below threshold {threshold}")]
    DispersiveViolation { ratio: f64, threshold: f64 },

    #[error("non-positive input `{name}` = {value}")]
    NonPositiveInput { name: &'static str, value: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("basis dimension {dim} exceeds cap {cap}")]
    SizeOverflow { dim: u128, cap: usize },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("variational optimization did not converge (best energy {energy}, gradient norm {grad_norm:e})")]
    OptimizerNoConvergence { energy: f64, grad_norm: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state lives in the wrong excitation sector: {0}")]
    SectorMismatch(String),

    #[error("variational norm collapsed to {0:e}")]
    DegenerateNorm(f64),

    #[error("quasiparticle residue {0:e} too small for a finite preparation time")]
    ZeroResidue(f64),

    #[error("integrator norm drift {drift:e} exceeds bound {bound:e}; reduce the time step")]
    StepTooLarge { drift: f64, bound: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
