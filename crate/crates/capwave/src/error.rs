use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("field contains non-finite values")]
    NonFinite,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular kernel: curve points {i} and {j} coincide")]
    SingularKernel { i: usize, j: usize },
    #[error("non-uniform parametrization: max ||z_a| - sigma| / sigma = {0:e}")]
    NonUniform(f64),
    #[error("closure residual {0:e} exceeds tolerance")]
    Closure(f64),
    #[error("chord-arc ratio {ratio} below minimum {min}")]
    ChordArc { ratio: f64, min: f64 },
    #[error("curvature bound exceeded: max |kappa| = {0}")]
    CurvatureBound(f64),
    #[error("gamma_t iteration did not converge after {iterations} iterations (last update ratio {ratio:e})")]
    GammaTNonConvergence { iterations: usize, ratio: f64 },
    #[error("window violation: mass fraction {0:e} outside the window")]
    WindowViolation(f64),
    #[error("history mismatch: {0}")]
    History(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
