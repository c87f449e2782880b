use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("spectral parameter must lie in the upper half plane, got Im z = {0}")]
    NotUpperHalfPlane(f64),

    #[error(
        "fixed-point solver did not converge at z = {re} + {im}i after {iterations} iterations \
         (residual {residual:e})"
    )]
    NoConvergence {
        re: f64,
        im: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("quadrature failed: achieved residual {residual:e} exceeds tolerance {tolerance:e}")]
    Quadrature { residual: f64, tolerance: f64 },

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigensolver did not converge")]
    Eigensolver,

    #[error("eigenvalue collision between indices {0} and {1}")]
    Collision(usize, usize),

    #[error("substep {step:e} exceeds the stability limit {limit:e}")]
    StabilityGuard { step: f64, limit: f64 },

    #[error("configuration space of size {size} exceeds the cap {cap}")]
    SpaceTooLarge { size: u128, cap: usize },

    #[error("coincident eigenvalues at sites {0} and {1}")]
    CoincidentEigenvalues(usize, usize),

    #[error("integrator step underflow at time {time:e} (step {step:e})")]
    StepUnderflow { time: f64, step: f64 },

    #[error("spectral parameter within {distance:e} of eigenvalue {index}")]
    NearEigenvalue { index: usize, distance: f64 },

    #[error("{particles} particles exceed the perfect-matching limit of {limit}")]
    TooManyParticles { particles: usize, limit: usize },

    #[error("empty sample batch")]
    EmptyBatch,

    #[error("point {0} lies outside (-2, 2)")]
    OutsideSupport(f64),

    #[error("rejection sampler exhausted {0} proposals")]
    RejectionExhausted(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
