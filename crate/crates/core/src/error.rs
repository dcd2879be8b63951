use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("need at least two edges, got N = {0}")]
    TooFewEdges(usize),
    #[error("vertex strength alpha = 0 (Kirchhoff vertex) is not supported")]
    ZeroAlpha,
    #[error("nonlinearity power must be positive and finite, got p = {0}")]
    InvalidPower(f64),
    #[error("branch K = {k} out of range, must be at most floor((N-1)/2) = {max}")]
    BranchOutOfRange { k: usize, max: usize },
    #[error("omega = {omega} is not above the existence threshold {threshold} of branch K = {k}")]
    BelowThreshold {
        omega: f64,
        threshold: f64,
        k: usize,
    },
    #[error("invalid tolerance {name} = {value}, must be positive")]
    InvalidTolerance { name: &'static str, value: f64 },
    #[error("scale factor must be positive, got {0}")]
    InvalidScale(f64),
    #[error("spectral parameter lambda = {lambda} must lie below omega = {omega}")]
    LambdaAboveOmega { lambda: f64, omega: f64 },
    #[error("decaying solution vanishes at x = {x}; log-derivative undefined")]
    ZeroDenominator { x: f64 },
    #[error("no sign change found while bracketing {what} on [{lo}, {hi}]")]
    BracketFailure {
        what: &'static str,
        lo: f64,
        hi: f64,
    },
    #[error("decaying solution has no zero for lambda = {lambda} (lambda <= lambda0 = {lambda0})")]
    NoZero { lambda: f64, lambda0: f64 },
    #[error("vertex values disagree: {0:?}")]
    VertexMismatch(Vec<f64>),
    #[error("edge length {length} too short, need at least {required}")]
    DomainTooShort { length: f64, required: f64 },
    #[error("need at least {required} nodes per edge, got {got}")]
    TooFewNodes { got: usize, required: usize },
    #[error("shift {0} hits a (numerically) singular pivot")]
    SingularShift(f64),
    #[error("{count} eigenvalues lie below {upper}, more than the requested maximum {max}")]
    MaxCountExceeded {
        count: usize,
        upper: f64,
        max: usize,
    },
    #[error("solver failed: {0}")]
    SolverFailure(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("output error: {0}")]
    Output(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
