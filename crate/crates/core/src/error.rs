use thiserror::Error;

/// Errors raised across the tomography pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid Pauli label character {ch:?} at position {position}")]
    PauliParse { position: usize, ch: char },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("{n} qubits exceeds the dense-matrix limit of {limit}")]
    Capacity { n: usize, limit: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("POVM is already linearly independent (rank {0})")]
    AlreadyIndependent(usize),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid noise matrix: {0}")]
    InvalidNoise(String),

    /// One of the three sufficient conditions for simultaneous tomography fails.
    #[error("condition {number} violated: {detail}")]
    Condition { number: u8, detail: String },

    #[error("no nonzero state coefficient found (support is empty)")]
    EmptySupport,

    #[error("linear system for the noise matrix is singular; POVM appears dependent")]
    PovmDependence,

    #[error("pivot denominator {0:e} below tolerance")]
    Pivot(f64),

    #[error("unitary pool cannot realize the eliminator (residual {residual:e})")]
    InsufficientPool { residual: f64 },

    #[error("estimated support is empty; increase shots or lower beta")]
    SupportEstimate,

    #[error("ratio denominator {value:e} below conditioning bound {bound:e}")]
    Conditioning { value: f64, bound: f64 },

    #[error("invalid shot budget parameter: {0}")]
    Budget(String),

    #[error("step {step}: {source}")]
    Step { step: u8, source: Box<Error> },

    #[error("both purity branches are valid states; gauge sign is ambiguous")]
    AmbiguousSign,

    #[error("purity {nu} must lie in ({min}, 1]")]
    Purity { nu: f64, min: f64 },

    #[error("probe state carries no information about the gauge")]
    UninformativeProbe,

    #[error("gauge relation inconsistent with data (residual {residual:e})")]
    Inconsistent { residual: f64 },

    #[error("gauge equation is degenerate: {0}")]
    Degenerate(String),

    #[error("prior assumption violated: {0}")]
    PriorViolated(String),

    #[error("insufficient prior information: {0}")]
    InsufficientPrior(String),

    #[error("flip probability of qubit {qubit} is indistinguishable from 1/2")]
    NearSymmetric { qubit: usize },

    #[error("gauge-fixed reconstruction is not physical: {0}")]
    GaugeInconsistent(String),

    #[error("configuration error at {path}: {message}")]
    Config { path: String, message: String },
}

impl Error {
    pub(crate) fn at_step(self, step: u8) -> Self {
        Error::Step {
            step,
            source: Box::new(self),
        }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Strips any step tag and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Step { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
