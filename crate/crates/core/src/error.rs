use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    Lattice(String),

    #[error("disorder bound must be non-negative, got {0} MHz")]
    NegativeDisorder(f64),

    #[error("basis index {index} out of range for {num_qubits} qubits")]
    BasisOutOfRange { index: usize, num_qubits: usize },

    #[error("qubit {qubit} out of range for {num_qubits} qubits")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("imbalance undefined for a state with zero excitations")]
    ZeroExcitation,

    #[error("distribution has zero total mass")]
    ZeroMass,

    #[error("Krylov propagator did not converge within {0} substeps")]
    NoConvergence(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sector dimension {dim} exceeds dense limit {limit}")]
    SectorTooLarge { dim: usize, limit: usize },

    #[error("input energies are not sorted")]
    Unsorted,

    #[error("zero variance input")]
    ZeroVariance,

    #[error("only one class present")]
    SingleClass,

    #[error("config error in `{key}`: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
