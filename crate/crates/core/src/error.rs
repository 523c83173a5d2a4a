use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{what} supports at most {cap} qubits, got {got}")]
    QubitCapExceeded { what: &'static str, cap: usize, got: usize },
    #[error("invalid Pauli channel: {0}")]
    InvalidChannel(String),
    #[error("channel is not CPTP (Choi min eigenvalue {cp_margin:e}, TP deviation {tp_deviation:e})")]
    NotCptp { cp_margin: f64, tp_deviation: f64 },
    #[error("matrix is singular")]
    Singular,
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("invalid decoherence parameters: {0}")]
    InvalidDecoherence(String),
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("gate at layer {layer}, position {index} has no noise attached")]
    MissingNoise { layer: usize, index: usize },
    #[error("expectation {0} outside [-1, 1]")]
    ExpectationOutOfRange(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("regression is rank deficient{}", .layer.map(|l| format!(" at layer {l}")).unwrap_or_default())]
    RankDeficient { layer: Option<usize> },
    #[error("sampling overhead {0:e} exceeds guard")]
    OverheadTooLarge(f64),
    #[error("gate at layer {layer}, position {index} has no calibrated noise model")]
    Uncalibrated { layer: usize, index: usize },
}

pub type Result<T, E = CoreError> = std::result::Result<T, E>;
