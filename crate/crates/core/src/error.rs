use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("gate {kind} targets repeated qubit {index}")]
    DuplicateTarget { kind: &'static str, index: usize },
    #[error("gate {kind} expects {expected} qubits, got {got}")]
    GateArity {
        kind: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("expected {expected} parameters, got {got}")]
    ParamCount { expected: usize, got: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("state is not normalised (squared norm {0})")]
    NotNormalised(f64),
    #[error("register of {0} qubits exceeds the supported maximum of 20")]
    TooManyQubits(usize),
    #[error("invalid probability {name} = {value}")]
    InvalidProbability { name: &'static str, value: f64 },
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("decision threshold has not been calibrated")]
    Uncalibrated,
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("degenerate data: {0}")]
    Degenerate(String),
    #[error("unsupported model file version {0}")]
    UnsupportedVersion(u32),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
