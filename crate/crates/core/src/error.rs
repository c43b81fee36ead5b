use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{what} supports at most {limit} spins/qubits, got {n}")]
    TooLarge {
        what: &'static str,
        limit: usize,
        n: usize,
    },

    #[error("time {t} outside schedule range [0, {total}]")]
    TimeOutOfRange { t: f64, total: f64 },

    #[error("degenerate counterdiabatic denominator at lambda = {lambda}")]
    DegenerateCd { lambda: f64 },

    #[error("degenerate single-qubit Hamiltonian at qubit {0}: hx and hb are both zero")]
    DegeneratePrep(usize),

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("gate {kind} is not supported for target {target}")]
    UnsupportedGate { kind: String, target: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
