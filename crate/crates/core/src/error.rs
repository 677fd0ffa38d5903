use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("{what}: row {row} sums to {sum} (expected 1)")]
    NotStochastic { what: String, row: usize, sum: f64 },

    #[error("{what}: negative entry {value} at index {index}")]
    NegativeProbability { what: String, index: usize, value: f64 },

    #[error("unreachable observation: P(Z={z} | X={x}) = 0")]
    UnreachableObservation { x: usize, z: usize },

    #[error("zero-mass slice {var}={value}")]
    ZeroMassSlice { var: String, value: usize },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("information quantity {0} is below the round-off floor")]
    NegativeInformation(f64),

    #[error("Blahut-Arimoto did not converge: gap {gap} after {iterations} iterations")]
    NoConvergence { gap: f64, iterations: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("typical set is empty: epsilon {epsilon} too small for n = {n}")]
    EmptyTypicalSet { n: usize, epsilon: f64 },

    #[error("n = {n} exceeds the enumeration bound n_max = {n_max}")]
    EnumerationBound { n: usize, n_max: usize },

    #[error("code construction failed: {0}")]
    Construction(String),

    #[error("bin-decoding ambiguity rate {rate} exceeds threshold {threshold}")]
    Ambiguity { rate: f64, threshold: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
