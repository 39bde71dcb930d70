use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A numeric or structural parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// An input is well-formed but the operation is undefined on it
    /// (empty node set, graph too small, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A graph file could not be parsed.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// An exact computation was asked for beyond its size cap.
    #[error("size {size} exceeds the cap of {cap} for {what}")]
    TooLarge {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    /// A user-supplied corruption callback broke the node-corruption contract.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A corruption exceeded its node budget.
    #[error("budget exceeded: {corrupted} corrupted nodes, budget {budget}")]
    Budget { corrupted: usize, budget: usize },

    /// The coupling precondition TV(D1, D2) <= epsilon does not hold.
    #[error("infeasible coupling: total variation {tv} exceeds mixture weight {epsilon}")]
    Infeasible { tv: f64, epsilon: f64 },

    /// Unknown strategy or estimator name.
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_probability(p: f64, what: &str) -> Result<()> {
    if p.is_finite() && (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{what} must lie in [0, 1], got {p}")))
    }
}
