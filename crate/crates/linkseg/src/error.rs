//! Crate-wide error type.

/// Everything that can go wrong across the analysis pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A constructor or operation was handed an out-of-domain argument.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A line of an input file (config or sample list) failed to parse.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// The segmentation series did not certify its tolerance within the
    /// term budget; the payload size is too small relative to the
    /// distribution's tail.
    #[error(
        "series for payload {payload} bytes did not converge within {n_max} terms; \
         increase the payload, the term budget, or the relative tolerance"
    )]
    Truncation { payload: f64, n_max: u64 },

    /// Offered load at or beyond saturation; the queue has no steady state.
    #[error("offered load a = {load:.6} violates the stability requirement a < 1")]
    Unstable { load: f64 },

    /// Every point of an optimization grid was unstable.
    #[error("no stable payload size in the grid")]
    NoStablePoint,

    /// The convexity index needs at least three stable rows.
    #[error("need at least 3 stable sweep rows, got {0}")]
    TooFewPoints(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
