use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("window exhausted: requested {requested}, representable range is [{min}, {max}]")]
    Range { requested: i64, min: i64, max: i64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("marker construction failed: {0}")]
    Marker(String),

    #[error("marker separation violated between times {first} and {second}")]
    MarkerSeparation { first: i64, second: i64 },

    #[error("tiling construction failed: {0}")]
    Tiling(String),

    #[error("cover does not contain atoms {0:?}")]
    Uncovered(Vec<usize>),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("map oracle failed: {0}")]
    Oracle(String),

    #[error("search horizon {0} exceeded; adjust the arc radii")]
    Horizon(u64),

    #[error("invariant violated in stage `{stage}`: {detail}")]
    Invariant { stage: String, detail: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
