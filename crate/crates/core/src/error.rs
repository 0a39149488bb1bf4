use thiserror::Error;

/// Errors produced by the coder, the codecs and the container format.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A code triple that violates `p >= 1`, `c + p <= N` or `1 <= N <= L`.
    #[error("invalid code triple: cumulative={cumulative}, mass={mass}, precision={precision}")]
    InvalidTriple {
        cumulative: u64,
        mass: u64,
        precision: u64,
    },

    /// Decoding was asked to advance past an interval that does not contain
    /// the index currently held by the state.
    #[error("index {index} is outside the decode interval [{start}, {end})")]
    IndexOutsideInterval { index: u64, start: u64, end: u64 },

    /// Index passed to a reverse lookup was not below the total count.
    #[error("index {index} out of range for total {total}")]
    IndexOutOfRange { index: u64, total: u64 },

    #[error("symbol not found")]
    SymbolNotFound,

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Checksum { stored: u32, computed: u32 },

    /// JSON input that is not an array of flat objects.
    #[error("ingestion error at line {line}, column {column}: {message}")]
    Ingest {
        message: String,
        line: usize,
        column: usize,
    },

    #[error("invalid benchmark configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
