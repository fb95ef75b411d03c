//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by any layer of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid arm set: {0}")]
    InvalidArmSet(String),

    #[error("opinion value {value} is not in the arm set")]
    ArmNotInSet { value: i64 },

    #[error("arm index {index} out of range for {arms} arms")]
    ArmIndexOutOfRange { index: usize, arms: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("row {row}: {message}")]
    InvalidRecord { row: usize, message: String },

    #[error("missing column {column:?}")]
    MissingColumn { column: String },

    #[error("row {row}, column {column:?}: {message}")]
    ParseField {
        row: usize,
        column: String,
        message: String,
    },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("at least {needed} runs required, got {got}")]
    InsufficientRuns { needed: usize, got: usize },

    #[error("invalid manifest: {0}")]
    InvalidManifest(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("unsupported snapshot version {found} (expected {expected})")]
    SnapshotVersion { found: u32, expected: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("manifest parse: {0}")]
    ManifestParse(#[from] toml::de::Error),

    #[error("serialization: {0}")]
    Serialization(#[from] serde_json::Error),
}

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;
