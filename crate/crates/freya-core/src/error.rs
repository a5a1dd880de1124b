//! Crate-wide error type.
//!
//! Configuration and validation problems are reported through [`Error`]
//! rather than panics so that callers (CLI, harness) can map them to
//! exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter failed validation (dimension, range, sign, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A task was assigned to a worker that is still busy.
    #[error("worker {worker} is busy and cannot accept a new task")]
    WorkerBusy { worker: usize },

    /// Every worker in the current phase has infinite task time, so the
    /// collection can never finish.
    #[error("no worker with finite task time; collection cannot make progress")]
    NoFiniteWorker,

    /// A dynamic worker-time schedule has no entry for the requested iteration.
    #[error("worker {worker} has no schedule entry for iteration {iteration}")]
    MissingScheduleEntry { worker: usize, iteration: i64 },

    /// A component or worker index was out of range.
    #[error("index {index} out of range for {what} of size {size}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },

    /// Importance sampling was requested but the objective carries no
    /// per-component smoothness constants.
    #[error("importance sampling requires per-component smoothness hints")]
    MissingSmoothnessHints,

    /// A CSV dataset row could not be parsed; `line` is 1-based and counts
    /// the header if one is present.
    #[error("csv error at line {line}: {message}")]
    CsvFormat { line: u64, message: String },

    /// The dataset contained no rows.
    #[error("dataset is empty")]
    EmptyDataset,

    /// An experiment configuration file was malformed.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
