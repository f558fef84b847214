//! Lab sessions: one optimizer run where each generation's fitness values
//! are race speeds entered by an operator.
//!
//! Every state change is an event appended to a per-session journal, and a
//! session is rebuilt on start-up by replaying its journal from the seed.

mod journal;
mod model;
mod store;

pub use journal::{read_journal, recover, JournalReader, Recovered};
pub use model::{
    compute_speed, CreateRequest, DimensionView, EventBody, GenerationRecord, GenerationSummary, JournalEvent,
    MeasurementInput, MeasurementRecord, RobotView, Session, SessionStatus, SessionSummary, SessionView,
    DEFAULT_MAX_GENERATIONS,
};
pub use store::{RecoveryReport, SessionStore};

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("session `{0}` not found")]
    NotFound(String),
    #[error("{0}")]
    InvalidRequest(String),
    #[error("invalid `{field}`: {message}")]
    InvalidConfig { field: String, message: String },
    #[error("{0}")]
    StateConflict(String),
    #[error("generation is incomplete; missing measurements for robots {missing:?}")]
    Incomplete { missing: Vec<usize> },
    #[error("unknown export format `{0}`")]
    UnknownFormat(String),
    #[error("journal: {0}")]
    Journal(String),
    #[error("journal io: {0}")]
    Io(#[from] std::io::Error),
}

impl SessionError {
    /// Machine-readable error code.
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::NotFound(_) => "not_found",
            SessionError::InvalidRequest(_) => "invalid_request",
            SessionError::InvalidConfig { .. } => "invalid_config",
            SessionError::StateConflict(_) => "state_conflict",
            SessionError::Incomplete { .. } => "incomplete_generation",
            SessionError::UnknownFormat(_) => "unknown_format",
            SessionError::Journal(_) => "journal_error",
            SessionError::Io(_) => "io_error",
        }
    }

    pub fn body(&self) -> ErrorBody {
        ErrorBody {
            code: self.code(),
            message: self.to_string(),
            missing: match self {
                SessionError::Incomplete { missing } => Some(missing.clone()),
                _ => None,
            },
            field: match self {
                SessionError::InvalidConfig { field, .. } => Some(field.clone()),
                _ => None,
            },
        }
    }
}

impl From<lightswim_core::Error> for SessionError {
    fn from(e: lightswim_core::Error) -> Self {
        use lightswim_core::Error as E;
        match e {
            E::InvalidConfig { field, message } => SessionError::InvalidConfig { field: field.to_string(), message },
            E::InvalidSpace(m) => SessionError::InvalidConfig { field: "space".into(), message: m },
            E::InvalidFitness(_) | E::BatchSizeMismatch { .. } | E::EmptyInput(_) => {
                SessionError::InvalidRequest(e.to_string())
            }
            E::SearchSpaceExhausted | E::PoolTooSmall(_) | E::InsufficientHistory(_) | E::StateConflict(_) => {
                SessionError::StateConflict(e.to_string())
            }
        }
    }
}

/// JSON error document.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub missing: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}
