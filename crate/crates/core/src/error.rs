use std::path::PathBuf;

use thiserror::Error;

use crate::ontology::ValidationReport;

pub type Result<T, E = CoreError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid language code {0:?}: expected two lowercase ASCII letters")]
    InvalidLanguage(String),

    #[error("invalid {kind} id {value:?}: {reason}")]
    InvalidId {
        kind: &'static str,
        value: String,
        reason: &'static str,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema error{}: {message}", field.as_ref().map(|f| format!(" in field `{f}`")).unwrap_or_default())]
    Schema {
        field: Option<String>,
        message: String,
    },

    #[error("sector {0:?} appears in more than one input ontology")]
    DuplicateSector(String),

    #[error("ontology for sector(s) {sectors} has {} validation error(s)", report.error_count())]
    InvalidInput {
        sectors: String,
        report: ValidationReport,
    },

    #[error("unknown expression {0:?}")]
    UnknownExpression(String),

    #[error("duplicate service id {0:?}")]
    DuplicateServiceId(String),

    #[error("unknown service id {0:?}")]
    UnknownServiceId(String),

    #[error("invalid service record {id:?}: {reason}")]
    InvalidRecord { id: String, reason: String },

    #[error("query is empty")]
    EmptyQuery,

    #[error("query is {len} characters long; the limit is {max}")]
    QueryTooLong { len: usize, max: usize },

    #[error("invalid user id {0:?}")]
    InvalidUserId(String),

    #[error("event for user {user:?} is older than the last recorded event")]
    NonMonotonicTimestamp { user: String },

    #[error("event belongs to user {event_user:?}, not {profile_user:?}")]
    ForeignEvent {
        profile_user: String,
        event_user: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}:{column}: {message}", path.display())]
    Journal {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
}

impl CoreError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CoreError::Io {
            path: path.into(),
            source,
        }
    }

    /// Classifies a serde_json failure into a syntax or schema error.
    pub(crate) fn from_json(err: serde_json::Error) -> Self {
        use serde_json::error::Category;
        match err.classify() {
            Category::Data => {
                let message = err.to_string();
                CoreError::Schema {
                    field: backticked(&message),
                    message,
                }
            }
            _ => CoreError::Parse {
                line: err.line(),
                column: err.column(),
                message: err.to_string(),
            },
        }
    }
}

/// First `name` quoted in backticks, which is how serde names unknown and missing fields.
fn backticked(message: &str) -> Option<String> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(message[start..start + len].to_string())
}
