use std::path::{Path, PathBuf};

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use ontoserv_core::ontology::ValidationReport;
use ontoserv_core::CoreError;
use serde::Serialize;

/// Failures while starting the engine or running a CLI command.
#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("{}: {message}", path.display())]
    Config { path: PathBuf, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Load {
        path: PathBuf,
        #[source]
        source: CoreError,
    },

    #[error("{}: {} validation error(s)\n{report}", path.display(), report.error_count())]
    Invalid { path: PathBuf, report: ValidationReport },

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl GatewayError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        GatewayError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn load(path: &Path, source: CoreError) -> Self {
        GatewayError::Load {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Error body shared by every endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                code,
                message: message.into(),
            },
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad-request", message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not-found", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> Self {
        let message = e.to_string();
        let (status, code) = match e {
            CoreError::EmptyQuery => (StatusCode::BAD_REQUEST, "empty-query"),
            CoreError::QueryTooLong { .. } => (StatusCode::BAD_REQUEST, "query-too-long"),
            CoreError::InvalidLanguage(_) => (StatusCode::BAD_REQUEST, "invalid-language"),
            CoreError::InvalidUserId(_) => (StatusCode::BAD_REQUEST, "invalid-user"),
            CoreError::InvalidRecord { .. } | CoreError::InvalidId { .. } => (StatusCode::BAD_REQUEST, "invalid-record"),
            CoreError::Parse { .. } | CoreError::Schema { .. } => (StatusCode::BAD_REQUEST, "bad-request"),
            CoreError::UnknownServiceId(_) | CoreError::UnknownExpression(_) => (StatusCode::NOT_FOUND, "not-found"),
            CoreError::DuplicateServiceId(_) => (StatusCode::CONFLICT, "conflict"),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        ApiError::new(status, code, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}
