use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use idwatch::Error;

/// Uniform error body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error_code: String,
    pub message: String,
    #[serde(default)]
    pub details: Value,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                error_code: code.to_string(),
                message: message.into(),
                details: Value::Null,
            },
        }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.body.details = details;
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad-request", message)
    }

    pub fn unknown_project(id: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "unknown-project",
            format!("no project {id:?}"),
        )
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::ValidationFailed(report) => {
                let details = serde_json::to_value(&report).unwrap_or(Value::Null);
                ApiError::new(
                    StatusCode::UNPROCESSABLE_ENTITY,
                    "validation-failed",
                    message,
                )
                .with_details(details)
            }
            Error::NoAssignment { .. } => {
                ApiError::new(StatusCode::CONFLICT, "no-assignment", message)
            }
            Error::DuplicateSubmission { .. } => {
                ApiError::new(StatusCode::CONFLICT, "duplicate-submission", message)
            }
            Error::DocumentNotFound(_) | Error::UnknownDocument { .. } => {
                ApiError::new(StatusCode::NOT_FOUND, "unknown-document", message)
            }
            Error::Json(_) | Error::Parse { .. } | Error::UnknownLabel { .. } => {
                ApiError::new(StatusCode::BAD_REQUEST, "parse-error", message)
            }
            Error::InvalidArgument(_) => ApiError::bad_request(message),
            Error::NoEligibleUnits(_)
            | Error::SingleClass
            | Error::FoldDegeneracy { .. }
            | Error::EmptyVocabulary { .. } => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "degenerate-data", message)
            }
            _ => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}
