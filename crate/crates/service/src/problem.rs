use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use serde::{Deserialize, Serialize};
use veriloop_core::session::error_message;
use veriloop_core::Error;

/// Error body shared by every endpoint, served as `application/problem+json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Problem {
    #[serde(skip, default = "internal_status")]
    pub status: StatusCode,
    pub kind: String,
    pub message: String,
    pub candidates: Vec<u32>,
}

fn internal_status() -> StatusCode {
    StatusCode::INTERNAL_SERVER_ERROR
}

impl Problem {
    pub fn new(status: StatusCode, kind: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            kind: kind.to_string(),
            message: message.into(),
            candidates: Vec::new(),
        }
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "NotFound", message)
    }

    pub fn queue_full() -> Self {
        Self::new(StatusCode::CONFLICT, "QueueFull", "too many prompts are waiting for this session")
    }

    pub fn internal(e: impl std::fmt::Display) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string())
    }

    /// Input errors during session creation are all 400s.
    pub fn bad_request(e: Error) -> Self {
        let mut p = Problem::from(e);
        p.status = StatusCode::BAD_REQUEST;
        p
    }
}

pub fn status_for(e: &Error) -> StatusCode {
    match e {
        Error::InvalidImage(_) | Error::DimensionMismatch { .. } | Error::UnreadableFile { .. } | Error::Json(_) => {
            StatusCode::BAD_REQUEST
        }
        Error::NothingToUndo | Error::NothingToRedo | Error::SessionFull(_) => StatusCode::CONFLICT,
        Error::UnknownObjectIndex(_)
        | Error::ObjectNotLive(_)
        | Error::EmptyMask
        | Error::MaskCoversImage
        | Error::UnknownColorName(_)
        | Error::EmptyText
        | Error::EmptyPrompt
        | Error::UnrecognizedAction { .. }
        | Error::MissingParameter(_)
        | Error::AmbiguousReference { .. }
        | Error::NoMatchingObject { .. } => StatusCode::UNPROCESSABLE_ENTITY,
        Error::BackendUnavailable(_)
        | Error::BackendRefused { .. }
        | Error::UnmatchedScriptRequest(_)
        | Error::MissingIndexInResponse(_)
        | Error::MalformedResponse(_) => StatusCode::BAD_GATEWAY,
        Error::SegmentationUnavailable(_) => StatusCode::SERVICE_UNAVAILABLE,
        Error::PreconditionViolation(_) | Error::MissingFixture(_) | Error::Config(_) | Error::Io(_) => {
            StatusCode::INTERNAL_SERVER_ERROR
        }
    }
}

impl From<Error> for Problem {
    fn from(e: Error) -> Self {
        Self {
            status: status_for(&e),
            kind: e.kind().to_string(),
            message: error_message(&e),
            candidates: e.candidates().to_vec(),
        }
    }
}

impl IntoResponse for Problem {
    fn into_response(self) -> Response {
        let body = serde_json::to_vec(&self).unwrap_or_default();
        (self.status, [(header::CONTENT_TYPE, "application/problem+json")], body).into_response()
    }
}
