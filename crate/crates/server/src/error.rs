//! JSON error bodies and the status each error code maps to.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use charonette_core::document::DocumentError;
use charonette_core::export::ExportError;
use charonette_core::workspace::WorkspaceError;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub status: u16,
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status: status.as_u16(),
            code: code.to_string(),
            message: message.into(),
            field: None,
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn not_found(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, message)
    }

    pub fn with_field(mut self, field: impl Into<String>) -> Self {
        self.field = Some(field.into());
        self
    }
}

/// Status for a code produced by the core library.
pub fn status_for(code: &str, not_found: bool) -> StatusCode {
    match code {
        _ if not_found => StatusCode::NOT_FOUND,
        "unknown_corpus" | "unknown_document" => StatusCode::NOT_FOUND,
        "revision_conflict" | "already_exists" => StatusCode::CONFLICT,
        "storage_error" => StatusCode::INTERNAL_SERVER_ERROR,
        "bad_bundle" | "bad_transcript" | "bad_detections" | "bad_timecode" | "xml_parse_error"
        | "schema_violation" | "bad_corpus_name" => StatusCode::BAD_REQUEST,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

fn document_field(e: &DocumentError) -> Option<String> {
    match e {
        DocumentError::At { path, .. } | DocumentError::Invalid { path, .. } => Some(path.clone()),
        _ => None,
    }
}

impl From<WorkspaceError> for ApiError {
    fn from(e: WorkspaceError) -> Self {
        let code = e.code();
        let (not_found, field) = match &e {
            WorkspaceError::Document(d) | WorkspaceError::Export(ExportError::Validation(d)) => {
                (d.is_not_found(), document_field(d))
            }
            WorkspaceError::Export(ExportError::Schema { path, .. }) => (false, Some(path.clone())),
            _ => (false, None),
        };
        ApiError {
            status: status_for(code, not_found).as_u16(),
            code: code.to_string(),
            message: e.to_string(),
            field,
        }
    }
}

impl From<DocumentError> for ApiError {
    fn from(e: DocumentError) -> Self {
        WorkspaceError::from(e).into()
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}
