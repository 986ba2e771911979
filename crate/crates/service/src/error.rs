use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use serde::{Deserialize, Serialize};
use xca_core::loader::LoadError;

pub const BAD_REQUEST: &str = "E_BAD_REQUEST";

/// Body of every non-2xx response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub status: u16,
    pub code: String,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, detail: impl Into<String>) -> Self {
        Self {
            status: status.as_u16(),
            code: code.to_owned(),
            detail: detail.into(),
            location: None,
        }
    }

    pub fn at(mut self, location: impl Into<String>) -> Self {
        self.location = Some(location.into());
        self
    }

    pub fn bad_request(detail: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, BAD_REQUEST, detail)
    }

    pub fn not_found() -> Self {
        Self::new(StatusCode::NOT_FOUND, BAD_REQUEST, "no such resource")
    }

    /// Malformed JSON is a 400; anything that parsed but does not fit the
    /// profile schema or its invariants is a 422.
    pub fn from_load(err: &LoadError) -> Self {
        if err.is_syntax() {
            return Self::bad_request(err.to_string());
        }
        let issues = err.issues();
        let first = issues.iter().find(|i| i.is_error()).unwrap_or(&issues[0]);
        let detail = issues.iter().map(|i| i.message.as_str()).collect::<Vec<_>>().join("; ");
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, first.code.as_str(), detail).at(first.location.clone())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        crate::json_response(status, &serde_json::to_value(&self).expect("error serializes"))
    }
}
