use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use serde::Serialize;

use crate::json_response;

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    Unprocessable(String),
    #[error("{0}")]
    Internal(String),
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::Conflict(_) => StatusCode::CONFLICT,
            ApiError::Unprocessable(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl From<dembudget::Error> for ApiError {
    fn from(e: dembudget::Error) -> Self {
        use dembudget::Error as E;
        let msg = e.to_string();
        match e.root() {
            E::ModeMismatch { .. } | E::UnsupportedBallot { .. } | E::MixedProfile { .. } => {
                ApiError::Conflict(msg)
            }
            E::InfeasibleBudget { .. } | E::CostOverflow | E::OracleRefused(_) | E::UnknownSection(_) => {
                ApiError::Unprocessable(msg)
            }
            _ => ApiError::BadRequest(msg),
        }
    }
}

impl From<std::io::Error> for ApiError {
    fn from(e: std::io::Error) -> Self {
        ApiError::Internal(format!("storage: {e}"))
    }
}

#[derive(Serialize)]
struct Body<'a> {
    error: &'a str,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if let ApiError::Internal(msg) = &self {
            tracing::error!("{msg}");
        }
        json_response(self.status(), &Body { error: &self.to_string() })
    }
}
