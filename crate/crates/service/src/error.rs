use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use hitailor_core::api::ApiError;
use hitailor_core::importer::{ImportError, SchemaError};
use hitailor_core::locator::LocatorError;
use hitailor_core::recommend::RecommendError;
use hitailor_core::transform::{ScriptError, TransformError};
use hitailor_core::visgen::VisError;

/// An [`ApiError`] on its way out as an HTTP response.
#[derive(Debug)]
pub struct Failure(pub ApiError);

impl IntoResponse for Failure {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.0.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self.0)).into_response()
    }
}

macro_rules! failure_from {
    ($($t:ty),*) => {
        $(impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure(e.into())
            }
        })*
    };
}

failure_from!(ApiError, ImportError, LocatorError, TransformError, ScriptError, RecommendError, VisError);

impl From<SchemaError> for Failure {
    fn from(e: SchemaError) -> Self {
        Failure(ImportError::from(e).into())
    }
}

pub type ApiResult<T> = Result<T, Failure>;
