use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use quipline_core::analytics::AnalyticsError;
use quipline_core::GameError;
use serde::{Deserialize, Serialize};

use crate::writer::WriteError;

/// HTTP status for each core error. Exhaustive on purpose: a new core error does not
/// compile until it is mapped.
pub fn status_for(e: &GameError) -> StatusCode {
    use GameError::*;
    match e {
        UnknownPlayer(_) | UnknownHeadline(_) | UnknownEdit(_) => StatusCode::NOT_FOUND,
        UnknownCategory(_)
        | NotReplaceableIndex(_)
        | SubstituteEqualsOriginal
        | NotSingleWord
        | BlacklistedWord(_)
        | GradeOutOfRange(_)
        | EmptyText => StatusCode::BAD_REQUEST,
        SuspendedPlayer(_) | SelfRating | SelfFlag => StatusCode::FORBIDDEN,
        CapReached(_)
        | SourceUnavailable(_)
        | DuplicateRating
        | HeadlineNotInPool(_)
        | PairCapReached(_)
        | DuplicateFlag
        | AlreadyRemoved(_)
        | NotRemoved(_)
        | NotFullyRated
        | EmptyOthers => StatusCode::CONFLICT,
        TooFast => StatusCode::TOO_MANY_REQUESTS,
        CorruptLog { .. } => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("{0}")]
    BadRequest(String),
    #[error("missing or expired session token")]
    Unauthorized,
    #[error("admin token required")]
    AdminForbidden,
    #[error("admin endpoints are disabled")]
    AdminDisabled,
    #[error("idempotency key already used for a different request")]
    KeyReused,
    #[error("{0}")]
    Analytics(#[from] AnalyticsError),
    #[error("{0}")]
    Unavailable(String),
}

impl From<WriteError> for ApiError {
    fn from(e: WriteError) -> Self {
        match e {
            WriteError::Game(g) => ApiError::Game(g),
            other => ApiError::Unavailable(other.to_string()),
        }
    }
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::Game(g) => status_for(g),
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::Unauthorized => StatusCode::UNAUTHORIZED,
            ApiError::AdminForbidden => StatusCode::FORBIDDEN,
            ApiError::AdminDisabled => StatusCode::NOT_FOUND,
            ApiError::KeyReused => StatusCode::CONFLICT,
            ApiError::Analytics(_) => StatusCode::CONFLICT,
            ApiError::Unavailable(_) => StatusCode::SERVICE_UNAVAILABLE,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ApiError::Game(g) => g.code(),
            ApiError::BadRequest(_) => "BAD_REQUEST",
            ApiError::Unauthorized => "UNAUTHORIZED",
            ApiError::AdminForbidden => "ADMIN_FORBIDDEN",
            ApiError::AdminDisabled => "ADMIN_DISABLED",
            ApiError::KeyReused => "IDEMPOTENCY_KEY_REUSED",
            ApiError::Analytics(AnalyticsError::InsufficientData) => "INSUFFICIENT_DATA",
            ApiError::Analytics(AnalyticsError::EmptyDataset) => "EMPTY_DATASET",
            ApiError::Analytics(AnalyticsError::Io(_)) => "EXPORT_FAILED",
            ApiError::Unavailable(_) => "UNAVAILABLE",
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            code: self.code().to_string(),
            message: self.to_string(),
        };
        (self.status(), Json(body)).into_response()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use quipline_core::{CapKind, EditId, PlayerId, SourceId};
    use std::collections::BTreeSet;

    fn every_core_error() -> Vec<GameError> {
        use GameError::*;
        vec![
            UnknownPlayer(PlayerId(1)),
            UnknownHeadline(SourceId(1)),
            UnknownEdit(EditId(1)),
            UnknownCategory("x".into()),
            SuspendedPlayer(PlayerId(1)),
            CapReached(CapKind::Edits),
            SourceUnavailable(SourceId(1)),
            NotReplaceableIndex(0),
            SubstituteEqualsOriginal,
            NotSingleWord,
            BlacklistedWord("x".into()),
            GradeOutOfRange(5),
            SelfRating,
            DuplicateRating,
            TooFast,
            HeadlineNotInPool(EditId(1)),
            PairCapReached(10),
            SelfFlag,
            DuplicateFlag,
            AlreadyRemoved(EditId(1)),
            NotRemoved(EditId(1)),
            NotFullyRated,
            EmptyOthers,
            EmptyText,
            CorruptLog {
                seq: 1,
                reason: "x".into(),
            },
        ]
    }

    #[test]
    fn codes_are_distinct_and_statuses_are_errors() {
        let all = every_core_error();
        let codes: BTreeSet<&str> = all.iter().map(GameError::code).collect();
        assert_eq!(codes.len(), all.len());
        for e in &all {
            let s = status_for(e);
            assert!(s.is_client_error() || s.is_server_error(), "{e:?}");
            assert_eq!(ApiError::Game(e.clone()).code(), e.code());
        }
    }

    #[test]
    fn named_mappings() {
        assert_eq!(status_for(&GameError::GradeOutOfRange(5)), StatusCode::BAD_REQUEST);
        assert_eq!(status_for(&GameError::TooFast), StatusCode::TOO_MANY_REQUESTS);
        assert_eq!(status_for(&GameError::CapReached(CapKind::Ratings)), StatusCode::CONFLICT);
        assert_eq!(status_for(&GameError::DuplicateRating), StatusCode::CONFLICT);
        assert_eq!(status_for(&GameError::PairCapReached(10)), StatusCode::CONFLICT);
    }
}
