use thiserror::Error;

use crate::types::{EditId, PlayerId, SourceId};

/// Which participation cap a request ran into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapKind {
    Edits,
    Ratings,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("unknown player {0}")]
    UnknownPlayer(PlayerId),
    #[error("unknown source headline {0}")]
    UnknownHeadline(SourceId),
    #[error("unknown edited headline {0}")]
    UnknownEdit(EditId),
    #[error("unknown category {0:?}")]
    UnknownCategory(String),
    #[error("player {0} is suspended")]
    SuspendedPlayer(PlayerId),
    #[error("{0:?} cap reached")]
    CapReached(CapKind),
    #[error("source headline {0} is no longer open for editing")]
    SourceUnavailable(SourceId),
    #[error("token index {0} is not replaceable")]
    NotReplaceableIndex(usize),
    #[error("substitute equals the replaced token")]
    SubstituteEqualsOriginal,
    #[error("substitute must be exactly one word")]
    NotSingleWord,
    #[error("substitute {0:?} is blacklisted")]
    BlacklistedWord(String),
    #[error("grade {0} outside the 0-3 scale")]
    GradeOutOfRange(i64),
    #[error("editors cannot rate their own headlines")]
    SelfRating,
    #[error("headline already rated by this player")]
    DuplicateRating,
    #[error("rating submitted before the minimum dwell time")]
    TooFast,
    #[error("edited headline {0} is not in the rating pool")]
    HeadlineNotInPool(EditId),
    #[error("rater already graded the per-editor maximum of {0} headlines")]
    PairCapReached(u32),
    #[error("editors cannot flag their own headlines")]
    SelfFlag,
    #[error("headline already flagged by this player")]
    DuplicateFlag,
    #[error("edited headline {0} was already removed")]
    AlreadyRemoved(EditId),
    #[error("edited headline {0} is not removed")]
    NotRemoved(EditId),
    #[error("headline is not fully rated")]
    NotFullyRated,
    #[error("consensus needs at least one other grade")]
    EmptyOthers,
    #[error("headline text is empty")]
    EmptyText,
    #[error("corrupt event log at seq {seq}: {reason}")]
    CorruptLog { seq: u64, reason: String },
}

impl GameError {
    /// Stable machine-readable code used by API clients.
    pub fn code(&self) -> &'static str {
        match self {
            GameError::UnknownPlayer(_) => "UNKNOWN_PLAYER",
            GameError::UnknownHeadline(_) => "UNKNOWN_HEADLINE",
            GameError::UnknownEdit(_) => "UNKNOWN_EDIT",
            GameError::UnknownCategory(_) => "UNKNOWN_CATEGORY",
            GameError::SuspendedPlayer(_) => "SUSPENDED_PLAYER",
            GameError::CapReached(_) => "CAP_REACHED",
            GameError::SourceUnavailable(_) => "SOURCE_UNAVAILABLE",
            GameError::NotReplaceableIndex(_) => "NOT_REPLACEABLE_INDEX",
            GameError::SubstituteEqualsOriginal => "SUBSTITUTE_EQUALS_ORIGINAL",
            GameError::NotSingleWord => "NOT_SINGLE_WORD",
            GameError::BlacklistedWord(_) => "BLACKLISTED_WORD",
            GameError::GradeOutOfRange(_) => "GRADE_OUT_OF_RANGE",
            GameError::SelfRating => "SELF_RATING",
            GameError::DuplicateRating => "DUPLICATE_RATING",
            GameError::TooFast => "TOO_FAST",
            GameError::HeadlineNotInPool(_) => "HEADLINE_NOT_IN_POOL",
            GameError::PairCapReached(_) => "PAIR_CAP_REACHED",
            GameError::SelfFlag => "SELF_FLAG",
            GameError::DuplicateFlag => "DUPLICATE_FLAG",
            GameError::AlreadyRemoved(_) => "ALREADY_REMOVED",
            GameError::NotRemoved(_) => "NOT_REMOVED",
            GameError::NotFullyRated => "NOT_FULLY_RATED",
            GameError::EmptyOthers => "EMPTY_OTHERS",
            GameError::EmptyText => "EMPTY_TEXT",
            GameError::CorruptLog { .. } => "CORRUPT_LOG",
        }
    }

    pub(crate) fn corrupt(seq: u64, reason: impl Into<String>) -> Self {
        GameError::CorruptLog {
            seq,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = GameError> = std::result::Result<T, E>;
