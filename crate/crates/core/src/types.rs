//! Domain types shared by every part of the game.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::GameError;

pub type Timestamp = DateTime<Utc>;

/// Number of grades that completes an edited headline.
pub const RATINGS_TO_COMPLETE: usize = 5;

macro_rules! id_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(
            Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u64);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_newtype!(
    /// Identifier of a registered player.
    PlayerId
);
id_newtype!(
    /// Identifier of an ingested source headline.
    SourceId
);
id_newtype!(
    /// Identifier of an edited (micro-edited) headline.
    EditId
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Politics,
    Worldnews,
    Technology,
    Sports,
    Entertainment,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Politics,
        Category::Worldnews,
        Category::Technology,
        Category::Sports,
        Category::Entertainment,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Politics => "politics",
            Category::Worldnews => "worldnews",
            Category::Technology => "technology",
            Category::Sports => "sports",
            Category::Entertainment => "entertainment",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        match key.as_str() {
            "politics" => Ok(Category::Politics),
            "worldnews" | "world" => Ok(Category::Worldnews),
            "technology" | "tech" => Ok(Category::Technology),
            "sports" | "sport" => Ok(Category::Sports),
            "entertainment" => Ok(Category::Entertainment),
            _ => Err(GameError::UnknownCategory(s.to_string())),
        }
    }
}

/// A funniness grade on the 0 (not funny at all) to 3 (very funny) scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Grade(u8);

impl Grade {
    pub const MAX: u8 = 3;

    pub fn new(value: u8) -> Result<Self, GameError> {
        if value <= Self::MAX {
            Ok(Grade(value))
        } else {
            Err(GameError::GradeOutOfRange(i64::from(value)))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for Grade {
    type Error = GameError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Grade::new(value)
    }
}

impl From<Grade> for u8 {
    fn from(g: Grade) -> u8 {
        g.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceStatus {
    Available,
    Exhausted,
    Retired,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceHeadline {
    pub id: SourceId,
    pub tokens: Vec<String>,
    pub category: Category,
    pub source_name: String,
    pub article_url: String,
    pub published_at: Timestamp,
    pub replaceable: BTreeSet<usize>,
    pub status: SourceStatus,
    pub ingested_at: Timestamp,
    /// Edits submitted against this headline.
    pub edit_count: u32,
    /// Distinct players who skipped it.
    pub skip_count: u32,
}

impl SourceHeadline {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditState {
    InPool,
    FullyRated,
    FlaggedRemoved,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingEvent {
    pub rater_id: PlayerId,
    pub grade: Grade,
    pub served_at: Timestamp,
    pub submitted_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditedHeadline {
    pub id: EditId,
    pub source_id: SourceId,
    pub editor_id: PlayerId,
    pub replaced_index: usize,
    pub substitute: String,
    pub created_at: Timestamp,
    pub ratings: Vec<RatingEvent>,
    pub state: EditState,
    pub flaggers: BTreeSet<PlayerId>,
    /// Position in the completion order, set when the fifth grade lands.
    pub completion_seq: Option<u64>,
    pub completed_at: Option<Timestamp>,
}

impl EditedHeadline {
    pub fn grade_sum(&self) -> u32 {
        self.ratings.iter().map(|r| u32::from(r.grade.value())).sum()
    }

    /// Mean of the grades received so far, `None` when unrated.
    pub fn mean_grade(&self) -> Option<f64> {
        if self.ratings.is_empty() {
            None
        } else {
            Some(f64::from(self.grade_sum()) / self.ratings.len() as f64)
        }
    }

    pub fn has_rater(&self, player: PlayerId) -> bool {
        self.ratings.iter().any(|r| r.rater_id == player)
    }

    /// Grades of every rater other than `player`.
    pub fn grades_excluding(&self, player: PlayerId) -> Vec<Grade> {
        self.ratings
            .iter()
            .filter(|r| r.rater_id != player)
            .map(|r| r.grade)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Standing {
    Active,
    Warned,
    Suspended,
}

/// A headline a player can skip: either an editable source or an edit in the rating pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "type", content = "id", rename_all = "snake_case")]
pub enum HeadlineRef {
    Source(SourceId),
    Edit(EditId),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Player {
    pub id: PlayerId,
    pub display_name: String,
    pub joined_at: Timestamp,
    pub edit_count: u32,
    pub rating_count: u32,
    pub skipped: BTreeSet<HeadlineRef>,
    pub standing: Standing,
}

impl Player {
    pub fn is_suspended(&self) -> bool {
        self.standing == Standing::Suspended
    }
}
