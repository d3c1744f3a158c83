//! Append-only game events and their newline-delimited JSON encoding.

use std::collections::BTreeSet;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::types::{Category, EditId, Grade, HeadlineRef, PlayerId, SourceId, Timestamp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameEvent {
    pub seq: u64,
    pub at: Timestamp,
    /// Client idempotency key of the command that produced this event.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    #[serde(flatten)]
    pub payload: EventPayload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventPayload {
    PlayerRegistered {
        player: PlayerId,
        display_name: String,
    },
    HeadlineIngested {
        source: SourceId,
        tokens: Vec<String>,
        category: Category,
        source_name: String,
        article_url: String,
        published_at: Timestamp,
        replaceable: BTreeSet<usize>,
    },
    EditSubmitted {
        edit: EditId,
        player: PlayerId,
        source: SourceId,
        index: usize,
        substitute: String,
    },
    RatingSubmitted {
        edit: EditId,
        rater: PlayerId,
        grade: Grade,
        served_at: Timestamp,
    },
    HeadlineFlagged {
        edit: EditId,
        flagger: PlayerId,
    },
    HeadlineSkipped {
        player: PlayerId,
        target: HeadlineRef,
    },
    PlayerWarned {
        player: PlayerId,
        reason: String,
    },
    PlayerSuspended {
        player: PlayerId,
        reason: String,
    },
    HeadlineReinstated {
        edit: EditId,
    },
}

impl EventPayload {
    pub fn kind(&self) -> &'static str {
        match self {
            EventPayload::PlayerRegistered { .. } => "player_registered",
            EventPayload::HeadlineIngested { .. } => "headline_ingested",
            EventPayload::EditSubmitted { .. } => "edit_submitted",
            EventPayload::RatingSubmitted { .. } => "rating_submitted",
            EventPayload::HeadlineFlagged { .. } => "headline_flagged",
            EventPayload::HeadlineSkipped { .. } => "headline_skipped",
            EventPayload::PlayerWarned { .. } => "player_warned",
            EventPayload::PlayerSuspended { .. } => "player_suspended",
            EventPayload::HeadlineReinstated { .. } => "headline_reinstated",
        }
    }
}

/// One event as a single JSON line, without the trailing newline.
pub fn encode_line(event: &GameEvent) -> String {
    serde_json::to_string(event).expect("game events always serialize")
}

pub fn decode_line(line: &str) -> serde_json::Result<GameEvent> {
    serde_json::from_str(line)
}

/// Encodes a whole log, one event per line.
pub fn encode_log(events: &[GameEvent]) -> String {
    let mut out = String::new();
    for event in events {
        out.push_str(&encode_line(event));
        out.push('\n');
    }
    out
}

/// Strict reader: every non-empty line must decode and seq numbers must run 1, 2, 3...
pub fn read_log<R: BufRead>(reader: R) -> Result<Vec<GameEvent>> {
    let mut events = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let expected = events.len() as u64 + 1;
        let line = line.map_err(|e| GameError::corrupt(expected, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let event = decode_line(&line).map_err(|e| {
            GameError::corrupt(expected, format!("line {}: {e}", lineno + 1))
        })?;
        if event.seq != expected {
            return Err(GameError::corrupt(
                event.seq,
                format!("expected seq {expected}"),
            ));
        }
        events.push(event);
    }
    Ok(events)
}
