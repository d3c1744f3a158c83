//! Core of a headline micro-edit humor game.
//!
//! Players substitute one word in real news headlines to make them funny, other players
//! grade the results on a 0-3 scale, and a points system rewards funny edits, grades
//! that agree with the crowd, and a healthy mix of both tasks.
//!
//! All state lives in an append-only event log ([`event`]) and is rebuilt by folding it
//! ([`state`]). [`engine::Engine`] validates commands and emits events; the other modules
//! are pure functions over the state.

pub mod analytics;
pub mod config;
pub mod engine;
pub mod error;
pub mod event;
pub mod feedback;
pub mod ingestion;
pub mod moderation;
pub mod sampler;
pub mod scoring;
pub mod state;
pub mod types;

pub use config::{EngineConfig, GameRules};
pub use engine::{Command, Engine, Outcome, RatingOutcome};
pub use error::{CapKind, GameError};
pub use event::{EventPayload, GameEvent};
pub use state::GameState;
pub use types::*;
