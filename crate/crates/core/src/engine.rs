//! Command handling on top of the event-sourced [`GameState`].
//!
//! Every accepted command appends one or more [`GameEvent`]s; the state is only ever
//! changed by folding those events, so a fresh engine replaying the log reaches the same
//! state as the engine that produced it.

use serde::{Deserialize, Serialize};

use crate::config::EngineConfig;
use crate::error::{CapKind, GameError, Result};
use crate::event::{EventPayload, GameEvent};
use crate::feedback::{compare_to_consensus, Consensus};
use crate::ingestion::{
    normalize_token, screen_batch, IngestReport, LexiconTagger, RawItem, ReplaceableTagger,
};
use crate::moderation::{BlacklistVerdict, LowballVerdict};
use crate::state::GameState;
use crate::types::{
    Category, EditId, EditState, Grade, HeadlineRef, PlayerId, SourceId, SourceHeadline,
    SourceStatus, Timestamp,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    RegisterPlayer {
        display_name: String,
    },
    Ingest {
        items: Vec<RawItem>,
        #[serde(default)]
        default_category: Option<Category>,
    },
    SubmitEdit {
        player: PlayerId,
        source: SourceId,
        index: usize,
        word: String,
    },
    SubmitRating {
        player: PlayerId,
        edit: EditId,
        grade: i64,
        served_at: Timestamp,
    },
    Flag {
        player: PlayerId,
        edit: EditId,
    },
    Skip {
        player: PlayerId,
        target: HeadlineRef,
    },
    Reinstate {
        edit: EditId,
    },
    Suspend {
        player: PlayerId,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingOutcome {
    pub accepted: bool,
    pub feedback: Option<Consensus>,
    /// True when this grade was the fifth and the headline completed.
    pub completed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Outcome {
    Registered { player: PlayerId },
    Ingested(IngestReport),
    Edited { edit: EditId },
    Rated(RatingOutcome),
    Ack,
}

pub struct Engine {
    config: EngineConfig,
    state: GameState,
    log: Vec<GameEvent>,
    tagger: Box<dyn ReplaceableTagger>,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("events", &self.log.len())
            .finish_non_exhaustive()
    }
}

impl Engine {
    pub fn new(config: EngineConfig) -> Self {
        Self {
            config,
            state: GameState::default(),
            log: Vec::new(),
            tagger: Box::new(LexiconTagger::default()),
        }
    }

    pub fn with_tagger(mut self, tagger: Box<dyn ReplaceableTagger>) -> Self {
        self.tagger = tagger;
        self
    }

    /// Rebuilds an engine by folding `events` in order.
    pub fn replay<I>(config: EngineConfig, events: I) -> Result<Self>
    where
        I: IntoIterator<Item = GameEvent>,
    {
        let mut engine = Self::new(config);
        for event in events {
            engine.state.apply(&event, &engine.config)?;
            engine.log.push(event);
        }
        Ok(engine)
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn events(&self) -> &[GameEvent] {
        &self.log
    }

    pub fn events_since(&self, seq: u64) -> &[GameEvent] {
        let start = (seq as usize).min(self.log.len());
        &self.log[start..]
    }

    fn emit(&mut self, payload: EventPayload, key: Option<&str>, now: Timestamp) -> Result<u64> {
        let event = GameEvent {
            seq: self.state.last_seq + 1,
            at: now,
            key: key.map(str::to_string),
            payload,
        };
        self.state.apply(&event, &self.config)?;
        self.log.push(event);
        Ok(self.state.last_seq)
    }

    /// Runs a command. A repeated idempotency key returns the original outcome without
    /// appending anything.
    pub fn execute(&mut self, command: Command, key: Option<&str>, now: Timestamp) -> Result<Outcome> {
        if let Some(k) = key {
            if let Some(&seq) = self.state.idempotency.get(k) {
                return self.outcome_at(seq, k);
            }
        }
        match command {
            Command::RegisterPlayer { display_name } => self
                .register_player_keyed(display_name, key, now)
                .map(|player| Outcome::Registered { player }),
            Command::Ingest {
                items,
                default_category,
            } => Ok(Outcome::Ingested(self.ingest_keyed(
                items,
                default_category,
                key,
                now,
            )?)),
            Command::SubmitEdit {
                player,
                source,
                index,
                word,
            } => self
                .submit_edit_keyed(player, source, index, &word, key, now)
                .map(|edit| Outcome::Edited { edit }),
            Command::SubmitRating {
                player,
                edit,
                grade,
                served_at,
            } => self
                .submit_rating_keyed(player, edit, grade, served_at, key, now)
                .map(Outcome::Rated),
            Command::Flag { player, edit } => {
                self.flag_keyed(player, edit, key, now).map(|_| Outcome::Ack)
            }
            Command::Skip { player, target } => {
                self.skip_keyed(player, target, key, now).map(|_| Outcome::Ack)
            }
            Command::Reinstate { edit } => {
                self.reinstate_keyed(edit, key, now).map(|_| Outcome::Ack)
            }
            Command::Suspend { player, reason } => self
                .suspend_keyed(player, reason, key, now)
                .map(|_| Outcome::Ack),
        }
    }

    /// Reconstructs the outcome of the command whose first event is `seq`.
    fn outcome_at(&self, seq: u64, key: &str) -> Result<Outcome> {
        let event = self
            .log
            .get(seq as usize - 1)
            .ok_or_else(|| GameError::corrupt(seq, "idempotency key points past the log"))?;
        Ok(match &event.payload {
            EventPayload::PlayerRegistered { player, .. } => Outcome::Registered { player: *player },
            EventPayload::HeadlineIngested { .. } => Outcome::Ingested(IngestReport {
                admitted: self.log[seq as usize - 1..]
                    .iter()
                    .take_while(|e| e.key.as_deref() == Some(key))
                    .count(),
                rejected: Vec::new(),
            }),
            EventPayload::EditSubmitted { edit, .. } => Outcome::Edited { edit: *edit },
            EventPayload::RatingSubmitted { edit, rater, .. } => {
                let e = self.state.edit(*edit)?;
                let position = e
                    .ratings
                    .iter()
                    .position(|r| r.rater_id == *rater)
                    .unwrap_or(0);
                Outcome::Rated(self.rating_outcome(*edit, position)?)
            }
            _ => Outcome::Ack,
        })
    }

    /// Outcome for the grade at `position` in the headline's rating list.
    fn rating_outcome(&self, edit: EditId, position: usize) -> Result<RatingOutcome> {
        let e = self.state.edit(edit)?;
        let prior: Vec<Grade> = e.ratings[..position].iter().map(|r| r.grade).collect();
        let own = e.ratings[position].grade;
        let feedback = if prior.len() >= self.config.rules.feedback_min_prior.max(1) {
            Some(compare_to_consensus(own, &prior)?)
        } else {
            None
        };
        Ok(RatingOutcome {
            accepted: true,
            feedback,
            completed: position + 1 == crate::types::RATINGS_TO_COMPLETE,
        })
    }

    fn active_player(&self, player: PlayerId) -> Result<&crate::types::Player> {
        let p = self.state.player(player)?;
        if p.is_suspended() {
            return Err(GameError::SuspendedPlayer(player));
        }
        Ok(p)
    }

    pub fn register_player(&mut self, display_name: impl Into<String>, now: Timestamp) -> Result<PlayerId> {
        self.register_player_keyed(display_name.into(), None, now)
    }

    fn register_player_keyed(
        &mut self,
        display_name: String,
        key: Option<&str>,
        now: Timestamp,
    ) -> Result<PlayerId> {
        let player = self.state.next_player_id();
        self.emit(
            EventPayload::PlayerRegistered {
                player,
                display_name,
            },
            key,
            now,
        )?;
        Ok(player)
    }

    /// Screens a batch and admits what passes. Never fails as a whole; rejections are
    /// reported per item.
    pub fn ingest_batch(&mut self, items: Vec<RawItem>, now: Timestamp) -> IngestReport {
        self.ingest_keyed(items, None, None, now)
            .expect("events built from a screened batch always apply")
    }

    pub fn ingest_batch_with_default(
        &mut self,
        items: Vec<RawItem>,
        default_category: Category,
        now: Timestamp,
    ) -> IngestReport {
        self.ingest_keyed(items, Some(default_category), None, now)
            .expect("events built from a screened batch always apply")
    }

    fn ingest_keyed(
        &mut self,
        items: Vec<RawItem>,
        default_category: Option<Category>,
        key: Option<&str>,
        now: Timestamp,
    ) -> Result<IngestReport> {
        let (admitted, rejected) = screen_batch(
            &self.state,
            &self.config.ingestion,
            self.tagger.as_ref(),
            items,
            default_category,
            now,
        );
        let count = admitted.len();
        for a in admitted {
            let source = self.state.next_source_id();
            self.emit(
                EventPayload::HeadlineIngested {
                    source,
                    tokens: a.tokens,
                    category: a.category,
                    source_name: a.source_name,
                    article_url: a.article_url,
                    published_at: a.published_at,
                    replaceable: a.replaceable,
                },
                key,
                now,
            )?;
        }
        Ok(IngestReport {
            admitted: count,
            rejected,
        })
    }

    pub fn submit_edit(
        &mut self,
        player: PlayerId,
        source: SourceId,
        index: usize,
        word: &str,
        now: Timestamp,
    ) -> Result<EditId> {
        self.submit_edit_keyed(player, source, index, word, None, now)
    }

    fn submit_edit_keyed(
        &mut self,
        player: PlayerId,
        source: SourceId,
        index: usize,
        word: &str,
        key: Option<&str>,
        now: Timestamp,
    ) -> Result<EditId> {
        let p = self.active_player(player)?;
        if p.edit_count >= self.config.rules.edit_cap {
            return Err(GameError::CapReached(CapKind::Edits));
        }
        let src = self.state.source(source)?;
        if src.status != SourceStatus::Available {
            return Err(GameError::SourceUnavailable(source));
        }
        if !src.replaceable.contains(&index) {
            return Err(GameError::NotReplaceableIndex(index));
        }
        let substitute = validate_substitute(src, index, word)?;
        if let BlacklistVerdict::Reject { matched } = self.config.moderation.check_blacklist(&substitute) {
            return Err(GameError::BlacklistedWord(matched));
        }
        let edit = self.state.next_edit_id();
        self.emit(
            EventPayload::EditSubmitted {
                edit,
                player,
                source,
                index,
                substitute,
            },
            key,
            now,
        )?;
        Ok(edit)
    }

    pub fn submit_rating(
        &mut self,
        player: PlayerId,
        edit: EditId,
        grade: i64,
        served_at: Timestamp,
        now: Timestamp,
    ) -> Result<RatingOutcome> {
        self.submit_rating_keyed(player, edit, grade, served_at, None, now)
    }

    fn submit_rating_keyed(
        &mut self,
        player: PlayerId,
        edit: EditId,
        grade: i64,
        served_at: Timestamp,
        key: Option<&str>,
        now: Timestamp,
    ) -> Result<RatingOutcome> {
        let grade = u8::try_from(grade)
            .ok()
            .and_then(|g| Grade::new(g).ok())
            .ok_or(GameError::GradeOutOfRange(grade))?;
        let p = self.active_player(player)?;
        if p.rating_count >= self.config.rules.rating_cap {
            return Err(GameError::CapReached(CapKind::Ratings));
        }
        let e = self.state.edit(edit)?;
        if e.state != EditState::InPool {
            return Err(GameError::HeadlineNotInPool(edit));
        }
        if e.editor_id == player {
            return Err(GameError::SelfRating);
        }
        if e.has_rater(player) {
            return Err(GameError::DuplicateRating);
        }
        if let Some(cap) = self.config.sampler.per_pair_cap {
            if self.state.pair_count(player, e.editor_id) >= cap {
                return Err(GameError::PairCapReached(cap));
            }
        }
        if !self.config.moderation.check_dwell(served_at, now) {
            return Err(GameError::TooFast);
        }

        let position = e.ratings.len();
        self.emit(
            EventPayload::RatingSubmitted {
                edit,
                rater: player,
                grade,
                served_at,
            },
            key,
            now,
        )?;
        let outcome = self.rating_outcome(edit, position)?;
        if outcome.completed {
            self.review_raters(edit, key, now)?;
        }
        Ok(outcome)
    }

    /// Runs lowballing detection for every rater of a headline that just completed.
    fn review_raters(&mut self, edit: EditId, key: Option<&str>, now: Timestamp) -> Result<()> {
        let raters: Vec<PlayerId> = self
            .state
            .edit(edit)?
            .ratings
            .iter()
            .map(|r| r.rater_id)
            .collect();
        for rater in raters {
            let verdict = {
                let p = self.state.player(rater)?;
                let stats = self.state.player_stats(rater)?;
                self.config.moderation.detect_lowballing(p.standing, stats)
            };
            let reason = "persistent low grades against consensus".to_string();
            match verdict {
                LowballVerdict::None => {}
                LowballVerdict::Warn => {
                    self.emit(EventPayload::PlayerWarned { player: rater, reason }, key, now)?;
                }
                LowballVerdict::Suspend => {
                    self.emit(EventPayload::PlayerSuspended { player: rater, reason }, key, now)?;
                }
            }
        }
        Ok(())
    }

    pub fn flag_headline(&mut self, player: PlayerId, edit: EditId, now: Timestamp) -> Result<()> {
        self.flag_keyed(player, edit, None, now)
    }

    fn flag_keyed(&mut self, player: PlayerId, edit: EditId, key: Option<&str>, now: Timestamp) -> Result<()> {
        self.active_player(player)?;
        let e = self.state.edit(edit)?;
        if e.editor_id == player {
            return Err(GameError::SelfFlag);
        }
        match e.state {
            EditState::FlaggedRemoved => return Err(GameError::AlreadyRemoved(edit)),
            EditState::FullyRated => return Err(GameError::HeadlineNotInPool(edit)),
            EditState::InPool => {}
        }
        if e.flaggers.contains(&player) {
            return Err(GameError::DuplicateFlag);
        }
        self.emit(
            EventPayload::HeadlineFlagged {
                edit,
                flagger: player,
            },
            key,
            now,
        )?;
        Ok(())
    }

    /// Permanently hides a headline from this player. Repeated skips change nothing.
    pub fn skip_headline(&mut self, player: PlayerId, target: HeadlineRef, now: Timestamp) -> Result<()> {
        self.skip_keyed(player, target, None, now)
    }

    fn skip_keyed(
        &mut self,
        player: PlayerId,
        target: HeadlineRef,
        key: Option<&str>,
        now: Timestamp,
    ) -> Result<()> {
        let p = self.active_player(player)?;
        if p.skipped.contains(&target) {
            return Ok(());
        }
        match target {
            HeadlineRef::Source(id) => {
                self.state.source(id)?;
            }
            HeadlineRef::Edit(id) => {
                self.state.edit(id)?;
            }
        }
        self.emit(EventPayload::HeadlineSkipped { player, target }, key, now)?;
        Ok(())
    }

    /// Moderator action: puts a removed headline back into the rating pool.
    pub fn reinstate_headline(&mut self, edit: EditId, now: Timestamp) -> Result<()> {
        self.reinstate_keyed(edit, None, now)
    }

    fn reinstate_keyed(&mut self, edit: EditId, key: Option<&str>, now: Timestamp) -> Result<()> {
        if self.state.edit(edit)?.state != EditState::FlaggedRemoved {
            return Err(GameError::NotRemoved(edit));
        }
        self.emit(EventPayload::HeadlineReinstated { edit }, key, now)?;
        Ok(())
    }

    /// Moderator action. Suspending an already suspended player is a no-op.
    pub fn suspend_player(&mut self, player: PlayerId, reason: impl Into<String>, now: Timestamp) -> Result<()> {
        self.suspend_keyed(player, reason.into(), None, now)
    }

    fn suspend_keyed(
        &mut self,
        player: PlayerId,
        reason: String,
        key: Option<&str>,
        now: Timestamp,
    ) -> Result<()> {
        if self.state.player(player)?.is_suspended() {
            return Ok(());
        }
        self.emit(EventPayload::PlayerSuspended { player, reason }, key, now)?;
        Ok(())
    }

    /// Editable source headlines, most recently published first.
    pub fn editable_headlines(
        &self,
        player: Option<PlayerId>,
        category: Option<Category>,
        limit: usize,
    ) -> Vec<&SourceHeadline> {
        let skipped = player.and_then(|p| self.state.players.get(&p)).map(|p| &p.skipped);
        let mut list: Vec<&SourceHeadline> = self
            .state
            .sources
            .values()
            .filter(|s| s.status == SourceStatus::Available)
            .filter(|s| category.is_none_or(|c| s.category == c))
            .filter(|s| skipped.is_none_or(|k| !k.contains(&HeadlineRef::Source(s.id))))
            .collect();
        let newest_first = |a: &&SourceHeadline, b: &&SourceHeadline| {
            b.published_at
                .cmp(&a.published_at)
                .then_with(|| b.id.cmp(&a.id))
        };
        if limit == 0 {
            return Vec::new();
        }
        if list.len() > limit {
            list.select_nth_unstable_by(limit - 1, newest_first);
            list.truncate(limit);
        }
        list.sort_unstable_by(newest_first);
        list
    }
}

/// Checks that `word` is one word that differs from the token it replaces.
fn validate_substitute(src: &SourceHeadline, index: usize, word: &str) -> Result<String> {
    let word = word.trim();
    if word.is_empty()
        || word.chars().any(char::is_whitespace)
        || !word.chars().any(char::is_alphanumeric)
    {
        return Err(GameError::NotSingleWord);
    }
    let original = src
        .tokens
        .get(index)
        .ok_or(GameError::NotReplaceableIndex(index))?;
    if normalize_token(original) == normalize_token(word) {
        return Err(GameError::SubstituteEqualsOriginal);
    }
    Ok(word.to_string())
}
