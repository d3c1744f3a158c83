//! Game state as a pure fold over the event log.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::config::EngineConfig;
use crate::error::{GameError, Result};
use crate::event::{EventPayload, GameEvent};
use crate::types::{
    EditId, EditState, EditedHeadline, HeadlineRef, Player, PlayerId, RatingEvent, SourceHeadline,
    SourceId, SourceStatus, Standing, RATINGS_TO_COMPLETE,
};

/// A grade whose headline completed, kept with the sum of the other four grades.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SettledRating {
    pub edit: EditId,
    pub grade: u8,
    pub others_sum: u32,
}

impl SettledRating {
    pub fn others_mean(&self) -> f64 {
        f64::from(self.others_sum) / (RATINGS_TO_COMPLETE - 1) as f64
    }

    /// `4 * (1 - |grade - mean(others)|)`, an exact integer.
    pub fn agreement_quarters(&self) -> i64 {
        let others = (RATINGS_TO_COMPLETE - 1) as i64;
        others - (others * i64::from(self.grade) - i64::from(self.others_sum)).abs()
    }
}

/// Per-player aggregates maintained alongside [`Player`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlayerStats {
    pub edits: Vec<EditId>,
    /// Rated headlines in submission order.
    pub ratings: Vec<EditId>,
    /// Grades received across all of this player's edits.
    pub ratings_received: u32,
    /// Histogram of grade sums (0..=15) over this player's fully rated edits.
    pub completed_grade_sums: Vec<u32>,
    /// Sum of [`SettledRating::agreement_quarters`] over settled ratings.
    pub agreement_quarters: i64,
    /// Ratings in settlement order.
    pub settled: Vec<SettledRating>,
    /// Length of `settled` when the player was last warned.
    pub warned_at_settled: Option<usize>,
}

impl PlayerStats {
    pub fn fully_rated_edits(&self) -> u32 {
        self.completed_grade_sums.iter().sum()
    }

    pub fn received_grade_total(&self) -> u64 {
        self.completed_grade_sums
            .iter()
            .enumerate()
            .map(|(sum, n)| sum as u64 * u64::from(*n))
            .sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    pub last_seq: u64,
    pub players: BTreeMap<PlayerId, Player>,
    pub stats: BTreeMap<PlayerId, PlayerStats>,
    pub sources: BTreeMap<SourceId, SourceHeadline>,
    pub edits: BTreeMap<EditId, EditedHeadline>,
    /// Edited headlines currently open for rating.
    pub pool: BTreeSet<EditId>,
    /// Fully rated headlines in completion order.
    pub completed: Vec<EditId>,
    pub normalized_texts: BTreeSet<String>,
    pub admissions_by_day: BTreeMap<NaiveDate, u32>,
    /// rater -> editor -> number of that editor's headlines the rater graded.
    pub pair_counts: BTreeMap<PlayerId, BTreeMap<PlayerId, u32>>,
    /// Idempotency key -> seq of the first event it produced.
    pub idempotency: BTreeMap<String, u64>,
}

impl GameState {
    pub fn next_player_id(&self) -> PlayerId {
        PlayerId(self.players.len() as u64 + 1)
    }

    pub fn next_source_id(&self) -> SourceId {
        SourceId(self.sources.len() as u64 + 1)
    }

    pub fn next_edit_id(&self) -> EditId {
        EditId(self.edits.len() as u64 + 1)
    }

    pub fn player(&self, id: PlayerId) -> Result<&Player> {
        self.players.get(&id).ok_or(GameError::UnknownPlayer(id))
    }

    pub fn player_stats(&self, id: PlayerId) -> Result<&PlayerStats> {
        self.stats.get(&id).ok_or(GameError::UnknownPlayer(id))
    }

    pub fn source(&self, id: SourceId) -> Result<&SourceHeadline> {
        self.sources.get(&id).ok_or(GameError::UnknownHeadline(id))
    }

    pub fn edit(&self, id: EditId) -> Result<&EditedHeadline> {
        self.edits.get(&id).ok_or(GameError::UnknownEdit(id))
    }

    pub fn pair_count(&self, rater: PlayerId, editor: PlayerId) -> u32 {
        self.pair_counts
            .get(&rater)
            .and_then(|m| m.get(&editor))
            .copied()
            .unwrap_or(0)
    }

    /// Source tokens with the substitute in place of the replaced token.
    pub fn edited_tokens(&self, edit: &EditedHeadline) -> Vec<String> {
        let mut tokens = self
            .sources
            .get(&edit.source_id)
            .map(|s| s.tokens.clone())
            .unwrap_or_default();
        if let Some(slot) = tokens.get_mut(edit.replaced_index) {
            *slot = edit.substitute.clone();
        }
        tokens
    }

    pub fn edited_text(&self, edit: &EditedHeadline) -> String {
        self.edited_tokens(edit).join(" ")
    }

    /// Folds one event into the state. Commands are validated before their events are
    /// emitted, so this only checks what is needed to detect a corrupt log.
    pub fn apply(&mut self, event: &GameEvent, config: &EngineConfig) -> Result<()> {
        let seq = event.seq;
        if seq != self.last_seq + 1 {
            return Err(GameError::corrupt(
                seq,
                format!("expected seq {}", self.last_seq + 1),
            ));
        }
        let corrupt = |reason: &str| GameError::corrupt(seq, reason.to_string());

        match &event.payload {
            EventPayload::PlayerRegistered {
                player,
                display_name,
            } => {
                if *player != self.next_player_id() {
                    return Err(corrupt("player id out of order"));
                }
                self.players.insert(
                    *player,
                    Player {
                        id: *player,
                        display_name: display_name.clone(),
                        joined_at: event.at,
                        edit_count: 0,
                        rating_count: 0,
                        skipped: BTreeSet::new(),
                        standing: Standing::Active,
                    },
                );
                self.stats.insert(
                    *player,
                    PlayerStats {
                        completed_grade_sums: vec![0; 3 * RATINGS_TO_COMPLETE + 1],
                        ..PlayerStats::default()
                    },
                );
            }
            EventPayload::HeadlineIngested {
                source,
                tokens,
                category,
                source_name,
                article_url,
                published_at,
                replaceable,
            } => {
                if *source != self.next_source_id() {
                    return Err(corrupt("source id out of order"));
                }
                if replaceable.iter().any(|&i| i >= tokens.len()) {
                    return Err(corrupt("replaceable index out of range"));
                }
                self.normalized_texts
                    .insert(crate::ingestion::normalize_text(&tokens.join(" ")));
                *self
                    .admissions_by_day
                    .entry(event.at.date_naive())
                    .or_insert(0) += 1;
                self.sources.insert(
                    *source,
                    SourceHeadline {
                        id: *source,
                        tokens: tokens.clone(),
                        category: *category,
                        source_name: source_name.clone(),
                        article_url: article_url.clone(),
                        published_at: *published_at,
                        replaceable: replaceable.clone(),
                        status: if replaceable.is_empty() {
                            SourceStatus::Retired
                        } else {
                            SourceStatus::Available
                        },
                        ingested_at: event.at,
                        edit_count: 0,
                        skip_count: 0,
                    },
                );
            }
            EventPayload::EditSubmitted {
                edit,
                player,
                source,
                index,
                substitute,
            } => {
                if *edit != self.next_edit_id() {
                    return Err(corrupt("edit id out of order"));
                }
                let src = self
                    .sources
                    .get_mut(source)
                    .ok_or_else(|| corrupt("edit of unknown source"))?;
                if !src.replaceable.contains(index) {
                    return Err(corrupt("edit of non-replaceable index"));
                }
                src.edit_count += 1;
                if src.edit_count >= config.rules.max_edits_per_source
                    && src.status == SourceStatus::Available
                {
                    src.status = SourceStatus::Exhausted;
                }
                let p = self
                    .players
                    .get_mut(player)
                    .ok_or_else(|| corrupt("edit by unknown player"))?;
                p.edit_count += 1;
                self.stats.entry(*player).or_default().edits.push(*edit);
                self.edits.insert(
                    *edit,
                    EditedHeadline {
                        id: *edit,
                        source_id: *source,
                        editor_id: *player,
                        replaced_index: *index,
                        substitute: substitute.clone(),
                        created_at: event.at,
                        ratings: Vec::new(),
                        state: EditState::InPool,
                        flaggers: BTreeSet::new(),
                        completion_seq: None,
                        completed_at: None,
                    },
                );
                self.pool.insert(*edit);
            }
            EventPayload::RatingSubmitted {
                edit,
                rater,
                grade,
                served_at,
            } => {
                let completion_seq = self.completed.len() as u64;
                let e = self
                    .edits
                    .get_mut(edit)
                    .ok_or_else(|| corrupt("rating of unknown edit"))?;
                if e.state != EditState::InPool
                    || e.editor_id == *rater
                    || e.ratings.iter().any(|r| r.rater_id == *rater)
                {
                    return Err(corrupt("rating violates headline lifecycle"));
                }
                e.ratings.push(RatingEvent {
                    rater_id: *rater,
                    grade: *grade,
                    served_at: *served_at,
                    submitted_at: event.at,
                });
                let editor = e.editor_id;
                let completed = e.ratings.len() == RATINGS_TO_COMPLETE;
                if completed {
                    e.state = EditState::FullyRated;
                    e.completion_seq = Some(completion_seq);
                    e.completed_at = Some(event.at);
                }
                let settled: Vec<(PlayerId, SettledRating)> = if completed {
                    let total = e.grade_sum();
                    e.ratings
                        .iter()
                        .map(|r| {
                            let g = u32::from(r.grade.value());
                            (
                                r.rater_id,
                                SettledRating {
                                    edit: *edit,
                                    grade: r.grade.value(),
                                    others_sum: total - g,
                                },
                            )
                        })
                        .collect()
                } else {
                    Vec::new()
                };
                let grade_total = e.grade_sum();

                let p = self
                    .players
                    .get_mut(rater)
                    .ok_or_else(|| corrupt("rating by unknown player"))?;
                p.rating_count += 1;
                self.stats.entry(*rater).or_default().ratings.push(*edit);
                self.stats.entry(editor).or_default().ratings_received += 1;
                *self
                    .pair_counts
                    .entry(*rater)
                    .or_default()
                    .entry(editor)
                    .or_insert(0) += 1;

                if completed {
                    self.pool.remove(edit);
                    self.completed.push(*edit);
                    self.stats.entry(editor).or_default().completed_grade_sums
                        [grade_total as usize] += 1;
                    for (rater_id, s) in settled {
                        let st = self.stats.entry(rater_id).or_default();
                        st.agreement_quarters += s.agreement_quarters();
                        st.settled.push(s);
                    }
                }
            }
            EventPayload::HeadlineFlagged { edit, flagger } => {
                let e = self
                    .edits
                    .get_mut(edit)
                    .ok_or_else(|| corrupt("flag of unknown edit"))?;
                e.flaggers.insert(*flagger);
                if e.state == EditState::InPool
                    && e.flaggers.len() as u32 >= config.moderation.flag_removal_threshold
                {
                    e.state = EditState::FlaggedRemoved;
                    self.pool.remove(edit);
                }
            }
            EventPayload::HeadlineSkipped { player, target } => {
                let p = self
                    .players
                    .get_mut(player)
                    .ok_or_else(|| corrupt("skip by unknown player"))?;
                let fresh = p.skipped.insert(*target);
                if let (true, HeadlineRef::Source(sid)) = (fresh, target) {
                    if let Some(src) = self.sources.get_mut(sid) {
                        src.skip_count += 1;
                        if src.skip_count >= config.rules.retire_after_skips
                            && src.status == SourceStatus::Available
                        {
                            src.status = SourceStatus::Retired;
                        }
                    }
                }
            }
            EventPayload::PlayerWarned { player, .. } => {
                let p = self
                    .players
                    .get_mut(player)
                    .ok_or_else(|| corrupt("warning for unknown player"))?;
                if p.standing == Standing::Active {
                    p.standing = Standing::Warned;
                }
                let st = self.stats.entry(*player).or_default();
                st.warned_at_settled = Some(st.settled.len());
            }
            EventPayload::PlayerSuspended { player, .. } => {
                let p = self
                    .players
                    .get_mut(player)
                    .ok_or_else(|| corrupt("suspension of unknown player"))?;
                p.standing = Standing::Suspended;
            }
            EventPayload::HeadlineReinstated { edit } => {
                let e = self
                    .edits
                    .get_mut(edit)
                    .ok_or_else(|| corrupt("reinstatement of unknown edit"))?;
                if e.state == EditState::FlaggedRemoved {
                    e.state = EditState::InPool;
                    e.flaggers.clear();
                    self.pool.insert(*edit);
                }
            }
        }

        if let Some(key) = &event.key {
            self.idempotency.entry(key.clone()).or_insert(seq);
        }
        self.last_seq = seq;
        Ok(())
    }
}
