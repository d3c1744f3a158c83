//! Point components, leaderboards and competition qualification.
//!
//! Three components make up a player's score:
//!
//! * editing points grow exponentially with the mean grade of each fully rated edit,
//!   `base * (growth^m - 1)`;
//! * rating points fall linearly with the distance between a grade and the mean of the
//!   other four grades, `scale * (1 - delta)`, and turn negative past a one-grade gap;
//! * balance points peak while the ratings-to-edits ratio stays inside the band
//!   `[ratio_low, ratio_high]` and taper on either side.
//!
//! Per-headline helpers return rounded integers for display. Player totals accumulate the
//! unrounded values so that scaling every constant by the same factor scales every total
//! by that factor and leaves the board order intact.

use chrono::Duration;
use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::state::{GameState, PlayerStats};
use crate::types::{EditId, EditState, EditedHeadline, Grade, Player, PlayerId, Timestamp};
use crate::types::RATINGS_TO_COMPLETE;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoringConfig {
    pub edit_base: f64,
    pub edit_growth: f64,
    pub rating_scale: f64,
    pub balance_max: f64,
    pub balance_ratio_low: f64,
    pub balance_ratio_high: f64,
    /// When false, balance points are always zero.
    pub balance_enabled: bool,
    /// Minimum fully rated headlines to appear on the mean-rating board.
    pub mean_board_min_rated: u32,
    pub funny_window_days: i64,
    pub funny_list_len: usize,
    pub qualify_edits: (u32, u32),
    pub qualify_ratings: (u32, u32),
}

impl Default for ScoringConfig {
    fn default() -> Self {
        Self {
            edit_base: 25.0,
            edit_growth: 2.0,
            rating_scale: 10.0,
            balance_max: 50.0,
            balance_ratio_low: 3.0,
            balance_ratio_high: 10.0,
            balance_enabled: true,
            mean_board_min_rated: 5,
            funny_window_days: 7,
            funny_list_len: 10,
            qualify_edits: (50, 150),
            qualify_ratings: (200, 500),
        }
    }
}

impl ScoringConfig {
    /// Same configuration with every point constant multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            edit_base: self.edit_base * factor,
            rating_scale: self.rating_scale * factor,
            balance_max: self.balance_max * factor,
            ..self.clone()
        }
    }
}

fn round_points(x: f64) -> i64 {
    x.round() as i64
}

pub fn editing_points_exact(cfg: &ScoringConfig, mean_grade: f64) -> f64 {
    cfg.edit_base * (cfg.edit_growth.powf(mean_grade) - 1.0)
}

pub fn editing_points(cfg: &ScoringConfig, mean_grade: f64) -> i64 {
    round_points(editing_points_exact(cfg, mean_grade))
}

pub fn rating_points_exact(cfg: &ScoringConfig, delta: f64) -> f64 {
    cfg.rating_scale * (1.0 - delta)
}

pub fn rating_points(cfg: &ScoringConfig, delta: f64) -> i64 {
    round_points(rating_points_exact(cfg, delta))
}

fn ratio(edits: u32, ratings: u32) -> f64 {
    f64::from(ratings) / f64::from(edits.max(1))
}

pub fn balance_points_exact(cfg: &ScoringConfig, edits: u32, ratings: u32) -> f64 {
    if !cfg.balance_enabled {
        return 0.0;
    }
    let rho = ratio(edits, ratings);
    if rho < cfg.balance_ratio_low {
        cfg.balance_max * rho / cfg.balance_ratio_low
    } else if rho > cfg.balance_ratio_high {
        cfg.balance_max * cfg.balance_ratio_high / rho
    } else {
        cfg.balance_max
    }
}

/// Balance points from the player's current totals; recomputed, never accumulated.
pub fn balance_points(cfg: &ScoringConfig, edits: u32, ratings: u32) -> i64 {
    round_points(balance_points_exact(cfg, edits, ratings))
}

/// Editing-points delta granted to the editor when a headline completes.
pub fn settle_headline(cfg: &ScoringConfig, edit: &EditedHeadline) -> Result<i64> {
    match edit.state {
        EditState::FlaggedRemoved => Ok(0),
        EditState::InPool => Err(GameError::NotFullyRated),
        EditState::FullyRated => {
            let mean = edit.mean_grade().ok_or(GameError::NotFullyRated)?;
            Ok(editing_points(cfg, mean))
        }
    }
}

/// Rating-points delta for one grade, given the other four grades of the headline.
pub fn settle_rating(cfg: &ScoringConfig, grade: Grade, others: &[Grade]) -> Result<i64> {
    if others.len() != RATINGS_TO_COMPLETE - 1 {
        return Err(GameError::NotFullyRated);
    }
    let mean = others.iter().map(|g| f64::from(g.value())).sum::<f64>() / others.len() as f64;
    Ok(rating_points(cfg, (f64::from(grade.value()) - mean).abs()))
}

/// How many more actions would bring the ratio back into the balance band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceAdvice {
    pub more_edits: u32,
    pub more_ratings: u32,
}

pub fn balance_advice(cfg: &ScoringConfig, edits: u32, ratings: u32) -> BalanceAdvice {
    let rho = ratio(edits, ratings);
    let mut advice = BalanceAdvice {
        more_edits: 0,
        more_ratings: 0,
    };
    if edits == 0 {
        advice.more_edits = 1;
    }
    if rho < cfg.balance_ratio_low {
        let need = (cfg.balance_ratio_low * f64::from(edits.max(1))).ceil() as u32;
        advice.more_ratings = need.saturating_sub(ratings);
    } else if rho > cfg.balance_ratio_high {
        let need = (f64::from(ratings) / cfg.balance_ratio_high).ceil() as u32;
        advice.more_edits = advice.more_edits.max(need.saturating_sub(edits));
    }
    advice
}

pub fn is_qualified(cfg: &ScoringConfig, edit_count: u32, rating_count: u32) -> bool {
    let (emin, emax) = cfg.qualify_edits;
    let (rmin, rmax) = cfg.qualify_ratings;
    (emin..=emax).contains(&edit_count) && (rmin..=rmax).contains(&rating_count)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreState {
    pub player_id: PlayerId,
    pub editing_points: f64,
    pub rating_points: f64,
    pub balance_points: f64,
    pub total: f64,
    pub fully_rated_edits: u32,
    pub mean_received_rating: Option<f64>,
}

pub fn score_state(cfg: &ScoringConfig, player: &Player, stats: &PlayerStats) -> ScoreState {
    let editing_points: f64 = stats
        .completed_grade_sums
        .iter()
        .enumerate()
        .filter(|(_, n)| **n > 0)
        .map(|(sum, n)| {
            f64::from(*n) * editing_points_exact(cfg, sum as f64 / RATINGS_TO_COMPLETE as f64)
        })
        .sum();
    let others = (RATINGS_TO_COMPLETE - 1) as f64;
    let rating_points = cfg.rating_scale * stats.agreement_quarters as f64 / others;
    let balance_points = balance_points_exact(cfg, player.edit_count, player.rating_count);
    let fully_rated_edits = stats.fully_rated_edits();
    let mean_received_rating = (fully_rated_edits > 0).then(|| {
        stats.received_grade_total() as f64
            / (f64::from(fully_rated_edits) * RATINGS_TO_COMPLETE as f64)
    });
    ScoreState {
        player_id: player.id,
        editing_points,
        rating_points,
        balance_points,
        total: editing_points + rating_points + balance_points,
        fully_rated_edits,
        mean_received_rating,
    }
}

pub fn score_states(cfg: &ScoringConfig, state: &GameState) -> Vec<ScoreState> {
    state
        .players
        .values()
        .filter_map(|p| state.stats.get(&p.id).map(|s| score_state(cfg, p, s)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardEntry {
    pub rank: usize,
    pub player: PlayerId,
    pub display_name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunnyHeadline {
    pub edit: EditId,
    pub editor: PlayerId,
    pub original: String,
    pub edited: String,
    pub mean_grade: f64,
    pub completed_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaderboards {
    pub points_board: Vec<LeaderboardEntry>,
    pub mean_rating_board: Vec<LeaderboardEntry>,
    pub top10_funny: Vec<FunnyHeadline>,
}

/// Ranks on `value / unit` quantized to 1e-6, so totals that tie exactly still tie after
/// the point constants are scaled and float rounding differs in the last bits.
fn rank_players(
    state: &GameState,
    mut rows: Vec<(PlayerId, f64)>,
    unit: f64,
) -> Vec<LeaderboardEntry> {
    let unit = if unit.is_finite() && unit > 0.0 { unit } else { 1.0 };
    let key = |v: f64| (v / unit * 1e6).round();
    let joined = |id: &PlayerId| state.players.get(id).map(|p| p.joined_at);
    rows.sort_by(|a, b| {
        key(b.1)
            .total_cmp(&key(a.1))
            .then_with(|| joined(&a.0).cmp(&joined(&b.0)))
            .then_with(|| a.0.cmp(&b.0))
    });
    rows.into_iter()
        .enumerate()
        .map(|(i, (player, value))| LeaderboardEntry {
            rank: i + 1,
            player,
            display_name: state
                .players
                .get(&player)
                .map(|p| p.display_name.clone())
                .unwrap_or_default(),
            value,
        })
        .collect()
}

/// Both boards plus the trailing-window list of the funniest completed headlines.
pub fn leaderboards(cfg: &ScoringConfig, state: &GameState, now: Timestamp) -> Leaderboards {
    let scores = score_states(cfg, state);
    let points_board = rank_players(
        state,
        scores.iter().map(|s| (s.player_id, s.total)).collect(),
        cfg.edit_base,
    );
    let mean_rating_board = rank_players(
        state,
        scores
            .iter()
            .filter(|s| s.fully_rated_edits >= cfg.mean_board_min_rated)
            .filter_map(|s| s.mean_received_rating.map(|m| (s.player_id, m)))
            .collect(),
        1.0,
    );

    let since = now - Duration::days(cfg.funny_window_days);
    let mut funny: Vec<&EditedHeadline> = state
        .completed
        .iter()
        .filter_map(|id| state.edits.get(id))
        .filter(|e| e.state == EditState::FullyRated)
        .filter(|e| e.completed_at.is_some_and(|t| t >= since && t <= now))
        .collect();
    funny.sort_by(|a, b| {
        b.grade_sum()
            .cmp(&a.grade_sum())
            .then_with(|| a.completion_seq.cmp(&b.completion_seq))
    });
    let top10_funny = funny
        .into_iter()
        .take(cfg.funny_list_len)
        .map(|e| FunnyHeadline {
            edit: e.id,
            editor: e.editor_id,
            original: state
                .sources
                .get(&e.source_id)
                .map(|s| s.text())
                .unwrap_or_default(),
            edited: state.edited_text(e),
            mean_grade: e.mean_grade().unwrap_or(0.0),
            completed_at: e.completed_at.unwrap_or(now),
        })
        .collect();

    Leaderboards {
        points_board,
        mean_rating_board,
        top10_funny,
    }
}

/// Player order of a board, ignoring values.
pub fn board_order(board: &[LeaderboardEntry]) -> Vec<PlayerId> {
    board.iter().map(|e| e.player).collect()
}
