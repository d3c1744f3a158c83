//! Player-facing performance feedback.

use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::state::GameState;
use crate::types::{EditId, EditState, EditedHeadline, Grade, PlayerId, SourceId, Timestamp};

/// How a grade compares with the mean of other raters' grades.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Consensus {
    Close,
    Higher,
    Lower,
}

/// Close when within half a grade of the others' mean, otherwise higher or lower.
///
/// Evaluated in integers: `|n*grade - sum| <= n/2` is `|grade - mean| <= 0.5`.
pub fn compare_to_consensus(grade: Grade, others: &[Grade]) -> Result<Consensus> {
    if others.is_empty() {
        return Err(GameError::EmptyOthers);
    }
    let n = others.len() as i64;
    let sum: i64 = others.iter().map(|g| i64::from(g.value())).sum();
    let diff = n * i64::from(grade.value()) - sum;
    Ok(if 2 * diff.abs() <= n {
        Consensus::Close
    } else if diff > 0 {
        Consensus::Higher
    } else {
        Consensus::Lower
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditSummary {
    pub edit: EditId,
    pub source: SourceId,
    pub original: String,
    pub edited: String,
    pub substitute: String,
    pub grades: Vec<u8>,
    pub mean_grade: Option<f64>,
    pub state: EditState,
    pub created_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditorFeedback {
    pub top5: Vec<EditSummary>,
    pub recent10: Vec<EditSummary>,
    pub abusive: Vec<EditSummary>,
}

fn summarize(state: &GameState, e: &EditedHeadline) -> EditSummary {
    EditSummary {
        edit: e.id,
        source: e.source_id,
        original: state
            .sources
            .get(&e.source_id)
            .map(|s| s.text())
            .unwrap_or_default(),
        edited: state.edited_text(e),
        substitute: e.substitute.clone(),
        grades: e.ratings.iter().map(|r| r.grade.value()).collect(),
        mean_grade: e.mean_grade(),
        state: e.state,
        created_at: e.created_at,
    }
}

pub fn editor_feedback(state: &GameState, player: PlayerId) -> Result<EditorFeedback> {
    let stats = state.player_stats(player)?;
    let edits: Vec<&EditedHeadline> = stats
        .edits
        .iter()
        .filter_map(|id| state.edits.get(id))
        .collect();

    let mut ranked: Vec<&EditedHeadline> = edits
        .iter()
        .copied()
        .filter(|e| e.state != EditState::FlaggedRemoved)
        .collect();
    // Mean descending (unrated last), older first on ties.
    ranked.sort_by(|a, b| {
        let ma = a.mean_grade().unwrap_or(f64::NEG_INFINITY);
        let mb = b.mean_grade().unwrap_or(f64::NEG_INFINITY);
        mb.total_cmp(&ma)
            .then_with(|| a.created_at.cmp(&b.created_at))
            .then_with(|| a.id.cmp(&b.id))
    });

    let mut recent = edits.clone();
    recent.sort_by(|a, b| b.created_at.cmp(&a.created_at).then_with(|| b.id.cmp(&a.id)));

    Ok(EditorFeedback {
        top5: ranked.iter().take(5).map(|e| summarize(state, e)).collect(),
        recent10: recent.iter().take(10).map(|e| summarize(state, e)).collect(),
        abusive: edits
            .iter()
            .filter(|e| e.state == EditState::FlaggedRemoved)
            .map(|e| summarize(state, e))
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatedSummary {
    pub edit: EditId,
    pub edited: String,
    pub grade: u8,
    pub rated_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaterFeedback {
    pub histogram: [u32; 4],
    pub pct_over: f64,
    pub pct_under: f64,
    pub recent10: Vec<RatedSummary>,
}

pub fn rater_feedback(state: &GameState, player: PlayerId) -> Result<RaterFeedback> {
    let stats = state.player_stats(player)?;
    let mut histogram = [0u32; 4];
    let mut settled = 0u32;
    let mut over = 0u32;
    let mut under = 0u32;
    let mut recent = Vec::new();

    for id in &stats.ratings {
        let Some(edit) = state.edits.get(id) else {
            continue;
        };
        let Some(own) = edit.ratings.iter().find(|r| r.rater_id == player) else {
            continue;
        };
        histogram[usize::from(own.grade.value())] += 1;
        recent.push(RatedSummary {
            edit: edit.id,
            edited: state.edited_text(edit),
            grade: own.grade.value(),
            rated_at: own.submitted_at,
        });
        if edit.state == EditState::FullyRated {
            settled += 1;
            match compare_to_consensus(own.grade, &edit.grades_excluding(player))? {
                Consensus::Higher => over += 1,
                Consensus::Lower => under += 1,
                Consensus::Close => {}
            }
        }
    }

    let pct = |n: u32| {
        if settled == 0 {
            0.0
        } else {
            100.0 * f64::from(n) / f64::from(settled)
        }
    };
    recent.reverse();
    recent.truncate(10);
    Ok(RaterFeedback {
        histogram,
        pct_over: pct(over),
        pct_under: pct(under),
        recent10: recent,
    })
}
