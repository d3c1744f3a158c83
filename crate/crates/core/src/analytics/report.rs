use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::alpha::krippendorff_alpha;
use super::export::{dataset_rows, DatasetRow};
use super::AnalyticsError;
use crate::state::GameState;
use crate::types::{Category, EditState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub size: usize,
    pub mean_funniness: f64,
    pub cost_per_datum_cents: f64,
    /// `None` when there are too few rated units to measure agreement.
    pub alpha: Option<f64>,
    pub unique_word_pct: f64,
    pub editor_count: Option<usize>,
    pub rater_count: Option<usize>,
}

impl QualityReport {
    pub fn cost_per_datum_display(&self) -> String {
        format!("{:.1}¢", self.cost_per_datum_cents)
    }

    pub fn mean_funniness_display(&self) -> String {
        format!("{:.2}", self.mean_funniness)
    }

    pub fn unique_word_pct_display(&self) -> String {
        format!("{:.1}%", self.unique_word_pct)
    }
}

pub fn cost_per_datum(budget_cents: f64, size: usize) -> Result<f64, AnalyticsError> {
    if size == 0 {
        return Err(AnalyticsError::EmptyDataset);
    }
    Ok(budget_cents / size as f64)
}

/// Distinct lowercased substitutes as a percentage of all substitutes.
pub fn unique_word_pct<'a, I>(substitutes: I) -> Result<f64, AnalyticsError>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut total = 0usize;
    let mut distinct = BTreeSet::new();
    for word in substitutes {
        total += 1;
        distinct.insert(word.to_lowercase());
    }
    if total == 0 {
        return Err(AnalyticsError::EmptyDataset);
    }
    Ok(100.0 * distinct.len() as f64 / total as f64)
}

/// Report over exported rows. Editor and rater counts are unknown at this level.
pub fn quality_report_from_rows(rows: &[DatasetRow], budget_cents: f64) -> Result<QualityReport, AnalyticsError> {
    if rows.is_empty() {
        return Err(AnalyticsError::EmptyDataset);
    }
    let units: Vec<Vec<u8>> = rows.iter().map(DatasetRow::grade_values).collect();
    let mean_funniness = units
        .iter()
        .filter(|u| !u.is_empty())
        .map(|u| u.iter().map(|&g| f64::from(g)).sum::<f64>() / u.len() as f64)
        .sum::<f64>()
        / rows.len() as f64;
    let alpha = match krippendorff_alpha(&units) {
        Ok(a) => Some(a),
        Err(AnalyticsError::InsufficientData) => None,
        Err(e) => return Err(e),
    };
    Ok(QualityReport {
        size: rows.len(),
        mean_funniness,
        cost_per_datum_cents: cost_per_datum(budget_cents, rows.len())?,
        alpha,
        unique_word_pct: unique_word_pct(rows.iter().map(|r| r.edit.as_str()))?,
        editor_count: None,
        rater_count: None,
    })
}

pub fn quality_report(state: &GameState, budget_cents: f64) -> Result<QualityReport, AnalyticsError> {
    let rows = dataset_rows(state);
    let mut report = quality_report_from_rows(&rows, budget_cents)?;
    let done = || {
        state
            .completed
            .iter()
            .filter_map(|id| state.edits.get(id))
            .filter(|e| e.state == EditState::FullyRated)
    };
    report.editor_count = Some(done().map(|e| e.editor_id).collect::<BTreeSet<_>>().len());
    report.rater_count = Some(
        done()
            .flat_map(|e| e.ratings.iter().map(|r| r.rater_id))
            .collect::<BTreeSet<_>>()
            .len(),
    );
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeAccounting {
    pub total_hours: f64,
    pub hourly_rate: Option<f64>,
}

/// Collective play time from per-action durations, and the budget spread over it.
pub fn time_accounting(
    edits: u64,
    ratings: u64,
    secs_per_edit: f64,
    secs_per_rating: f64,
    budget: Option<f64>,
) -> TimeAccounting {
    let total_hours = (edits as f64 * secs_per_edit + ratings as f64 * secs_per_rating) / 3600.0;
    TimeAccounting {
        total_hours,
        hourly_rate: budget.filter(|_| total_hours > 0.0).map(|b| b / total_hours),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryStats {
    pub category: Category,
    pub supplied: usize,
    pub pct_supplied: f64,
    pub pct_edited: f64,
    pub pct_fully_rated: f64,
    pub mean_grade: Option<f64>,
}

/// Per-category supply, editing coverage, share of the fully rated set and mean grade.
pub fn category_report(state: &GameState) -> Vec<CategoryStats> {
    let total_supplied = state.sources.len();
    let fully_rated: Vec<_> = state
        .completed
        .iter()
        .filter_map(|id| state.edits.get(id))
        .filter(|e| e.state == EditState::FullyRated)
        .collect();
    let category_of = |sid| state.sources.get(&sid).map(|s| s.category);
    let pct = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            100.0 * num as f64 / den as f64
        }
    };

    Category::ALL
        .iter()
        .map(|&category| {
            let sources: Vec<_> = state
                .sources
                .values()
                .filter(|s| s.category == category)
                .collect();
            let edited = sources.iter().filter(|s| s.edit_count > 0).count();
            let rated: Vec<f64> = fully_rated
                .iter()
                .filter(|e| category_of(e.source_id) == Some(category))
                .filter_map(|e| e.mean_grade())
                .collect();
            CategoryStats {
                category,
                supplied: sources.len(),
                pct_supplied: pct(sources.len(), total_supplied),
                pct_edited: pct(edited, sources.len()),
                pct_fully_rated: pct(rated.len(), fully_rated.len()),
                mean_grade: (!rated.is_empty())
                    .then(|| rated.iter().sum::<f64>() / rated.len() as f64),
            }
        })
        .collect()
}
