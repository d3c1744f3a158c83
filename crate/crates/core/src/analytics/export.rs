//! Dataset export in the `id,original,edit,grades,meanGrade` layout.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::state::GameState;
use crate::types::{EditState, EditedHeadline};

pub const HEADER: [&str; 5] = ["id", "original", "edit", "grades", "meanGrade"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub id: u64,
    /// Source headline with the replaced token written as `<token/>`.
    pub original: String,
    pub edit: String,
    /// Grade digits sorted descending, e.g. `"32110"`.
    pub grades: String,
    #[serde(rename = "meanGrade")]
    pub mean_grade: f64,
}

impl DatasetRow {
    pub fn grade_values(&self) -> Vec<u8> {
        self.grades
            .chars()
            .filter_map(|c| c.to_digit(10))
            .map(|d| d as u8)
            .collect()
    }

    pub fn mean_grade_text(&self) -> String {
        format!("{:.1}", self.mean_grade)
    }

    /// Edited headline text: the marked token replaced by the substitute.
    pub fn edited_text(&self) -> String {
        match (self.original.find('<'), self.original.find("/>")) {
            (Some(start), Some(end)) if end > start => format!(
                "{}{}{}",
                &self.original[..start],
                self.edit,
                &self.original[end + 2..]
            ),
            _ => self.original.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Delimiter {
    #[default]
    Comma,
    Tab,
}

impl Delimiter {
    fn byte(self) -> u8 {
        match self {
            Delimiter::Comma => b',',
            Delimiter::Tab => b'\t',
        }
    }
}

pub fn row_for(state: &GameState, edit: &EditedHeadline) -> DatasetRow {
    let tokens = state
        .sources
        .get(&edit.source_id)
        .map(|s| s.tokens.clone())
        .unwrap_or_default();
    let original = tokens
        .iter()
        .enumerate()
        .map(|(i, t)| {
            if i == edit.replaced_index {
                format!("<{t}/>")
            } else {
                t.clone()
            }
        })
        .collect::<Vec<_>>()
        .join(" ");
    let mut grades: Vec<u8> = edit.ratings.iter().map(|r| r.grade.value()).collect();
    grades.sort_unstable_by(|a, b| b.cmp(a));
    DatasetRow {
        id: edit.id.0,
        original,
        edit: edit.substitute.clone(),
        grades: grades.iter().map(|g| char::from(b'0' + g)).collect(),
        mean_grade: edit.mean_grade().unwrap_or(0.0),
    }
}

/// Fully rated, non-removed headlines in completion order.
pub fn dataset_rows(state: &GameState) -> Vec<DatasetRow> {
    state
        .completed
        .iter()
        .filter_map(|id| state.edits.get(id))
        .filter(|e| e.state == EditState::FullyRated)
        .map(|e| row_for(state, e))
        .collect()
}

pub fn write_rows<W: Write>(rows: &[DatasetRow], out: W, delimiter: Delimiter) -> Result<usize, AnalyticsError> {
    let mut writer = csv::WriterBuilder::new()
        .delimiter(delimiter.byte())
        .from_writer(out);
    writer.write_record(HEADER)?;
    for row in rows {
        writer.write_record([
            row.id.to_string(),
            row.original.clone(),
            row.edit.clone(),
            row.grades.clone(),
            row.mean_grade_text(),
        ])?;
    }
    writer.flush().map_err(|e| AnalyticsError::Io(e.to_string()))?;
    Ok(rows.len())
}

pub fn export_dataset<W: Write>(state: &GameState, out: W, delimiter: Delimiter) -> Result<usize, AnalyticsError> {
    write_rows(&dataset_rows(state), out, delimiter)
}

/// Reads rows back by header name; extra columns are ignored.
pub fn parse_dataset<R: Read>(input: R, delimiter: Delimiter) -> Result<Vec<DatasetRow>, AnalyticsError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter.byte())
        .from_reader(input);
    reader
        .deserialize::<DatasetRow>()
        .map(|r| r.map_err(AnalyticsError::from))
        .collect()
}
