//! Dataset quality metrics, behaviour curves and export.

mod alpha;
mod curves;
mod export;
mod report;

pub use alpha::krippendorff_alpha;
pub use curves::{
    bin_records, curve_records, improvement_curves, quantile_bins, spearman, trend_slope,
    trend_spearman, write_series_csv, CurvePoint, CurveRecords, ImprovementCurves, Record,
};
pub use export::{
    dataset_rows, export_dataset, parse_dataset, row_for, write_rows, DatasetRow, Delimiter, HEADER,
};
pub use report::{
    category_report, cost_per_datum, quality_report, quality_report_from_rows, time_accounting,
    unique_word_pct, CategoryStats, QualityReport, TimeAccounting,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("fewer than two units with at least two grades")]
    InsufficientData,
    #[error("no fully rated headlines")]
    EmptyDataset,
    #[error("i/o failure: {0}")]
    Io(String),
}

impl From<csv::Error> for AnalyticsError {
    fn from(e: csv::Error) -> Self {
        AnalyticsError::Io(e.to_string())
    }
}

/// Units for agreement: one per fully rated edited headline.
pub fn rating_units(state: &crate::state::GameState) -> Vec<Vec<u8>> {
    dataset_rows(state).iter().map(DatasetRow::grade_values).collect()
}
