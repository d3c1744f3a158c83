use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use quipline_core::analytics::write_series_csv;
use quipline_core::event::encode_line;
use serde_json::json;

use crate::simulation::SimOutcome;
use crate::SimError;

/// Writes `events.ndjson`, `report.json` and one CSV per curve into `dir`.
pub fn write_outputs(outcome: &SimOutcome, dir: &Path) -> Result<(), SimError> {
    fs::create_dir_all(dir)?;

    let mut log = BufWriter::new(File::create(dir.join("events.ndjson"))?);
    for event in &outcome.events {
        log.write_all(encode_line(event).as_bytes())?;
        log.write_all(b"\n")?;
    }
    log.flush()?;

    let report = json!({
        "quality": outcome.report,
        "metrics": outcome.metrics,
        "agents": outcome.agents,
        "leaderboards": outcome.leaderboards,
    });
    let text = serde_json::to_string_pretty(&report).map_err(|e| SimError::Output(e.to_string()))?;
    fs::write(dir.join("report.json"), text + "\n")?;

    let series = [
        ("dataset_funniness_by_time.csv", &outcome.curves.dataset_funniness_by_time),
        ("edit_quality_by_experience.csv", &outcome.curves.edit_quality_by_experience),
        ("rating_deviation_by_experience.csv", &outcome.curves.rating_deviation_by_experience),
    ];
    for (name, points) in series {
        let file = File::create(dir.join(name))?;
        write_series_csv(points, file).map_err(|e| SimError::Output(e.to_string()))?;
    }
    Ok(())
}
