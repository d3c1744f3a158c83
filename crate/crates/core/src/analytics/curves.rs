//! Behaviour-over-time series: dataset funniness by completion order, edit quality by
//! editor experience, and rating deviation by rater experience.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::state::GameState;
use crate::types::EditState;

/// One observation: the experience index (0-based) and the measured value.
pub type Record = (usize, f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub bin: usize,
    pub mean: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ImprovementCurves {
    pub dataset_funniness_by_time: Vec<CurvePoint>,
    pub edit_quality_by_experience: Vec<CurvePoint>,
    pub rating_deviation_by_experience: Vec<CurvePoint>,
}

/// Raw records behind each curve, before binning.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CurveRecords {
    pub dataset_funniness: Vec<Record>,
    pub edit_quality: Vec<Record>,
    pub rating_deviation: Vec<Record>,
}

pub fn curve_records(state: &GameState) -> CurveRecords {
    let mut out = CurveRecords::default();

    for (order, id) in state.completed.iter().enumerate() {
        if let Some(mean) = state
            .edits
            .get(id)
            .filter(|e| e.state == EditState::FullyRated)
            .and_then(|e| e.mean_grade())
        {
            out.dataset_funniness.push((order, mean));
        }
    }

    for (player, stats) in &state.stats {
        for (i, id) in stats.edits.iter().enumerate() {
            if let Some(mean) = state
                .edits
                .get(id)
                .filter(|e| e.state == EditState::FullyRated)
                .and_then(|e| e.mean_grade())
            {
                out.edit_quality.push((i, mean));
            }
        }
        for (i, id) in stats.ratings.iter().enumerate() {
            let Some(e) = state.edits.get(id).filter(|e| e.state == EditState::FullyRated) else {
                continue;
            };
            let Some(own) = e.ratings.iter().find(|r| r.rater_id == *player) else {
                continue;
            };
            let others = e.grades_excluding(*player);
            let mean = others.iter().map(|g| f64::from(g.value())).sum::<f64>() / others.len() as f64;
            out.rating_deviation
                .push((i, (f64::from(own.grade.value()) - mean).abs()));
        }
    }
    out
}

/// Averages records in consecutive index bins of `bin_size`.
pub fn bin_records(records: &[Record], bin_size: usize) -> Vec<CurvePoint> {
    let bin_size = bin_size.max(1);
    let mut bins: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for &(index, value) in records {
        let slot = bins.entry(index / bin_size).or_insert((0.0, 0));
        slot.0 += value;
        slot.1 += 1;
    }
    bins.into_iter()
        .map(|(bin, (sum, count))| CurvePoint {
            bin,
            mean: sum / count as f64,
            count,
        })
        .collect()
}

/// Splits records, ordered by index, into `n` groups of near-equal size (e.g. deciles).
pub fn quantile_bins(records: &[Record], n: usize) -> Vec<CurvePoint> {
    if records.is_empty() {
        return Vec::new();
    }
    let mut sorted = records.to_vec();
    sorted.sort_by_key(|r| r.0);
    let n = n.clamp(1, sorted.len());
    let len = sorted.len();
    (0..n)
        .map(|bin| {
            let chunk = &sorted[bin * len / n..(bin + 1) * len / n];
            CurvePoint {
                bin,
                mean: chunk.iter().map(|r| r.1).sum::<f64>() / chunk.len() as f64,
                count: chunk.len(),
            }
        })
        .collect()
}

pub fn improvement_curves(state: &GameState, bin_size: usize) -> ImprovementCurves {
    let records = curve_records(state);
    ImprovementCurves {
        dataset_funniness_by_time: bin_records(&records.dataset_funniness, bin_size),
        edit_quality_by_experience: bin_records(&records.edit_quality, bin_size),
        rating_deviation_by_experience: bin_records(&records.rating_deviation, bin_size),
    }
}

/// Spearman rank correlation between bin position and bin mean.
pub fn trend_spearman(points: &[CurvePoint]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|p| p.bin as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean).collect();
    spearman(&xs, &ys)
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let rx = ranks(xs);
    let ry = ranks(ys);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

/// Ordinary least-squares slope of bin mean against bin index.
pub fn trend_slope(points: &[CurvePoint]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.bin as f64).sum::<f64>() / n;
    let my = points.iter().map(|p| p.mean).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for p in points {
        num += (p.bin as f64 - mx) * (p.mean - my);
        den += (p.bin as f64 - mx).powi(2);
    }
    (den > 0.0).then(|| num / den)
}

/// Writes one CSV series with `bin,mean,count` columns.
pub fn write_series_csv<W: Write>(points: &[CurvePoint], out: W) -> Result<(), AnalyticsError> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["bin", "mean", "count"])?;
    for p in points {
        writer.write_record([p.bin.to_string(), format!("{:.6}", p.mean), p.count.to_string()])?;
    }
    writer.flush().map_err(|e| AnalyticsError::Io(e.to_string()))?;
    Ok(())
}
