//! Abuse controls: word blacklist, minimum dwell before a grade, and lowballing escalation.

use std::collections::BTreeSet;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::state::PlayerStats;
use crate::types::{Standing, Timestamp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModerationPolicy {
    /// Lowercase words or stems.
    pub blacklist: BTreeSet<String>,
    pub min_dwell_ms: i64,
    pub flag_removal_threshold: u32,
    pub lowball_window: usize,
    pub lowball_trigger: f64,
}

impl Default for ModerationPolicy {
    fn default() -> Self {
        Self {
            blacklist: BTreeSet::new(),
            min_dwell_ms: 2000,
            flag_removal_threshold: 1,
            lowball_window: 30,
            lowball_trigger: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlacklistVerdict {
    Pass,
    Reject { matched: String },
}

/// Parses a blacklist file: one token per line, `#` starts a comment.
pub fn parse_blacklist<R: BufRead>(reader: R) -> std::io::Result<BTreeSet<String>> {
    let mut words = BTreeSet::new();
    for line in reader.lines() {
        let line = line?;
        let entry = line.split('#').next().unwrap_or("").trim();
        if !entry.is_empty() {
            words.insert(entry.to_lowercase());
        }
    }
    Ok(words)
}

/// Crude suffix stripper, enough to catch inflections of listed words.
pub fn stem(word: &str) -> String {
    const SUFFIXES: [&str; 8] = ["ings", "ing", "edly", "ed", "ies", "es", "ly", "s"];
    for suffix in SUFFIXES {
        if let Some(base) = word.strip_suffix(suffix) {
            if base.chars().count() >= 3 {
                return if suffix == "ies" {
                    format!("{base}y")
                } else {
                    drop_final_e(base).to_string()
                };
            }
        }
    }
    drop_final_e(word).to_string()
}

fn drop_final_e(word: &str) -> &str {
    match word.strip_suffix('e') {
        Some(base) if base.chars().count() >= 3 => base,
        _ => word,
    }
}

impl ModerationPolicy {
    pub fn check_blacklist(&self, word: &str) -> BlacklistVerdict {
        let normalized = word.trim().to_lowercase();
        if self.blacklist.contains(&normalized) {
            return BlacklistVerdict::Reject {
                matched: normalized,
            };
        }
        let stemmed = stem(&normalized);
        match self.blacklist.iter().find(|b| **b == stemmed || stem(b) == stemmed) {
            Some(entry) => BlacklistVerdict::Reject {
                matched: entry.clone(),
            },
            None => BlacklistVerdict::Pass,
        }
    }

    /// True when the grade came at least `min_dwell_ms` after the headline was served.
    pub fn check_dwell(&self, served_at: Timestamp, submitted_at: Timestamp) -> bool {
        (submitted_at - served_at).num_milliseconds() >= self.min_dwell_ms
    }

    /// Looks at the most recent settled ratings (only those after a prior warning) and
    /// escalates when too many sit more than one grade below the other raters' mean.
    pub fn detect_lowballing(&self, standing: Standing, stats: &PlayerStats) -> LowballVerdict {
        if standing == Standing::Suspended || self.lowball_window == 0 {
            return LowballVerdict::None;
        }
        let start = stats.warned_at_settled.unwrap_or(0);
        let considered = &stats.settled[start.min(stats.settled.len())..];
        if considered.len() < self.lowball_window {
            return LowballVerdict::None;
        }
        let window = &considered[considered.len() - self.lowball_window..];
        let low = window.iter().filter(|s| is_lowball(s.grade, s.others_sum)).count();
        let fraction = low as f64 / window.len() as f64;
        if fraction <= self.lowball_trigger {
            LowballVerdict::None
        } else if standing == Standing::Warned {
            LowballVerdict::Suspend
        } else {
            LowballVerdict::Warn
        }
    }
}

/// grade < mean(others) - 1, in integers over the four other grades.
fn is_lowball(grade: u8, others_sum: u32) -> bool {
    4 * i64::from(grade) < i64::from(others_sum) - 4
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowballVerdict {
    None,
    Warn,
    Suspend,
}
