use serde::{Deserialize, Serialize};

use crate::ingestion::IngestionConfig;
use crate::moderation::ModerationPolicy;
use crate::sampler::SamplerConfig;
use crate::scoring::ScoringConfig;

/// Participation limits and headline lifecycle knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GameRules {
    pub edit_cap: u32,
    pub rating_cap: u32,
    /// A source headline stops being editable after this many edits.
    pub max_edits_per_source: u32,
    /// A source headline is retired once this many distinct players skipped it.
    pub retire_after_skips: u32,
    /// Instant rating feedback needs at least this many earlier grades.
    pub feedback_min_prior: usize,
}

impl Default for GameRules {
    fn default() -> Self {
        Self {
            edit_cap: 150,
            rating_cap: 500,
            max_edits_per_source: 3,
            retire_after_skips: 5,
            feedback_min_prior: 2,
        }
    }
}

/// Everything the engine needs to validate commands and fold events.
///
/// Replaying a log under a different configuration may produce a different state,
/// since settlement and removal thresholds are applied during the fold.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub rules: GameRules,
    pub scoring: ScoringConfig,
    pub moderation: ModerationPolicy,
    pub sampler: SamplerConfig,
    pub ingestion: IngestionConfig,
}
