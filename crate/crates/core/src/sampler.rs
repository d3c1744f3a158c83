//! Rating-queue ordering.
//!
//! Each in-pool headline gets a weight that is the product of four factors:
//!
//! | factor      | value                                              |
//! |-------------|----------------------------------------------------|
//! | volume      | `1 + log2(1 + editor's edit count)`                |
//! | newcomer    | `2` while the editor has received fewer than `newcomer_threshold` grades, else `1` |
//! | recency     | `exp(-age_hours / recency_hours)`                  |
//! | fill        | `1 + grades already received`                      |
//!
//! The ordering is recomputed on a fixed cadence and cached; serving filters the cached
//! order against live state so completed or removed headlines never leak through.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use crate::config::EngineConfig;
use crate::error::{CapKind, GameError, Result};
use crate::state::GameState;
use crate::types::{Category, EditId, EditState, HeadlineRef, PlayerId, Timestamp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub refresh_interval_secs: u64,
    pub newcomer_threshold: u32,
    pub recency_hours: f64,
    pub jitter_seed: u64,
    /// Lifetime limit on how many headlines of one editor a rater may grade.
    pub per_pair_cap: Option<u32>,
    /// Disables the fill factor when false.
    pub fill_priority: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            refresh_interval_secs: 300,
            newcomer_threshold: 5,
            recency_hours: 24.0,
            jitter_seed: 0,
            per_pair_cap: Some(10),
            fill_priority: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingWeight {
    pub headline_id: EditId,
    pub w_volume: f64,
    pub w_newcomer: f64,
    pub w_recency: f64,
    pub w_fill: f64,
    pub weight: f64,
}

/// Inputs to the weight of one headline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightInputs {
    pub editor_edit_count: u32,
    pub editor_ratings_received: u32,
    pub age_hours: f64,
    pub rating_count: usize,
}

pub fn weight_for(cfg: &SamplerConfig, id: EditId, inputs: WeightInputs) -> SamplingWeight {
    let w_volume = 1.0 + (1.0 + f64::from(inputs.editor_edit_count)).log2();
    let w_newcomer = if inputs.editor_ratings_received < cfg.newcomer_threshold {
        2.0
    } else {
        1.0
    };
    let w_recency = (-inputs.age_hours.max(0.0) / cfg.recency_hours).exp();
    let w_fill = if cfg.fill_priority {
        1.0 + inputs.rating_count as f64
    } else {
        1.0
    };
    SamplingWeight {
        headline_id: id,
        w_volume,
        w_newcomer,
        w_recency,
        w_fill,
        weight: w_volume * w_newcomer * w_recency * w_fill,
    }
}

/// Weights for every headline currently in the rating pool, in id order.
pub fn compute_weights(cfg: &SamplerConfig, state: &GameState, now: Timestamp) -> Vec<SamplingWeight> {
    state
        .pool
        .iter()
        .filter_map(|id| state.edits.get(id))
        .map(|e| {
            let editor = state.players.get(&e.editor_id);
            let stats = state.stats.get(&e.editor_id);
            let age_ms = (now - e.created_at).num_milliseconds();
            weight_for(
                cfg,
                e.id,
                WeightInputs {
                    editor_edit_count: editor.map_or(0, |p| p.edit_count),
                    editor_ratings_received: stats.map_or(0, |s| s.ratings_received),
                    age_hours: age_ms as f64 / 3_600_000.0,
                    rating_count: e.ratings.len(),
                },
            )
        })
        .collect()
}

/// splitmix64 finalizer; deterministic tie-break noise keyed by seed and headline.
fn jitter(seed: u64, id: EditId) -> u64 {
    let mut z = seed ^ id.0.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// An immutable ordering produced by one refresh.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RatingOrder {
    pub computed_at: Option<Timestamp>,
    pub entries: Vec<SamplingWeight>,
}

pub fn order_weights(cfg: &SamplerConfig, weights: Vec<SamplingWeight>) -> Vec<SamplingWeight> {
    // Keys are unique per headline, so an unstable sort is still deterministic.
    let mut keyed: Vec<(u64, SamplingWeight)> =
        weights.into_iter().map(|w| (jitter(cfg.jitter_seed, w.headline_id), w)).collect();
    keyed.sort_unstable_by(|(ja, a), (jb, b)| {
        b.weight
            .total_cmp(&a.weight)
            .then_with(|| ja.cmp(jb))
            .then_with(|| a.headline_id.cmp(&b.headline_id))
    });
    keyed.into_iter().map(|(_, w)| w).collect()
}

#[derive(Debug)]
pub struct Sampler {
    config: SamplerConfig,
    rating_cap: u32,
    interval_secs: AtomicU64,
    snapshot: RwLock<Arc<RatingOrder>>,
}

impl Sampler {
    pub fn new(config: SamplerConfig, rating_cap: u32) -> Self {
        let interval = config.refresh_interval_secs.max(1);
        Self {
            config,
            rating_cap,
            interval_secs: AtomicU64::new(interval),
            snapshot: RwLock::new(Arc::new(RatingOrder::default())),
        }
    }

    pub fn for_engine(config: &EngineConfig) -> Self {
        Self::new(config.sampler.clone(), config.rules.rating_cap)
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    pub fn refresh_interval(&self) -> Duration {
        Duration::from_secs(self.interval_secs.load(Ordering::Relaxed))
    }

    /// Sets the recomputation cadence. Zero is rejected.
    pub fn refresh_schedule(&self, interval: Duration) -> std::result::Result<(), SamplerError> {
        let secs = interval.as_secs();
        if secs == 0 {
            return Err(SamplerError::ZeroInterval);
        }
        self.interval_secs.store(secs, Ordering::Relaxed);
        Ok(())
    }

    pub fn snapshot(&self) -> Arc<RatingOrder> {
        self.snapshot.read().clone()
    }

    pub fn refresh(&self, state: &GameState, now: Timestamp) -> Arc<RatingOrder> {
        let order = Arc::new(RatingOrder {
            computed_at: Some(now),
            entries: order_weights(&self.config, compute_weights(&self.config, state, now)),
        });
        *self.snapshot.write() = order.clone();
        order
    }

    /// Refreshes when the cached order is older than the interval. Returns whether it did.
    pub fn maybe_refresh(&self, state: &GameState, now: Timestamp) -> bool {
        let due = match self.snapshot.read().computed_at {
            None => true,
            Some(at) => {
                let elapsed = (now - at).num_seconds();
                elapsed < 0 || elapsed as u64 >= self.interval_secs.load(Ordering::Relaxed)
            }
        };
        if due {
            self.refresh(state, now);
        }
        due
    }

    /// Up to `k` headlines for `rater`, best first, from the cached order.
    pub fn serve_for_rating(
        &self,
        state: &GameState,
        rater: PlayerId,
        k: usize,
        category: Option<Category>,
    ) -> Result<Vec<EditId>> {
        let player = state.player(rater)?;
        if player.is_suspended() {
            return Err(GameError::SuspendedPlayer(rater));
        }
        if player.rating_count >= self.rating_cap {
            return Err(GameError::CapReached(CapKind::Ratings));
        }
        let snapshot = self.snapshot();
        Ok(snapshot
            .entries
            .iter()
            .filter(|w| {
                eligible(state, &self.config, rater, w.headline_id, category)
            })
            .take(k)
            .map(|w| w.headline_id)
            .collect())
    }
}

/// Whether `rater` may be shown `id` right now.
pub fn eligible(
    state: &GameState,
    cfg: &SamplerConfig,
    rater: PlayerId,
    id: EditId,
    category: Option<Category>,
) -> bool {
    let Some(e) = state.edits.get(&id) else {
        return false;
    };
    if e.state != EditState::InPool || e.editor_id == rater || e.has_rater(rater) {
        return false;
    }
    if let Some(p) = state.players.get(&rater) {
        if p.skipped.contains(&HeadlineRef::Edit(id)) {
            return false;
        }
    }
    if let Some(cap) = cfg.per_pair_cap {
        if state.pair_count(rater, e.editor_id) >= cap {
            return false;
        }
    }
    if let Some(cat) = category {
        if state.sources.get(&e.source_id).map(|s| s.category) != Some(cat) {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SamplerError {
    #[error("refresh interval must be positive")]
    ZeroInterval,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs(edits: u32, received: u32, age: f64, ratings: usize) -> WeightInputs {
        WeightInputs {
            editor_edit_count: edits,
            editor_ratings_received: received,
            age_hours: age,
            rating_count: ratings,
        }
    }

    #[test]
    fn newcomer_fresh_headline_weighs_four() {
        let w = weight_for(&SamplerConfig::default(), EditId(1), inputs(1, 0, 0.0, 0));
        assert!((w.weight - 4.0).abs() < 1e-12);
        assert_eq!(w.w_newcomer, 2.0);
    }

    #[test]
    fn fill_ratio_is_five_to_one() {
        let cfg = SamplerConfig::default();
        let full = weight_for(&cfg, EditId(1), inputs(7, 40, 3.0, 4));
        let empty = weight_for(&cfg, EditId(2), inputs(7, 40, 3.0, 0));
        assert!((full.weight / empty.weight - 5.0).abs() < 1e-12);
    }

    #[test]
    fn recency_ratio_is_e_per_day() {
        let cfg = SamplerConfig::default();
        let fresh = weight_for(&cfg, EditId(1), inputs(7, 40, 0.0, 2));
        let old = weight_for(&cfg, EditId(2), inputs(7, 40, 24.0, 2));
        assert!((fresh.weight / old.weight - std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn zero_interval_rejected_default_is_five_minutes() {
        let s = Sampler::new(SamplerConfig::default(), 500);
        assert_eq!(s.refresh_interval(), Duration::from_secs(300));
        assert_eq!(s.refresh_schedule(Duration::ZERO), Err(SamplerError::ZeroInterval));
        s.refresh_schedule(Duration::from_secs(60)).unwrap();
        assert_eq!(s.refresh_interval(), Duration::from_secs(60));
    }

    #[test]
    fn jitter_breaks_ties_deterministically() {
        let cfg = SamplerConfig::default();
        let ws: Vec<_> = (1..=20)
            .map(|i| weight_for(&cfg, EditId(i), inputs(3, 10, 1.0, 1)))
            .collect();
        let a = order_weights(&cfg, ws.clone());
        let b = order_weights(&cfg, ws.clone());
        assert_eq!(a, b);
        let ids: Vec<u64> = a.iter().map(|w| w.headline_id.0).collect();
        assert_ne!(ids, (1..=20).collect::<Vec<_>>(), "jitter should shuffle ties");
        let other = order_weights(
            &SamplerConfig {
                jitter_seed: 99,
                ..cfg
            },
            ws,
        );
        assert_ne!(other, a);
    }
}
