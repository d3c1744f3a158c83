use quipline_core::PlayerId;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::config::{Learning, Strategy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentProfile {
    pub strategy: Strategy,
    /// Latent mean funniness of this agent's edits, in [0, 3].
    pub editor_skill: f64,
    /// Standard deviation of grade noise.
    pub rating_noise: f64,
    pub learning: Learning,
    /// Probability of choosing to edit when nothing else decides.
    pub edit_propensity: f64,
    /// Seconds spent reading a headline before grading it.
    pub dwell_secs: (f64, f64),
    /// Whether the agent steers by the balance advice when balance points are on.
    pub balance_aware: bool,
}

impl AgentProfile {
    pub fn sample<R: Rng>(strategy: Strategy, learning: &Learning, rng: &mut R) -> Self {
        let (skill, noise, propensity, dwell, aware) = match strategy {
            Strategy::Honest => (
                rng.random_range(0.6..1.8),
                rng.random_range(0.6..1.2),
                rng.random_range(0.03..0.5),
                (2.5, 8.0),
                true,
            ),
            Strategy::Balanced => (
                rng.random_range(1.8..2.4),
                rng.random_range(0.3..0.6),
                rng.random_range(0.1..0.2),
                (3.0, 8.0),
                true,
            ),
            Strategy::Lowballer => (
                rng.random_range(0.6..1.4),
                0.0,
                rng.random_range(0.05..0.2),
                (2.5, 5.0),
                false,
            ),
            Strategy::Spammer => (
                rng.random_range(0.0..0.4),
                1.5,
                0.9,
                (0.3, 1.5),
                false,
            ),
        };
        Self {
            strategy,
            editor_skill: skill,
            rating_noise: noise,
            learning: learning.clone(),
            edit_propensity: propensity,
            dwell_secs: dwell,
            balance_aware: aware,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Agent {
    pub player: PlayerId,
    pub profile: AgentProfile,
    pub skill: f64,
    pub noise: f64,
}

impl Agent {
    pub fn new(player: PlayerId, profile: AgentProfile) -> Self {
        Self {
            player,
            skill: profile.editor_skill,
            noise: profile.rating_noise,
            profile,
        }
    }

    /// Latent quality of a new edit: skill plus noise, kept on the grade scale.
    pub fn edit_quality<R: Rng>(&self, edit_noise: f64, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        (self.skill + edit_noise * z).clamp(0.0, 3.0)
    }

    pub fn grade<R: Rng>(&self, quality: f64, rng: &mut R) -> i64 {
        match self.profile.strategy {
            Strategy::Lowballer => 0,
            Strategy::Spammer => rng.random_range(0..=3),
            Strategy::Honest | Strategy::Balanced => {
                let z: f64 = StandardNormal.sample(rng);
                (quality + self.noise * z).round().clamp(0.0, 3.0) as i64
            }
        }
    }

    pub fn dwell_ms<R: Rng>(&self, rng: &mut R) -> i64 {
        let (lo, hi) = self.profile.dwell_secs;
        (rng.random_range(lo..hi) * 1000.0) as i64
    }

    pub fn after_rating(&mut self) {
        self.noise *= 1.0 - self.profile.learning.noise_decay;
    }

    pub fn after_edit(&mut self) {
        self.skill = (self.skill * (1.0 + self.profile.learning.skill_growth)).min(3.0);
    }
}
