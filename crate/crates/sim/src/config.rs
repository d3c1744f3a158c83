use std::fmt;
use std::str::FromStr;

use quipline_core::EngineConfig;
use serde::{Deserialize, Serialize};

use crate::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Grades what they see, with noise.
    Honest,
    /// Always grades 0.
    Lowballer,
    /// Edits as fast as possible with no care and rushes through ratings.
    Spammer,
    /// Skilled and steers its rating/edit mix by the balance advice.
    Balanced,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Honest,
        Strategy::Lowballer,
        Strategy::Spammer,
        Strategy::Balanced,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Honest => "honest",
            Strategy::Lowballer => "lowballer",
            Strategy::Spammer => "spammer",
            Strategy::Balanced => "balanced",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim())
            .ok_or_else(|| SimError::InvalidConfig(format!("unknown strategy {s:?}")))
    }
}

/// Population shares per strategy. Shares need not sum to one; they are normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileMix {
    pub honest: f64,
    pub lowballer: f64,
    pub spammer: f64,
    pub balanced: f64,
}

impl Default for ProfileMix {
    fn default() -> Self {
        Self {
            honest: 0.8,
            lowballer: 0.05,
            spammer: 0.05,
            balanced: 0.1,
        }
    }
}

impl ProfileMix {
    pub fn only(strategy: Strategy) -> Self {
        let mut mix = Self {
            honest: 0.0,
            lowballer: 0.0,
            spammer: 0.0,
            balanced: 0.0,
        };
        *mix.share_mut(strategy) = 1.0;
        mix
    }

    pub fn share(&self, strategy: Strategy) -> f64 {
        match strategy {
            Strategy::Honest => self.honest,
            Strategy::Lowballer => self.lowballer,
            Strategy::Spammer => self.spammer,
            Strategy::Balanced => self.balanced,
        }
    }

    fn share_mut(&mut self, strategy: Strategy) -> &mut f64 {
        match strategy {
            Strategy::Honest => &mut self.honest,
            Strategy::Lowballer => &mut self.lowballer,
            Strategy::Spammer => &mut self.spammer,
            Strategy::Balanced => &mut self.balanced,
        }
    }

    /// Agent counts by largest remainder, in `Strategy::ALL` order.
    pub fn allocate(&self, n: usize) -> Vec<(Strategy, usize)> {
        let total: f64 = Strategy::ALL.iter().map(|s| self.share(*s)).sum();
        let exact: Vec<f64> = Strategy::ALL
            .iter()
            .map(|s| self.share(*s) / total * n as f64)
            .collect();
        let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
        let mut order: Vec<usize> = (0..exact.len()).collect();
        order.sort_by(|&a, &b| {
            (exact[b] - exact[b].floor())
                .total_cmp(&(exact[a] - exact[a].floor()))
                .then(a.cmp(&b))
        });
        let short = n - counts.iter().sum::<usize>();
        for &i in order.iter().take(short) {
            counts[i] += 1;
        }
        Strategy::ALL.into_iter().zip(counts).collect()
    }

    fn validate(&self) -> Result<(), SimError> {
        let shares = Strategy::ALL.map(|s| self.share(s));
        if shares.iter().any(|s| !s.is_finite() || *s < 0.0) || shares.iter().sum::<f64>() <= 0.0 {
            return Err(SimError::InvalidConfig(
                "profile shares must be non-negative with a positive sum".into(),
            ));
        }
        Ok(())
    }
}

/// Parses `honest=0.8,lowballer=0.1,...`. Unlisted strategies get share 0.
impl FromStr for ProfileMix {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut mix = ProfileMix {
            honest: 0.0,
            lowballer: 0.0,
            spammer: 0.0,
            balanced: 0.0,
        };
        for part in s.split(',').filter(|p| !p.trim().is_empty()) {
            let (name, value) = part
                .split_once('=')
                .ok_or_else(|| SimError::InvalidConfig(format!("expected name=share, got {part:?}")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| SimError::InvalidConfig(format!("bad share {value:?}")))?;
            *mix.share_mut(name.parse()?) = value;
        }
        mix.validate()?;
        Ok(mix)
    }
}

/// How agents improve with practice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Learning {
    /// Fractional decrease of rating noise per accepted rating.
    pub noise_decay: f64,
    /// Fractional increase of editing skill per accepted edit.
    pub skill_growth: f64,
}

impl Learning {
    pub fn none() -> Self {
        Self {
            noise_decay: 0.0,
            skill_growth: 0.0,
        }
    }
}

impl Default for Learning {
    fn default() -> Self {
        Self {
            noise_decay: 0.01,
            skill_growth: 0.005,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub n_agents: usize,
    /// Total source headlines fed in, in daily batches.
    pub n_headlines: usize,
    /// Upper bound on agent actions.
    pub n_steps: usize,
    /// Stop once this many headlines are fully rated.
    pub target_completed: Option<usize>,
    pub profile_mix: ProfileMix,
    pub learning: Learning,
    /// Simulated seconds between consecutive actions.
    pub tick_secs: i64,
    /// How many served headlines an agent looks at before picking one.
    pub choice_width: usize,
    /// Standard deviation of an edit's latent quality around the editor's skill.
    pub edit_noise: f64,
    pub engine: EngineConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            n_agents: 50,
            n_headlines: 2_000,
            n_steps: 20_000,
            target_completed: None,
            profile_mix: ProfileMix::default(),
            learning: Learning::default(),
            tick_secs: 60,
            choice_width: 5,
            edit_noise: 0.5,
            engine: EngineConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |m: &str| Err(SimError::InvalidConfig(m.to_string()));
        if self.n_agents < 6 {
            return fail("at least 6 agents are needed to complete a headline");
        }
        if self.n_headlines == 0 {
            return fail("n_headlines must be positive");
        }
        if self.tick_secs <= 0 {
            return fail("tick_secs must be positive");
        }
        if self.choice_width == 0 {
            return fail("choice_width must be positive");
        }
        if self.edit_noise.is_nan() || self.edit_noise < 0.0 {
            return fail("edit_noise must be non-negative");
        }
        let growth = self.learning.skill_growth;
        if !(0.0..1.0).contains(&self.learning.noise_decay) || growth.is_nan() || growth < 0.0 {
            return fail("learning rates out of range");
        }
        if self.engine.sampler.refresh_interval_secs == 0 {
            return fail("sampler refresh interval must be positive");
        }
        self.profile_mix.validate()
    }
}
