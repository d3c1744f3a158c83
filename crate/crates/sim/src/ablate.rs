use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::simulation::{run, SimOutcome};
use crate::SimError;

/// A mechanism that can be switched off for a paired comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Knob {
    PerPairCap,
    WFill,
    BalancePoints,
    Dwell,
}

impl Knob {
    pub const ALL: [Knob; 4] = [Knob::PerPairCap, Knob::WFill, Knob::BalancePoints, Knob::Dwell];

    pub fn as_str(self) -> &'static str {
        match self {
            Knob::PerPairCap => "per_pair_cap",
            Knob::WFill => "w_fill",
            Knob::BalancePoints => "balance_points",
            Knob::Dwell => "dwell",
        }
    }

    pub fn metric(self) -> &'static str {
        match self {
            Knob::PerPairCap => "max per-pair rating count",
            Knob::WFill => "mean seconds from fourth to fifth grade",
            Knob::BalancePoints => "share of agents with rating/edit ratio in band",
            Knob::Dwell => "rushed grades accepted",
        }
    }

    /// Turns the mechanism off in `config`.
    pub fn disable(self, config: &mut SimConfig) {
        let engine = &mut config.engine;
        match self {
            Knob::PerPairCap => engine.sampler.per_pair_cap = None,
            Knob::WFill => engine.sampler.fill_priority = false,
            Knob::BalancePoints => engine.scoring.balance_enabled = false,
            Knob::Dwell => engine.moderation.min_dwell_ms = 0,
        }
    }

    pub fn measure(self, outcome: &SimOutcome) -> Option<f64> {
        let m = &outcome.metrics;
        match self {
            Knob::PerPairCap => Some(f64::from(m.max_pair_count)),
            Knob::WFill => m.mean_fill_latency_secs,
            Knob::BalancePoints => m.ratio_in_band,
            Knob::Dwell => Some(m.rushed_accepted as f64),
        }
    }
}

impl fmt::Display for Knob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Knob {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Knob::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| SimError::UnknownKnob(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub knob: Knob,
    pub metric: String,
    pub with_mechanism: Option<f64>,
    pub without_mechanism: Option<f64>,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.3}"));
        writeln!(f, "knob\tmetric\ton\toff")?;
        write!(
            f,
            "{}\t{}\t{}\t{}",
            self.knob,
            self.metric,
            show(self.with_mechanism),
            show(self.without_mechanism)
        )
    }
}

/// Paired runs with the same seed, with and without the mechanism.
pub fn ablate(config: &SimConfig, knob: Knob) -> Result<(Comparison, SimOutcome, SimOutcome), SimError> {
    let on = run(config)?;
    let mut off_config = config.clone();
    knob.disable(&mut off_config);
    let off = run(&off_config)?;
    let comparison = Comparison {
        knob,
        metric: knob.metric().to_string(),
        with_mechanism: knob.measure(&on),
        without_mechanism: knob.measure(&off),
    };
    Ok((comparison, on, off))
}
