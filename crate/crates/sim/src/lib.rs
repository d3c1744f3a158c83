//! Synthetic player populations for the headline game.
//!
//! Agents edit with a latent skill and grade with noise; both can improve with practice.
//! Every action goes through the real engine and sampler, so runs exercise the same rules
//! as live play and produce an ordinary event log.

pub mod ablate;
pub mod agent;
pub mod config;
pub mod headlines;
pub mod output;
pub mod simulation;

pub use ablate::{ablate, Comparison, Knob};
pub use agent::{Agent, AgentProfile};
pub use config::{Learning, ProfileMix, SimConfig, Strategy};
pub use simulation::{run, AgentSummary, SimMetrics, SimOutcome};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("unknown ablation knob {0:?}")]
    UnknownKnob(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("output failure: {0}")]
    Output(String),
}
