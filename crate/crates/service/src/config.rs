use std::fs;
use std::path::{Path, PathBuf};

use quipline_core::ingestion::FeedConfig;
use quipline_core::EngineConfig;
use serde::{Deserialize, Serialize};

use crate::scorer::HeuristicWeights;

/// Environment variable naming the config file when `--config` is absent.
pub const CONFIG_ENV: &str = "QUIPLINE_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScorerKind {
    #[default]
    Builtin,
    ExternalHttp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScorerConfig {
    pub kind: ScorerKind,
    /// URL receiving `{"original", "edited"}` and answering `{"score"}`.
    pub endpoint: Option<String>,
    pub timeout_ms: u64,
    pub weights: HeuristicWeights,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        Self {
            kind: ScorerKind::Builtin,
            endpoint: None,
            timeout_ms: 1_000,
            weights: HeuristicWeights::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    pub host: String,
    pub port: u16,
    pub log_path: PathBuf,
    pub session_ttl_secs: i64,
    /// Shared secret for the `/admin` endpoints, sent as `X-Admin-Token`. Admin endpoints are
    /// disabled when unset.
    pub admin_token: Option<String>,
    pub blacklist_path: Option<PathBuf>,
    /// Total spend used for the cost-per-datum line of `/report`.
    pub budget_cents: f64,
    /// Headlines returned by `/rate-queue` when the client gives no `k`.
    pub rate_queue_len: usize,
    pub scorer: ScorerConfig,
    pub feeds: Vec<FeedConfig>,
    pub engine: EngineConfig,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            host: "127.0.0.1".into(),
            port: 8080,
            log_path: PathBuf::from("events.ndjson"),
            session_ttl_secs: 24 * 3600,
            admin_token: None,
            blacklist_path: None,
            budget_cents: 100_000.0,
            rate_queue_len: 5,
            scorer: ScorerConfig::default(),
            feeds: Vec::new(),
            engine: EngineConfig::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl ServiceConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let config = Self::from_toml_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: String| Err(ConfigError::Invalid(m));
        if self.session_ttl_secs <= 0 {
            return fail("session_ttl_secs must be positive".into());
        }
        if self.rate_queue_len == 0 {
            return fail("rate_queue_len must be positive".into());
        }
        if self.scorer.kind == ScorerKind::ExternalHttp && self.scorer.endpoint.is_none() {
            return fail("scorer.endpoint is required for external_http".into());
        }
        if self.scorer.timeout_ms == 0 {
            return fail("scorer.timeout_ms must be positive".into());
        }
        if self.engine.sampler.refresh_interval_secs == 0 {
            return fail("engine.sampler.refresh_interval_secs must be positive".into());
        }
        if self.engine.moderation.min_dwell_ms < 0 {
            return fail("engine.moderation.min_dwell_ms must not be negative".into());
        }
        for feed in &self.feeds {
            feed.validate().map_err(ConfigError::Invalid)?;
        }
        Ok(())
    }
}
