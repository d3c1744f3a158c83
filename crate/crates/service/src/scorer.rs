//! Funniness estimators that advise editors after they submit. Their output only ever
//! appears in the edit response; grades and points come from players.

use std::time::Duration;

use async_trait::async_trait;
use quipline_core::ingestion::{normalize_token, tokenize, LexiconTagger};
use serde::{Deserialize, Serialize};

use crate::config::{ScorerConfig, ScorerKind};

pub const MAX_SCORE: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScorerError {
    #[error("edited headline must differ from the original in exactly one token")]
    NotSingleSubstitution,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub score: f64,
    /// True when the configured scorer failed and the builtin answered instead.
    pub fallback: bool,
}

#[async_trait]
pub trait FunninessScorer: Send + Sync {
    fn name(&self) -> &'static str;
    async fn estimate(&self, original: &str, edited: &str) -> Result<Estimate, ScorerError>;
}

/// Published weights of the builtin estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeuristicWeights {
    pub bias: f64,
    /// Per character of length difference, capped at `length_cap` characters.
    pub length: f64,
    pub length_cap: f64,
    /// Times the substitute's rarity: rank / lexicon size, or 1 when not in the lexicon.
    pub rarity: f64,
    /// Times the relative position of the replaced token (0 first, 1 last).
    pub position: f64,
}

impl Default for HeuristicWeights {
    fn default() -> Self {
        Self {
            bias: 0.6,
            length: 0.04,
            length_cap: 10.0,
            rarity: 0.9,
            position: 0.5,
        }
    }
}

/// Surface features of a one-word substitution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Features {
    pub length_diff: f64,
    pub rarity: f64,
    pub position: f64,
}

pub struct BuiltinHeuristic {
    weights: HeuristicWeights,
    lexicon: LexiconTagger,
}

impl BuiltinHeuristic {
    pub fn new(weights: HeuristicWeights) -> Self {
        Self {
            weights,
            lexicon: LexiconTagger::default(),
        }
    }

    pub fn features(&self, original: &str, edited: &str) -> Result<Features, ScorerError> {
        let a = tokenize(original);
        let b = tokenize(edited);
        if a.len() != b.len() {
            return Err(ScorerError::NotSingleSubstitution);
        }
        let mut changed = a
            .iter()
            .zip(&b)
            .enumerate()
            .filter(|(_, (x, y))| normalize_token(x) != normalize_token(y));
        let (index, (old, new)) = changed.next().ok_or(ScorerError::NotSingleSubstitution)?;
        if changed.next().is_some() {
            return Err(ScorerError::NotSingleSubstitution);
        }
        let old_len = normalize_token(old).chars().count() as f64;
        let new_len = normalize_token(new).chars().count() as f64;
        let rarity = match self.lexicon.rank(new) {
            Some(rank) => rank as f64 / self.lexicon.lexicon_len() as f64,
            None => 1.0,
        };
        let position = if a.len() > 1 {
            index as f64 / (a.len() - 1) as f64
        } else {
            0.0
        };
        Ok(Features {
            length_diff: (new_len - old_len).abs(),
            rarity,
            position,
        })
    }

    pub fn score(&self, original: &str, edited: &str) -> Result<f64, ScorerError> {
        let f = self.features(original, edited)?;
        let w = &self.weights;
        let raw = w.bias
            + w.length * f.length_diff.min(w.length_cap)
            + w.rarity * f.rarity
            + w.position * f.position;
        Ok(raw.clamp(0.0, MAX_SCORE))
    }
}

#[async_trait]
impl FunninessScorer for BuiltinHeuristic {
    fn name(&self) -> &'static str {
        "builtin_heuristic"
    }

    async fn estimate(&self, original: &str, edited: &str) -> Result<Estimate, ScorerError> {
        Ok(Estimate {
            score: self.score(original, edited)?,
            fallback: false,
        })
    }
}

#[derive(Serialize)]
struct ScoreRequest<'a> {
    original: &'a str,
    edited: &'a str,
}

#[derive(Deserialize)]
struct ScoreResponse {
    score: f64,
}

/// Delegates to a model served over HTTP, falling back to the builtin on any failure.
pub struct ExternalHttp {
    client: reqwest::Client,
    endpoint: String,
    fallback: BuiltinHeuristic,
}

impl ExternalHttp {
    pub fn new(endpoint: String, timeout: Duration, weights: HeuristicWeights) -> Self {
        let client = reqwest::Client::builder()
            .timeout(timeout)
            .build()
            .expect("static client configuration");
        Self {
            client,
            endpoint,
            fallback: BuiltinHeuristic::new(weights),
        }
    }

    async fn remote(&self, original: &str, edited: &str) -> Result<f64, String> {
        let response = self
            .client
            .post(&self.endpoint)
            .json(&ScoreRequest { original, edited })
            .send()
            .await
            .map_err(|e| e.to_string())?
            .error_for_status()
            .map_err(|e| e.to_string())?;
        let body: ScoreResponse = response.json().await.map_err(|e| e.to_string())?;
        if !body.score.is_finite() {
            return Err("non-finite score".into());
        }
        Ok(body.score.clamp(0.0, MAX_SCORE))
    }
}

#[async_trait]
impl FunninessScorer for ExternalHttp {
    fn name(&self) -> &'static str {
        "external_http"
    }

    async fn estimate(&self, original: &str, edited: &str) -> Result<Estimate, ScorerError> {
        // Validate locally first so malformed pairs never leave the process.
        self.fallback.features(original, edited)?;
        match self.remote(original, edited).await {
            Ok(score) => Ok(Estimate {
                score,
                fallback: false,
            }),
            Err(reason) => {
                tracing::warn!(endpoint = %self.endpoint, %reason, "scorer unavailable, using builtin");
                Ok(Estimate {
                    score: self.fallback.score(original, edited)?,
                    fallback: true,
                })
            }
        }
    }
}

pub fn from_config(config: &ScorerConfig) -> Box<dyn FunninessScorer> {
    match (config.kind, &config.endpoint) {
        (ScorerKind::ExternalHttp, Some(endpoint)) => Box::new(ExternalHttp::new(
            endpoint.clone(),
            Duration::from_millis(config.timeout_ms),
            config.weights.clone(),
        )),
        _ => Box::new(BuiltinHeuristic::new(config.weights.clone())),
    }
}
