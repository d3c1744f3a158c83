//! Headline intake: tokenizing, filtering, de-duplication, tagging of replaceable words,
//! and the per-day admission cap.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::state::GameState;
use crate::types::{Category, Timestamp};

const DEFAULT_LEXICON: &str = include_str!("../data/lexicon.txt");
const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestionConfig {
    pub min_tokens: usize,
    pub max_tokens: usize,
    /// Admissions per UTC day across all feeds.
    pub daily_cap: u32,
}

impl Default for IngestionConfig {
    fn default() -> Self {
        Self {
            min_tokens: 5,
            max_tokens: 20,
            daily_cap: 300,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedAdapter {
    JsonlFile,
    HttpJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedConfig {
    pub adapter: FeedAdapter,
    /// File path or URL, depending on the adapter.
    pub location: String,
    /// Category for items that do not carry one.
    pub category: Category,
    #[serde(with = "secs", default = "default_poll")]
    pub poll_interval: Duration,
    #[serde(default = "default_feed_cap")]
    pub daily_cap: u32,
}

fn default_poll() -> Duration {
    Duration::from_secs(3600)
}

fn default_feed_cap() -> u32 {
    300
}

mod secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_secs())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_secs(u64::deserialize(d)?))
    }
}

impl FeedConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.daily_cap == 0 {
            return Err("feed daily_cap must be positive".into());
        }
        if self.poll_interval.is_zero() {
            return Err("feed poll_interval must be positive".into());
        }
        Ok(())
    }
}

/// One item as delivered by a feed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawItem {
    pub text: String,
    #[serde(default)]
    pub category: Option<String>,
    #[serde(default)]
    pub source: String,
    #[serde(default)]
    pub url: String,
    pub published_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    TooShort,
    TooLong,
    Duplicate,
    NoReplaceableWords,
    UnknownCategory,
    DailyCapReached,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub admitted: usize,
    pub rejected: Vec<(RawItem, RejectReason)>,
}

/// A screened item ready to become a `HeadlineIngested` event.
#[derive(Debug, Clone, PartialEq)]
pub struct Admission {
    pub tokens: Vec<String>,
    pub category: Category,
    pub source_name: String,
    pub article_url: String,
    pub published_at: Timestamp,
    pub replaceable: BTreeSet<usize>,
}

pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_string).collect()
}

/// Lowercased, punctuation stripped, whitespace collapsed.
pub fn normalize_text(text: &str) -> String {
    let cleaned: String = text
        .chars()
        .map(|c| {
            if c.is_alphanumeric() || c.is_whitespace() {
                c.to_lowercase().next().unwrap_or(c)
            } else {
                ' '
            }
        })
        .collect();
    cleaned.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Token with surrounding punctuation removed, lowercased.
pub fn normalize_token(token: &str) -> String {
    token
        .trim_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase()
}

/// Decides which token positions a player may substitute.
pub trait ReplaceableTagger: Send + Sync {
    fn tag(&self, tokens: &[String]) -> BTreeSet<usize>;
}

/// Lexicon lookup plus mid-sentence capitalized words as a stand-in for named entities.
#[derive(Debug, Clone)]
pub struct LexiconTagger {
    lexicon: BTreeMap<String, usize>,
    stopwords: BTreeSet<String>,
}

fn word_lines(text: &str) -> impl Iterator<Item = String> + '_ {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim().to_lowercase())
        .filter(|l| !l.is_empty())
}

impl LexiconTagger {
    /// Lexicon words are ranked by their order in the input, most frequent first.
    pub fn new<I, J>(lexicon: I, stopwords: J) -> Self
    where
        I: IntoIterator<Item = String>,
        J: IntoIterator<Item = String>,
    {
        let mut ranked = BTreeMap::new();
        for word in lexicon {
            let next = ranked.len();
            ranked.entry(word).or_insert(next);
        }
        Self {
            lexicon: ranked,
            stopwords: stopwords.into_iter().collect(),
        }
    }

    pub fn from_lexicon_file<R: BufRead>(reader: R) -> std::io::Result<Self> {
        let mut text = String::new();
        for line in reader.lines() {
            text.push_str(&line?);
            text.push('\n');
        }
        Ok(Self::new(word_lines(&text), word_lines(DEFAULT_STOPWORDS)))
    }

    pub fn lexicon_len(&self) -> usize {
        self.lexicon.len()
    }

    /// Frequency rank of a word, 0 being the most common.
    pub fn rank(&self, word: &str) -> Option<usize> {
        self.lexicon.get(&normalize_token(word)).copied()
    }
}

impl Default for LexiconTagger {
    fn default() -> Self {
        Self::new(word_lines(DEFAULT_LEXICON), word_lines(DEFAULT_STOPWORDS))
    }
}

impl ReplaceableTagger for LexiconTagger {
    fn tag(&self, tokens: &[String]) -> BTreeSet<usize> {
        tokens
            .iter()
            .enumerate()
            .filter_map(|(i, token)| {
                let word = normalize_token(token);
                if word.is_empty() || self.stopwords.contains(&word) {
                    return None;
                }
                if self.lexicon.contains_key(&word) {
                    return Some(i);
                }
                let capitalized = token
                    .chars()
                    .find(|c| c.is_alphabetic())
                    .is_some_and(char::is_uppercase);
                (i > 0 && capitalized).then_some(i)
            })
            .collect()
    }
}

pub fn tag_replaceable(tokens: &[String], tagger: &dyn ReplaceableTagger) -> Result<BTreeSet<usize>> {
    if tokens.is_empty() {
        return Err(GameError::EmptyText);
    }
    Ok(tagger.tag(tokens))
}

/// Applies the length, duplicate, tagging and daily-cap filters to a batch. Items are
/// considered in order; earlier admissions in the same batch count towards duplicates
/// and the cap.
pub fn screen_batch(
    state: &GameState,
    cfg: &IngestionConfig,
    tagger: &dyn ReplaceableTagger,
    items: Vec<RawItem>,
    default_category: Option<Category>,
    now: Timestamp,
) -> (Vec<Admission>, Vec<(RawItem, RejectReason)>) {
    let mut admitted = Vec::new();
    let mut rejected = Vec::new();
    let mut seen_in_batch = BTreeSet::new();
    let mut today = state
        .admissions_by_day
        .get(&now.date_naive())
        .copied()
        .unwrap_or(0);

    for item in items {
        let tokens = tokenize(&item.text);
        let reason = if tokens.len() < cfg.min_tokens {
            Some(RejectReason::TooShort)
        } else if tokens.len() > cfg.max_tokens {
            Some(RejectReason::TooLong)
        } else {
            None
        };
        if let Some(reason) = reason {
            rejected.push((item, reason));
            continue;
        }
        let category = match item.category.as_deref().filter(|c| !c.trim().is_empty()) {
            Some(c) => c.parse::<Category>().ok(),
            None => default_category,
        };
        let Some(category) = category else {
            rejected.push((item, RejectReason::UnknownCategory));
            continue;
        };
        let normalized = normalize_text(&item.text);
        if state.normalized_texts.contains(&normalized) || seen_in_batch.contains(&normalized) {
            rejected.push((item, RejectReason::Duplicate));
            continue;
        }
        let replaceable = tagger.tag(&tokens);
        if replaceable.is_empty() {
            rejected.push((item, RejectReason::NoReplaceableWords));
            continue;
        }
        if today >= cfg.daily_cap {
            rejected.push((item, RejectReason::DailyCapReached));
            continue;
        }
        today += 1;
        seen_in_batch.insert(normalized);
        admitted.push(Admission {
            tokens,
            category,
            source_name: item.source,
            article_url: item.url,
            published_at: item.published_at,
            replaceable,
        });
    }
    (admitted, rejected)
}

/// Line number and message for each undecodable line.
pub type LineErrors = Vec<(usize, String)>;

/// Reads a newline-delimited JSON feed file. Undecodable lines are returned with their
/// 1-based line number instead of aborting the read.
pub fn read_jsonl<R: BufRead>(reader: R) -> std::io::Result<(Vec<RawItem>, LineErrors)> {
    let mut items = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<RawItem>(&line) {
            Ok(item) => items.push(item),
            Err(e) => errors.push((i + 1, e.to_string())),
        }
    }
    Ok((items, errors))
}
