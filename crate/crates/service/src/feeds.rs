//! Periodic pulls from configured headline feeds into the ingest command.

use std::collections::HashSet;
use std::io::BufReader;
use std::sync::Arc;

use chrono::{NaiveDate, Utc};
use quipline_core::ingestion::{read_jsonl, normalize_text, FeedAdapter, FeedConfig, RawItem};
use quipline_core::{Command, Outcome};
use tokio::task::JoinHandle;

use crate::writer::WriterHandle;

#[derive(Debug, thiserror::Error)]
pub enum FeedError {
    #[error("feed file {0}: {1}")]
    File(String, std::io::Error),
    #[error("feed {0}: {1}")]
    Http(String, String),
}

pub async fn fetch(feed: &FeedConfig, client: &reqwest::Client) -> Result<Vec<RawItem>, FeedError> {
    match feed.adapter {
        FeedAdapter::JsonlFile => {
            let path = feed.location.clone();
            let file = std::fs::File::open(&path).map_err(|e| FeedError::File(path.clone(), e))?;
            let (items, bad) = read_jsonl(BufReader::new(file)).map_err(|e| FeedError::File(path.clone(), e))?;
            for (line, reason) in bad {
                tracing::warn!(feed = %path, line, %reason, "skipping undecodable feed line");
            }
            Ok(items)
        }
        FeedAdapter::HttpJson => {
            let http = |e: reqwest::Error| FeedError::Http(feed.location.clone(), e.to_string());
            client
                .get(&feed.location)
                .send()
                .await
                .map_err(http)?
                .error_for_status()
                .map_err(http)?
                .json::<Vec<RawItem>>()
                .await
                .map_err(http)
        }
    }
}

/// Per-feed state: which items were already handed to the engine and today's admissions.
#[derive(Debug, Default)]
pub struct FeedCursor {
    seen: HashSet<String>,
    day: Option<NaiveDate>,
    admitted_today: u32,
}

impl FeedCursor {
    /// Unseen items up to what remains of the feed's daily cap, marked as seen.
    pub fn take(&mut self, items: Vec<RawItem>, daily_cap: u32, today: NaiveDate) -> Vec<RawItem> {
        if self.day != Some(today) {
            self.day = Some(today);
            self.admitted_today = 0;
        }
        let room = daily_cap.saturating_sub(self.admitted_today) as usize;
        let mut out = Vec::new();
        for item in items {
            if out.len() >= room {
                break;
            }
            if self.seen.insert(normalize_text(&item.text)) {
                out.push(item);
            }
        }
        out
    }

    pub fn record(&mut self, admitted: usize) {
        self.admitted_today += admitted as u32;
    }
}

pub fn spawn_pollers(feeds: &[FeedConfig], writer: WriterHandle) -> Vec<JoinHandle<()>> {
    let client = Arc::new(reqwest::Client::new());
    feeds
        .iter()
        .cloned()
        .map(|feed| {
            let writer = writer.clone();
            let client = client.clone();
            tokio::spawn(async move {
                let mut cursor = FeedCursor::default();
                let mut tick = tokio::time::interval(feed.poll_interval);
                loop {
                    tick.tick().await;
                    let items = match fetch(&feed, &client).await {
                        Ok(items) => items,
                        Err(e) => {
                            tracing::warn!(error = %e, "feed poll failed");
                            continue;
                        }
                    };
                    let batch = cursor.take(items, feed.daily_cap, Utc::now().date_naive());
                    if batch.is_empty() {
                        continue;
                    }
                    let command = Command::Ingest {
                        items: batch,
                        default_category: Some(feed.category),
                    };
                    match writer.submit(command, None).await {
                        Ok(Outcome::Ingested(report)) => {
                            tracing::info!(feed = %feed.location, admitted = report.admitted, rejected = report.rejected.len(), "feed ingested");
                            cursor.record(report.admitted);
                        }
                        Ok(_) => {}
                        Err(e) => tracing::warn!(error = %e, "feed ingest failed"),
                    }
                }
            })
        })
        .collect()
}
