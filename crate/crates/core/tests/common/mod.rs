#![allow(dead_code)]

use chrono::{Duration, TimeZone, Utc};
use quipline_core::ingestion::RawItem;
use quipline_core::{Category, EditId, Engine, EngineConfig, PlayerId, SourceId, Timestamp};

pub fn t0() -> Timestamp {
    Utc.with_ymd_and_hms(2020, 1, 6, 9, 0, 0).unwrap()
}

pub fn at(secs: i64) -> Timestamp {
    t0() + Duration::seconds(secs)
}

const NOUNS: [&str; 10] = [
    "senate", "budget", "court", "house", "deal", "tax", "plan", "president", "trump", "court",
];

pub fn headline(i: usize, category: Option<Category>) -> RawItem {
    RawItem {
        text: format!(
            "Senate delays {} vote after {} talks stall item {i}",
            NOUNS[i % NOUNS.len()],
            NOUNS[(i / NOUNS.len()) % NOUNS.len()]
        ),
        category: category.map(|c| c.as_str().to_string()),
        source: "wire".into(),
        url: format!("https://news.example/{i}"),
        published_at: t0() - Duration::hours(48) + Duration::minutes(i as i64),
    }
}

/// Engine with `players` registered and `sources` politics headlines ingested.
pub fn game(config: EngineConfig, players: usize, sources: usize) -> (Engine, Vec<PlayerId>, Vec<SourceId>) {
    let mut engine = Engine::new(config);
    let ids: Vec<PlayerId> = (0..players)
        .map(|i| engine.register_player(format!("player{i}"), t0()).unwrap())
        .collect();
    let items = (0..sources).map(|i| headline(i, None)).collect();
    let report = engine.ingest_batch_with_default(items, Category::Politics, t0());
    assert_eq!(report.admitted, sources, "{:?}", report.rejected);
    let srcs = engine.state().sources.keys().copied().collect();
    (engine, ids, srcs)
}

/// First replaceable index of a source.
pub fn slot(engine: &Engine, source: SourceId) -> usize {
    *engine.state().sources[&source].replaceable.iter().next().unwrap()
}

pub fn edit(engine: &mut Engine, player: PlayerId, source: SourceId, word: &str, now: Timestamp) -> EditId {
    let index = slot(engine, source);
    engine.submit_edit(player, source, index, word, now).unwrap()
}

/// Rates after a comfortable dwell.
pub fn rate(engine: &mut Engine, player: PlayerId, edit: EditId, grade: i64, now: Timestamp) {
    engine
        .submit_rating(player, edit, grade, now - Duration::seconds(3), now)
        .unwrap();
}
