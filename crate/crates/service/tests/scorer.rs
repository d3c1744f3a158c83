use std::net::SocketAddr;
use std::time::Duration;

use axum::routing::post;
use axum::{Json, Router};
use proptest::prelude::*;
use quipline_service::{BuiltinHeuristic, ExternalHttp, FunninessScorer, HeuristicWeights, ScorerError};
use serde_json::{json, Value};

fn builtin() -> BuiltinHeuristic {
    BuiltinHeuristic::new(HeuristicWeights::default())
}

#[test]
fn golden_scores() {
    let text = include_str!("data/scorer_golden.tsv");
    let scorer = builtin();
    let mut n = 0;
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split('\t').collect();
        let expected: f64 = cols[2].parse().unwrap();
        let got = scorer.score(cols[0], cols[1]).unwrap();
        assert!((got - expected).abs() < 1e-9, "{line}: got {got}");
        n += 1;
    }
    assert_eq!(n, 7);
}

#[test]
fn identical_or_multi_word_changes_are_rejected() {
    let s = builtin();
    let h = "Senate delays vote after budget talks stall";
    assert_eq!(s.score(h, h), Err(ScorerError::NotSingleSubstitution));
    assert_eq!(
        s.score(h, "Senate delays pizza after budget clown stall"),
        Err(ScorerError::NotSingleSubstitution)
    );
    assert_eq!(s.score(h, "Senate delays vote"), Err(ScorerError::NotSingleSubstitution));
    // Case and punctuation alone do not count as a substitution.
    assert_eq!(
        s.score(h, "senate delays vote after budget talks stall!"),
        Err(ScorerError::NotSingleSubstitution)
    );
}

proptest! {
    #[test]
    fn output_stays_on_the_grade_scale(
        words in prop::collection::vec("[a-z]{1,12}", 2..12),
        sub in "[a-z]{1,40}",
        at in any::<prop::sample::Index>(),
        bias in -5.0f64..5.0,
        length in -1.0f64..1.0,
        rarity in -5.0f64..5.0,
        position in -5.0f64..5.0,
    ) {
        let i = at.index(words.len());
        prop_assume!(words[i] != sub);
        let original = words.join(" ");
        let mut edited = words.clone();
        edited[i] = sub;
        let s = BuiltinHeuristic::new(HeuristicWeights { bias, length, length_cap: 10.0, rarity, position });
        let score = s.score(&original, &edited.join(" ")).unwrap();
        prop_assert!((0.0..=3.0).contains(&score));
        prop_assert_eq!(score, s.score(&original, &edited.join(" ")).unwrap());
    }
}

async fn mock(reply: Value, delay: Duration) -> SocketAddr {
    let app = Router::new().route(
        "/score",
        post(move |Json(body): Json<Value>| {
            let reply = reply.clone();
            async move {
                assert!(body["original"].is_string() && body["edited"].is_string());
                tokio::time::sleep(delay).await;
                Json(reply)
            }
        }),
    );
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    addr
}

fn external(addr: SocketAddr, timeout_ms: u64) -> ExternalHttp {
    ExternalHttp::new(
        format!("http://{addr}/score"),
        Duration::from_millis(timeout_ms),
        HeuristicWeights::default(),
    )
}

const ORIGINAL: &str = "Apple unveils new phone at event";
const EDITED: &str = "Apple unveils new phone at funeral";

#[tokio::test]
async fn external_passes_scores_through() {
    let addr = mock(json!({"score": 2.4}), Duration::ZERO).await;
    let est = external(addr, 1_000).estimate(ORIGINAL, EDITED).await.unwrap();
    assert_eq!(est.score, 2.4);
    assert!(!est.fallback);
}

#[tokio::test]
async fn external_scores_are_clamped() {
    let addr = mock(json!({"score": 7.0}), Duration::ZERO).await;
    let est = external(addr, 1_000).estimate(ORIGINAL, EDITED).await.unwrap();
    assert_eq!(est.score, 3.0);
    let addr = mock(json!({"score": -1.5}), Duration::ZERO).await;
    assert_eq!(external(addr, 1_000).estimate(ORIGINAL, EDITED).await.unwrap().score, 0.0);
}

#[tokio::test]
async fn external_down_falls_back_to_builtin() {
    // Bind then drop to get a port nobody listens on.
    let addr = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap().local_addr().unwrap();
    let est = external(addr, 1_000).estimate(ORIGINAL, EDITED).await.unwrap();
    assert!(est.fallback);
    assert_eq!(est.score, builtin().score(ORIGINAL, EDITED).unwrap());
}

#[tokio::test]
async fn slow_or_malformed_external_falls_back() {
    let slow = mock(json!({"score": 1.0}), Duration::from_millis(500)).await;
    let est = external(slow, 100).estimate(ORIGINAL, EDITED).await.unwrap();
    assert!(est.fallback);
    let junk = mock(json!({"funny": true}), Duration::ZERO).await;
    assert!(external(junk, 1_000).estimate(ORIGINAL, EDITED).await.unwrap().fallback);
}

#[tokio::test]
async fn external_validates_before_calling() {
    let addr = mock(json!({"score": 2.0}), Duration::ZERO).await;
    let err = external(addr, 1_000).estimate(ORIGINAL, ORIGINAL).await.unwrap_err();
    assert_eq!(err, ScorerError::NotSingleSubstitution);
}
