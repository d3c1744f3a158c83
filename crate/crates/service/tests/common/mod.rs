#![allow(dead_code)]

use std::path::Path;

use chrono::{Duration, TimeZone, Utc};
use quipline_core::ingestion::RawItem;
use quipline_service::{start, Server, ServiceConfig};
use reqwest::{Method, StatusCode};
use serde_json::{json, Value};

pub const ADMIN: &str = "admin-secret";

/// Config for a throwaway server: free port, log in `dir`, admin enabled.
pub fn config(dir: &Path, dwell_ms: i64) -> ServiceConfig {
    let mut c = ServiceConfig {
        port: 0,
        log_path: dir.join("events.ndjson"),
        admin_token: Some(ADMIN.into()),
        ..ServiceConfig::default()
    };
    c.engine.moderation.min_dwell_ms = dwell_ms;
    c.engine.sampler.refresh_interval_secs = 1;
    c.engine.ingestion.daily_cap = 1_000_000;
    c
}

pub async fn server(config: ServiceConfig) -> (Server, Api) {
    let s = start(config).await.expect("server starts");
    let api = Api::new(format!("http://{}", s.addr));
    (s, api)
}

pub fn item(text: &str, category: &str, minutes: i64) -> RawItem {
    RawItem {
        text: text.into(),
        category: Some(category.into()),
        source: "wire".into(),
        url: format!("https://example.org/{}", text.len()),
        published_at: Utc.with_ymd_and_hms(2020, 1, 6, 9, 0, 0).unwrap() + Duration::minutes(minutes),
    }
}

pub fn synthetic(n: usize) -> Vec<RawItem> {
    let t0 = Utc.with_ymd_and_hms(2020, 1, 6, 0, 0, 0).unwrap();
    (0..n)
        .map(|i| quipline_sim::headlines::synthetic_headline(i, t0 + Duration::seconds(i as i64)))
        .collect()
}

#[derive(Debug)]
pub struct Reply {
    pub status: StatusCode,
    pub body: Value,
}

impl Reply {
    pub fn code(&self) -> &str {
        self.body["code"].as_str().unwrap_or("")
    }

    #[track_caller]
    pub fn ok(self) -> Value {
        assert!(self.status.is_success(), "{} {}", self.status, self.body);
        self.body
    }
}

#[derive(Clone)]
pub struct Api {
    pub base: String,
    pub http: reqwest::Client,
}

impl Api {
    pub fn new(base: String) -> Self {
        Self {
            base,
            http: reqwest::Client::new(),
        }
    }

    pub async fn call(
        &self,
        method: Method,
        path: &str,
        token: Option<&str>,
        key: Option<&str>,
        body: Option<Value>,
    ) -> Reply {
        let mut req = self.http.request(method, format!("{}{path}", self.base));
        if let Some(t) = token {
            req = req.bearer_auth(t);
        }
        if let Some(k) = key {
            req = req.header("Idempotency-Key", k);
        }
        if path.starts_with("/admin") {
            req = req.header("X-Admin-Token", ADMIN);
        }
        if let Some(b) = body {
            req = req.json(&b);
        }
        let resp = req.send().await.expect("request sent");
        let status = resp.status();
        let text = resp.text().await.unwrap();
        let body = serde_json::from_str(&text).unwrap_or(Value::String(text));
        Reply { status, body }
    }

    pub async fn get(&self, path: &str, token: Option<&str>) -> Reply {
        self.call(Method::GET, path, token, None, None).await
    }

    pub async fn post(&self, path: &str, token: Option<&str>, body: Value) -> Reply {
        self.call(Method::POST, path, token, None, Some(body)).await
    }

    pub async fn text(&self, path: &str) -> (StatusCode, String) {
        let resp = self.http.get(format!("{}{path}", self.base)).send().await.unwrap();
        (resp.status(), resp.text().await.unwrap())
    }

    /// Registers a player and returns `(player id, token)`.
    pub async fn player(&self, name: &str) -> (u64, String) {
        let r = self.post("/players", None, json!({"display_name": name})).await.ok();
        (r["player"].as_u64().unwrap(), r["token"].as_str().unwrap().to_string())
    }

    pub async fn ingest(&self, items: &[RawItem]) -> Value {
        self.post("/admin/ingest", None, json!({ "items": items })).await.ok()
    }

    pub async fn events(&self) -> u64 {
        self.get("/health", None).await.ok()["events"].as_u64().unwrap()
    }

    /// Edits the first editable headline at its first replaceable index.
    pub async fn edit_first(&self, token: &str, word: &str) -> Reply {
        let list = self.get("/headlines/editable?limit=1", Some(token)).await.ok();
        let h = &list[0];
        let index = h["replaceable"][0].as_u64().unwrap();
        self.post(
            "/edits",
            Some(token),
            json!({"source": h["source"], "index": index, "word": word}),
        )
        .await
    }

    pub async fn rate(&self, token: &str, edit: u64, grade: i64) -> Reply {
        self.post("/ratings", Some(token), json!({"edit": edit, "grade": grade})).await
    }

    /// Fetches the queue and rates `edit` if it is offered.
    pub async fn serve_and_rate(&self, token: &str, edit: u64, grade: i64) -> Reply {
        let q = self.get("/rate-queue?k=50", Some(token)).await.ok();
        assert!(
            q.as_array().unwrap().iter().any(|i| i["edit"].as_u64() == Some(edit)),
            "edit {edit} not offered: {q}"
        );
        self.rate(token, edit, grade).await
    }
}
