//! Router, shared state and request handlers.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use axum::extract::{FromRequest, FromRequestParts, Query, Request, State};
use axum::http::request::Parts;
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{Duration, Utc};
use parking_lot::{Mutex, RwLock};
use quipline_core::analytics::{category_report, export_dataset, quality_report, CategoryStats, Delimiter, QualityReport};
use quipline_core::feedback::{editor_feedback, rater_feedback, EditorFeedback, RaterFeedback};
use quipline_core::ingestion::{IngestReport, RawItem};
use quipline_core::sampler::Sampler;
use quipline_core::scoring::{balance_advice, leaderboards, score_state, BalanceAdvice, Leaderboards, ScoreState};
use quipline_core::{
    Category, Command, EditId, Engine, HeadlineRef, Outcome, PlayerId, RatingOutcome, SourceId,
    Standing, Timestamp,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::ServiceConfig;
use crate::error::ApiError;
use crate::scorer::{Estimate, FunninessScorer};
use crate::session::{SessionToken, Sessions};
use crate::writer::WriterHandle;

pub const IDEMPOTENCY_HEADER: &str = "idempotency-key";
pub const ADMIN_HEADER: &str = "x-admin-token";

const MAX_EDITABLE: usize = 200;
const MAX_QUEUE: usize = 50;
/// Served-at records older than this are pruned once the table grows large.
const SERVED_RETENTION_HOURS: i64 = 6;
const SERVED_PRUNE_AT: usize = 100_000;

pub struct AppState {
    pub config: ServiceConfig,
    pub engine: Arc<RwLock<Engine>>,
    pub writer: WriterHandle,
    pub sampler: Sampler,
    pub sessions: Sessions,
    pub scorer: Box<dyn FunninessScorer>,
    /// When each rater was first shown each headline; the dwell check runs against this.
    served: Mutex<HashMap<(PlayerId, EditId), Timestamp>>,
}

impl AppState {
    pub fn new(
        config: ServiceConfig,
        engine: Arc<RwLock<Engine>>,
        writer: WriterHandle,
        scorer: Box<dyn FunninessScorer>,
    ) -> Self {
        Self {
            sampler: Sampler::for_engine(&config.engine),
            sessions: Sessions::new(config.session_ttl_secs),
            config,
            engine,
            writer,
            scorer,
            served: Mutex::new(HashMap::new()),
        }
    }

    async fn submit(&self, command: Command, key: Option<String>) -> Result<Outcome, ApiError> {
        Ok(self.writer.submit(command, key).await?)
    }
}

type Shared = Arc<AppState>;

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/players", post(register))
        .route("/session", post(open_session))
        .route("/headlines/editable", get(editable))
        .route("/edits", post(submit_edit))
        .route("/rate-queue", get(rate_queue))
        .route("/ratings", post(submit_rating))
        .route("/flags", post(flag))
        .route("/skips", post(skip))
        .route("/leaderboards", get(get_leaderboards))
        .route("/me/feedback", get(my_feedback))
        .route("/report", get(report))
        .route("/export", get(export))
        .route("/admin/reinstate", post(admin_reinstate))
        .route("/admin/suspend", post(admin_suspend))
        .route("/admin/ingest", post(admin_ingest))
        .with_state(state)
}

// Extractors

/// JSON body whose rejections use the API error shape.
pub struct Body<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for Body<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        Json::<T>::from_request(req, state)
            .await
            .map(|Json(v)| Body(v))
            .map_err(|e| ApiError::BadRequest(e.body_text()))
    }
}

pub struct Params<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequestParts<S> for Params<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        Query::<T>::from_request_parts(parts, state)
            .await
            .map(|Query(v)| Params(v))
            .map_err(|e| ApiError::BadRequest(e.body_text()))
    }
}

/// The player behind the `Authorization: Bearer` token.
pub struct Auth(pub PlayerId);

impl FromRequestParts<Shared> for Auth {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &Shared) -> Result<Self, Self::Rejection> {
        let token = parts
            .headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .ok_or(ApiError::Unauthorized)?;
        state
            .sessions
            .resolve_now(token.trim())
            .map(Auth)
            .ok_or(ApiError::Unauthorized)
    }
}

pub struct Admin;

impl FromRequestParts<Shared> for Admin {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &Shared) -> Result<Self, Self::Rejection> {
        let expected = state.config.admin_token.as_deref().ok_or(ApiError::AdminDisabled)?;
        match parts.headers.get(ADMIN_HEADER).and_then(|v| v.to_str().ok()) {
            Some(given) if given == expected => Ok(Admin),
            _ => Err(ApiError::AdminForbidden),
        }
    }
}

/// Client idempotency key, scoped so that different callers cannot collide.
fn scoped_key(headers: &HeaderMap, scope: &str) -> Option<String> {
    headers
        .get(IDEMPOTENCY_HEADER)
        .and_then(|v| v.to_str().ok())
        .map(str::trim)
        .filter(|k| !k.is_empty())
        .map(|k| format!("{scope}:{k}"))
}

fn parse_category(raw: Option<&str>) -> Result<Option<Category>, ApiError> {
    raw.filter(|s| !s.is_empty())
        .map(|s| s.parse::<Category>())
        .transpose()
        .map_err(ApiError::from)
}

// Handlers

#[derive(Debug, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub events: u64,
}

async fn health(State(app): State<Shared>) -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        events: app.engine.read().state().last_seq,
    })
}

#[derive(Debug, Deserialize)]
struct RegisterBody {
    display_name: String,
}

async fn register(
    State(app): State<Shared>,
    headers: HeaderMap,
    Body(body): Body<RegisterBody>,
) -> Result<(StatusCode, Json<SessionToken>), ApiError> {
    let name = body.display_name.trim();
    if name.is_empty() || name.chars().count() > 64 {
        return Err(ApiError::BadRequest("display_name must be 1 to 64 characters".into()));
    }
    let command = Command::RegisterPlayer {
        display_name: name.to_string(),
    };
    match app.submit(command, scoped_key(&headers, "register")).await? {
        Outcome::Registered { player } => Ok((
            StatusCode::CREATED,
            Json(app.sessions.issue(player, Utc::now())),
        )),
        other => Err(unexpected(other)),
    }
}

#[derive(Debug, Deserialize)]
struct SessionBody {
    player: PlayerId,
}

async fn open_session(
    State(app): State<Shared>,
    Body(body): Body<SessionBody>,
) -> Result<Json<SessionToken>, ApiError> {
    app.engine.read().state().player(body.player)?;
    Ok(Json(app.sessions.issue(body.player, Utc::now())))
}

#[derive(Debug, Deserialize)]
struct EditableQuery {
    category: Option<String>,
    limit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditableHeadline {
    pub source: SourceId,
    pub text: String,
    pub tokens: Vec<String>,
    pub replaceable: BTreeSet<usize>,
    pub category: Category,
    pub source_name: String,
    pub article_url: String,
    pub published_at: Timestamp,
}

async fn editable(
    State(app): State<Shared>,
    Auth(player): Auth,
    Params(q): Params<EditableQuery>,
) -> Result<Json<Vec<EditableHeadline>>, ApiError> {
    let category = parse_category(q.category.as_deref())?;
    let limit = q.limit.unwrap_or(20).min(MAX_EDITABLE);
    let engine = app.engine.read();
    let list = engine
        .editable_headlines(Some(player), category, limit)
        .into_iter()
        .map(|s| EditableHeadline {
            source: s.id,
            text: s.text(),
            tokens: s.tokens.clone(),
            replaceable: s.replaceable.clone(),
            category: s.category,
            source_name: s.source_name.clone(),
            article_url: s.article_url.clone(),
            published_at: s.published_at,
        })
        .collect();
    Ok(Json(list))
}

#[derive(Debug, Deserialize)]
struct EditBody {
    source: SourceId,
    index: usize,
    word: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EditAccepted {
    pub edit: EditId,
    pub original: String,
    pub edited: String,
    /// Advisory funniness estimate. Never stored and never used for points.
    pub estimate: Option<Estimate>,
    pub scorer: String,
}

async fn submit_edit(
    State(app): State<Shared>,
    Auth(player): Auth,
    headers: HeaderMap,
    Body(body): Body<EditBody>,
) -> Result<(StatusCode, Json<EditAccepted>), ApiError> {
    let command = Command::SubmitEdit {
        player,
        source: body.source,
        index: body.index,
        word: body.word,
    };
    let edit = match app.submit(command, scoped_key(&headers, &format!("p{player}"))).await? {
        Outcome::Edited { edit } => edit,
        other => return Err(unexpected(other)),
    };
    let (original, edited) = {
        let engine = app.engine.read();
        let state = engine.state();
        let e = state.edit(edit)?;
        (state.source(e.source_id)?.text(), state.edited_text(e))
    };
    // Outside the engine lock and after the write is durable.
    let estimate = match app.scorer.estimate(&original, &edited).await {
        Ok(est) => Some(est),
        Err(e) => {
            tracing::warn!(%edit, error = %e, "scorer rejected accepted edit");
            None
        }
    };
    Ok((
        StatusCode::CREATED,
        Json(EditAccepted {
            edit,
            original,
            edited,
            estimate,
            scorer: app.scorer.name().to_string(),
        }),
    ))
}

#[derive(Debug, Deserialize)]
struct QueueQuery {
    k: Option<usize>,
    category: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueItem {
    pub edit: EditId,
    pub original: String,
    pub edited: String,
    pub category: Category,
    pub served_at: Timestamp,
}

async fn rate_queue(
    State(app): State<Shared>,
    Auth(player): Auth,
    Params(q): Params<QueueQuery>,
) -> Result<Json<Vec<QueueItem>>, ApiError> {
    let category = parse_category(q.category.as_deref())?;
    let k = q.k.unwrap_or(app.config.rate_queue_len).min(MAX_QUEUE);
    let now = Utc::now();
    let engine = app.engine.read();
    let state = engine.state();
    app.sampler.maybe_refresh(state, now);
    let ids = app.sampler.serve_for_rating(state, player, k, category)?;

    let mut served = app.served.lock();
    if served.len() > SERVED_PRUNE_AT {
        let cutoff = now - Duration::hours(SERVED_RETENTION_HOURS);
        served.retain(|_, at| *at > cutoff);
    }
    let mut items = Vec::with_capacity(ids.len());
    for id in ids {
        let e = state.edit(id)?;
        let source = state.source(e.source_id)?;
        let served_at = *served.entry((player, id)).or_insert(now);
        items.push(QueueItem {
            edit: id,
            original: source.text(),
            edited: state.edited_text(e),
            category: source.category,
            served_at,
        });
    }
    Ok(Json(items))
}

#[derive(Debug, Deserialize)]
struct RatingBody {
    edit: EditId,
    grade: i64,
}

async fn submit_rating(
    State(app): State<Shared>,
    Auth(player): Auth,
    headers: HeaderMap,
    Body(body): Body<RatingBody>,
) -> Result<Json<RatingOutcome>, ApiError> {
    // A headline never served to this rater has had no dwell time at all.
    let served_at = app
        .served
        .lock()
        .get(&(player, body.edit))
        .copied()
        .unwrap_or_else(Utc::now);
    let command = Command::SubmitRating {
        player,
        edit: body.edit,
        grade: body.grade,
        served_at,
    };
    match app.submit(command, scoped_key(&headers, &format!("p{player}"))).await? {
        Outcome::Rated(outcome) => {
            app.served.lock().remove(&(player, body.edit));
            Ok(Json(outcome))
        }
        other => Err(unexpected(other)),
    }
}

#[derive(Debug, Deserialize)]
struct FlagBody {
    edit: EditId,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Ack {
    pub ok: bool,
}

async fn flag(
    State(app): State<Shared>,
    Auth(player): Auth,
    headers: HeaderMap,
    Body(body): Body<FlagBody>,
) -> Result<Json<Ack>, ApiError> {
    let command = Command::Flag {
        player,
        edit: body.edit,
    };
    app.submit(command, scoped_key(&headers, &format!("p{player}"))).await?;
    Ok(Json(Ack { ok: true }))
}

#[derive(Debug, Deserialize)]
struct SkipBody {
    target: HeadlineRef,
}

async fn skip(
    State(app): State<Shared>,
    Auth(player): Auth,
    headers: HeaderMap,
    Body(body): Body<SkipBody>,
) -> Result<Json<Ack>, ApiError> {
    let command = Command::Skip {
        player,
        target: body.target,
    };
    app.submit(command, scoped_key(&headers, &format!("p{player}"))).await?;
    Ok(Json(Ack { ok: true }))
}

async fn get_leaderboards(State(app): State<Shared>) -> Json<Leaderboards> {
    let engine = app.engine.read();
    Json(leaderboards(&engine.config().scoring, engine.state(), Utc::now()))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MyFeedback {
    pub player: PlayerId,
    pub standing: Standing,
    pub score: ScoreState,
    pub advice: BalanceAdvice,
    pub editor: EditorFeedback,
    pub rater: RaterFeedback,
}

async fn my_feedback(State(app): State<Shared>, Auth(player): Auth) -> Result<Json<MyFeedback>, ApiError> {
    let engine = app.engine.read();
    let state = engine.state();
    let cfg = &engine.config().scoring;
    let p = state.player(player)?;
    let stats = state.player_stats(player)?;
    Ok(Json(MyFeedback {
        player,
        standing: p.standing,
        score: score_state(cfg, p, stats),
        advice: balance_advice(cfg, p.edit_count, p.rating_count),
        editor: editor_feedback(state, player)?,
        rater: rater_feedback(state, player)?,
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Report {
    pub quality: QualityReport,
    pub cost_per_datum: String,
    pub categories: Vec<CategoryStats>,
}

async fn report(State(app): State<Shared>) -> Result<Json<Report>, ApiError> {
    let engine = app.engine.read();
    let quality = quality_report(engine.state(), app.config.budget_cents)?;
    Ok(Json(Report {
        cost_per_datum: quality.cost_per_datum_display(),
        quality,
        categories: category_report(engine.state()),
    }))
}

#[derive(Debug, Deserialize)]
struct ExportQuery {
    format: Option<String>,
}

async fn export(State(app): State<Shared>, Params(q): Params<ExportQuery>) -> Result<Response, ApiError> {
    let (delimiter, mime) = match q.format.as_deref().unwrap_or("csv") {
        "csv" => (Delimiter::Comma, "text/csv; charset=utf-8"),
        "tsv" => (Delimiter::Tab, "text/tab-separated-values; charset=utf-8"),
        other => return Err(ApiError::BadRequest(format!("unknown export format {other:?}"))),
    };
    let mut bytes = Vec::new();
    export_dataset(app.engine.read().state(), &mut bytes, delimiter)?;
    Ok(([(header::CONTENT_TYPE, mime)], bytes).into_response())
}

#[derive(Debug, Deserialize)]
struct ReinstateBody {
    edit: EditId,
}

async fn admin_reinstate(
    State(app): State<Shared>,
    _: Admin,
    headers: HeaderMap,
    Body(body): Body<ReinstateBody>,
) -> Result<Json<Ack>, ApiError> {
    app.submit(Command::Reinstate { edit: body.edit }, scoped_key(&headers, "admin"))
        .await?;
    Ok(Json(Ack { ok: true }))
}

#[derive(Debug, Deserialize)]
struct SuspendBody {
    player: PlayerId,
    #[serde(default)]
    reason: String,
}

async fn admin_suspend(
    State(app): State<Shared>,
    _: Admin,
    headers: HeaderMap,
    Body(body): Body<SuspendBody>,
) -> Result<Json<Ack>, ApiError> {
    let reason = if body.reason.trim().is_empty() {
        "suspended by moderator".to_string()
    } else {
        body.reason
    };
    let command = Command::Suspend {
        player: body.player,
        reason,
    };
    app.submit(command, scoped_key(&headers, "admin")).await?;
    Ok(Json(Ack { ok: true }))
}

#[derive(Debug, Deserialize)]
struct IngestBody {
    items: Vec<RawItem>,
    #[serde(default)]
    category: Option<String>,
}

async fn admin_ingest(
    State(app): State<Shared>,
    _: Admin,
    headers: HeaderMap,
    Body(body): Body<IngestBody>,
) -> Result<Json<IngestReport>, ApiError> {
    let command = Command::Ingest {
        items: body.items,
        default_category: parse_category(body.category.as_deref())?,
    };
    match app.submit(command, scoped_key(&headers, "admin")).await? {
        Outcome::Ingested(report) => Ok(Json(report)),
        other => Err(unexpected(other)),
    }
}

/// The idempotency key was first used for a different kind of command.
fn unexpected(_: Outcome) -> ApiError {
    ApiError::KeyReused
}
