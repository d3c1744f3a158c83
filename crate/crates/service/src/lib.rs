//! HTTP service for the headline micro-edit game: JSON API, durable event log, feed
//! polling and the pluggable funniness scorer.

pub mod app;
pub mod config;
pub mod error;
pub mod feeds;
pub mod persistence;
pub mod scorer;
pub mod session;
pub mod writer;

use std::io::BufReader;
use std::net::SocketAddr;
use std::sync::Arc;

use parking_lot::RwLock;
use quipline_core::moderation::parse_blacklist;
use quipline_core::Engine;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

pub use app::{router, AppState};
pub use config::{ConfigError, ScorerConfig, ScorerKind, ServiceConfig, CONFIG_ENV};
pub use error::{status_for, ApiError, ErrorBody};
pub use persistence::{EventStore, PersistError, Recovery};
pub use scorer::{BuiltinHeuristic, Estimate, ExternalHttp, FunninessScorer, HeuristicWeights, ScorerError};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Persist(#[from] PersistError),
    #[error("blacklist {path}: {source}")]
    Blacklist { path: String, source: std::io::Error },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// A running server. Dropping it does not stop the server; call [`Server::shutdown`].
pub struct Server {
    pub addr: SocketAddr,
    pub recovery: Recovery,
    pub state: Arc<AppState>,
    stop: Option<oneshot::Sender<()>>,
    task: JoinHandle<std::io::Result<()>>,
    pollers: Vec<JoinHandle<()>>,
}

impl Server {
    /// Stops accepting connections and waits for in-flight requests.
    pub async fn shutdown(mut self) -> std::io::Result<()> {
        for p in &self.pollers {
            p.abort();
        }
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        self.task.await.map_err(std::io::Error::other)?
    }
}

/// Replays the log, binds the listener and starts serving and polling feeds.
pub async fn start(mut config: ServiceConfig) -> Result<Server, ServiceError> {
    config.validate()?;
    if let Some(path) = &config.blacklist_path {
        let file = std::fs::File::open(path).map_err(|source| ServiceError::Blacklist {
            path: path.display().to_string(),
            source,
        })?;
        let words = parse_blacklist(BufReader::new(file)).map_err(|source| ServiceError::Blacklist {
            path: path.display().to_string(),
            source,
        })?;
        config.engine.moderation.blacklist.extend(words);
    }

    let (store, events, recovery) = EventStore::open(&config.log_path)?;
    let count = events.len();
    let engine = Engine::replay(config.engine.clone(), events).map_err(PersistError::Corrupt)?;
    tracing::info!(events = count, path = %config.log_path.display(), "event log replayed");

    let engine = Arc::new(RwLock::new(engine));
    let (writer, _writer_thread) = writer::spawn(engine.clone(), store);
    let scorer = scorer::from_config(&config.scorer);
    let pollers = feeds::spawn_pollers(&config.feeds, writer.clone());
    let listener = tokio::net::TcpListener::bind((config.host.as_str(), config.port)).await?;
    let addr = listener.local_addr()?;
    let state = Arc::new(AppState::new(config, engine, writer, scorer));

    let (stop, stopped) = oneshot::channel::<()>();
    let app = router(state.clone());
    let task = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = stopped.await;
            })
            .await
    });
    Ok(Server {
        addr,
        recovery,
        state,
        stop: Some(stop),
        task,
        pollers,
    })
}
