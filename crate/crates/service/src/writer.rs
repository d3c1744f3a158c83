//! The single writer. Commands from all request handlers funnel into one thread that runs
//! them against the engine, appends the resulting events in one synced write per batch,
//! and only then answers the callers.

use std::sync::mpsc;
use std::sync::Arc;
use std::thread;

use chrono::Utc;
use parking_lot::RwLock;
use quipline_core::{Command, Engine, GameError, Outcome};
use tokio::sync::oneshot;

use crate::persistence::EventStore;

const MAX_BATCH: usize = 512;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WriteError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("event log write failed: {0}")]
    Persist(String),
    #[error("writer stopped")]
    Stopped,
}

struct Request {
    command: Command,
    key: Option<String>,
    reply: oneshot::Sender<Result<Outcome, WriteError>>,
}

#[derive(Clone)]
pub struct WriterHandle {
    tx: mpsc::Sender<Request>,
}

impl WriterHandle {
    pub async fn submit(&self, command: Command, key: Option<String>) -> Result<Outcome, WriteError> {
        let (reply, rx) = oneshot::channel();
        self.tx
            .send(Request {
                command,
                key,
                reply,
            })
            .map_err(|_| WriteError::Stopped)?;
        rx.await.map_err(|_| WriteError::Stopped)?
    }
}

/// Starts the writer thread. It exits once every handle is dropped.
pub fn spawn(engine: Arc<RwLock<Engine>>, store: EventStore) -> (WriterHandle, thread::JoinHandle<()>) {
    let (tx, rx) = mpsc::channel::<Request>();
    let join = thread::Builder::new()
        .name("event-writer".into())
        .spawn(move || run(engine, store, rx))
        .expect("spawn writer thread");
    (WriterHandle { tx }, join)
}

fn run(engine: Arc<RwLock<Engine>>, mut store: EventStore, rx: mpsc::Receiver<Request>) {
    while let Ok(first) = rx.recv() {
        let mut batch = vec![first];
        while batch.len() < MAX_BATCH {
            match rx.try_recv() {
                Ok(r) => batch.push(r),
                Err(_) => break,
            }
        }

        let mut results = Vec::with_capacity(batch.len());
        let mut replies = Vec::with_capacity(batch.len());
        let (durable, fresh) = {
            let mut eng = engine.write();
            let durable = eng.events().len();
            for r in batch {
                results.push(eng.execute(r.command, r.key.as_deref(), Utc::now()).map_err(WriteError::from));
                replies.push(r.reply);
            }
            (durable, eng.events()[durable..].to_vec())
        };

        if let Err(e) = store.append(&fresh) {
            tracing::error!(error = %e, path = %store.path().display(), "append failed, rolling back batch");
            let mut eng = engine.write();
            let config = eng.config().clone();
            let kept = eng.events()[..durable].to_vec();
            *eng = Engine::replay(config, kept).expect("durable prefix replays");
            let failure = WriteError::Persist(e.to_string());
            for r in results.iter_mut().filter(|r| r.is_ok()) {
                *r = Err(failure.clone());
            }
        }

        for (reply, result) in replies.into_iter().zip(results) {
            let _ = reply.send(result);
        }
    }
}
