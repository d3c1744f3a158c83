//! Append-only NDJSON event log on disk.

use std::fs::{File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use quipline_core::event::{decode_line, encode_line};
use quipline_core::{GameError, GameEvent};

#[derive(Debug, thiserror::Error)]
pub enum PersistError {
    #[error("event log {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Corrupt(#[from] GameError),
}

/// What `open` had to do to the file before replaying it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Recovery {
    /// Bytes of an unterminated final record that were cut off.
    pub dropped_bytes: u64,
}

#[derive(Debug)]
pub struct EventStore {
    path: PathBuf,
    file: File,
    len: u64,
}

impl EventStore {
    /// Opens or creates the log and decodes every complete record. A final line without
    /// its newline is a torn write and is truncated away; anything else malformed is
    /// reported as `CorruptLog`.
    pub fn open(path: &Path) -> Result<(Self, Vec<GameEvent>, Recovery), PersistError> {
        let io_err = |source| PersistError::Io {
            path: path.to_path_buf(),
            source,
        };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io_err)?;
        }
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(path)
            .map_err(io_err)?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes).map_err(io_err)?;

        let complete = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        let mut recovery = Recovery::default();
        if complete < bytes.len() {
            recovery.dropped_bytes = (bytes.len() - complete) as u64;
            tracing::warn!(
                path = %path.display(),
                bytes = recovery.dropped_bytes,
                "dropping truncated final record"
            );
            file.set_len(complete as u64).map_err(io_err)?;
            file.sync_all().map_err(io_err)?;
        }

        let events = decode_all(&bytes[..complete])?;
        let len = complete as u64;
        file.seek(SeekFrom::End(0)).map_err(io_err)?;
        Ok((
            Self {
                path: path.to_path_buf(),
                file,
                len,
            },
            events,
            recovery,
        ))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Writes `events` and syncs them to disk. On failure the file is cut back to its
    /// previous length so no partial batch survives.
    pub fn append(&mut self, events: &[GameEvent]) -> io::Result<()> {
        if events.is_empty() {
            return Ok(());
        }
        let mut buf = Vec::with_capacity(events.len() * 160);
        for event in events {
            buf.extend_from_slice(encode_line(event).as_bytes());
            buf.push(b'\n');
        }
        let written = self.file.write_all(&buf).and_then(|_| self.file.sync_data());
        match written {
            Ok(()) => {
                self.len += buf.len() as u64;
                Ok(())
            }
            Err(e) => {
                let _ = self.file.set_len(self.len);
                Err(e)
            }
        }
    }
}

fn decode_all(bytes: &[u8]) -> Result<Vec<GameEvent>, GameError> {
    let mut events: Vec<GameEvent> = Vec::new();
    for (lineno, line) in bytes.split(|&b| b == b'\n').enumerate() {
        let expected = events.len() as u64 + 1;
        let corrupt = |reason: String| GameError::CorruptLog {
            seq: expected,
            reason: format!("line {}: {reason}", lineno + 1),
        };
        let text = std::str::from_utf8(line).map_err(|e| corrupt(e.to_string()))?;
        if text.trim().is_empty() {
            continue;
        }
        let event = decode_line(text).map_err(|e| corrupt(e.to_string()))?;
        if event.seq != expected {
            return Err(GameError::CorruptLog {
                seq: event.seq,
                reason: format!("line {}: expected seq {expected}", lineno + 1),
            });
        }
        events.push(event);
    }
    Ok(events)
}
