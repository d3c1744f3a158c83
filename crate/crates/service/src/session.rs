//! Bearer tokens. Kept in memory only; clients open a new session after a restart.

use std::collections::HashMap;

use chrono::{Duration, Utc};
use parking_lot::Mutex;
use quipline_core::{PlayerId, Timestamp};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionToken {
    pub token: String,
    pub player: PlayerId,
    pub expires_at: Timestamp,
}

#[derive(Debug)]
pub struct Sessions {
    ttl: Duration,
    tokens: Mutex<HashMap<String, SessionToken>>,
}

impl Sessions {
    pub fn new(ttl_secs: i64) -> Self {
        Self {
            ttl: Duration::seconds(ttl_secs),
            tokens: Mutex::new(HashMap::new()),
        }
    }

    pub fn issue(&self, player: PlayerId, now: Timestamp) -> SessionToken {
        let session = SessionToken {
            token: uuid::Uuid::new_v4().simple().to_string(),
            player,
            expires_at: now + self.ttl,
        };
        let mut tokens = self.tokens.lock();
        tokens.retain(|_, s| s.expires_at > now);
        tokens.insert(session.token.clone(), session.clone());
        session
    }

    /// The player behind `token`, if the token exists and has not expired at `now`.
    pub fn resolve(&self, token: &str, now: Timestamp) -> Option<PlayerId> {
        let mut tokens = self.tokens.lock();
        match tokens.get(token) {
            Some(s) if s.expires_at > now => Some(s.player),
            Some(_) => {
                tokens.remove(token);
                None
            }
            None => None,
        }
    }

    pub fn resolve_now(&self, token: &str) -> Option<PlayerId> {
        self.resolve(token, Utc::now())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expired_tokens_are_rejected() {
        let sessions = Sessions::new(60);
        let t0 = Utc::now();
        let s = sessions.issue(PlayerId(3), t0);
        assert_eq!(sessions.resolve(&s.token, t0 + Duration::seconds(59)), Some(PlayerId(3)));
        assert_eq!(sessions.resolve(&s.token, t0 + Duration::seconds(60)), None);
        assert_eq!(sessions.resolve(&s.token, t0), None, "expired token is forgotten");
        assert_eq!(sessions.resolve("nope", t0), None);
    }
}
