//! The single-writer pipeline shared by the HTTP API and the CLI: commands
//! are applied to the engine, then appended to the log, and only then
//! acknowledged. Reads share a lock with the writer so they never observe a
//! half-applied command.

use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use gamify_core::engine::Outcome;
use gamify_core::model::Timestamp;
use gamify_core::{Command, Engine};
use sha2::{Digest, Sha256};

use crate::clock::Clock;
use crate::store::{Recovery, Store, StoreError};

/// Hex SHA-256 of a credential. Only digests are stored or logged.
pub fn digest(secret: &str) -> String {
    hex::encode(Sha256::digest(secret.as_bytes()))
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Engine(#[from] gamify_core::Error),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Who is making a request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Caller {
    Admin,
    Tool(gamify_core::ToolId),
    Player(gamify_core::PlayerId),
}

struct Inner {
    engine: Engine,
    store: Option<Store>,
}

pub struct Service {
    inner: RwLock<Inner>,
    clock: Arc<dyn Clock>,
    admin_digest: Option<String>,
    dir: Option<PathBuf>,
    snapshot_every: u64,
}

impl Service {
    /// A service without persistence, for tests and one-shot tooling.
    pub fn in_memory(clock: Arc<dyn Clock>, admin_key: Option<&str>) -> Self {
        Self {
            inner: RwLock::new(Inner {
                engine: Engine::new(),
                store: None,
            }),
            clock,
            admin_digest: admin_key.map(digest),
            dir: None,
            snapshot_every: 0,
        }
    }

    /// Opens the data directory, recovering state from snapshot and log.
    pub fn open(
        dir: &Path,
        snapshot_every: u64,
        clock: Arc<dyn Clock>,
        admin_key: Option<&str>,
    ) -> Result<(Self, Recovery), StoreError> {
        let (store, engine, recovery) = Store::open(dir, snapshot_every, Engine::new())?;
        let svc = Self {
            inner: RwLock::new(Inner {
                engine,
                store: Some(store),
            }),
            clock,
            admin_digest: admin_key.map(digest),
            dir: Some(dir.to_path_buf()),
            snapshot_every,
        };
        Ok((svc, recovery))
    }

    pub fn now(&self) -> Timestamp {
        self.clock.now()
    }

    /// Applies a command at the clock's current time.
    pub fn submit(&self, cmd: Command) -> Result<Outcome, ServiceError> {
        let at = self.clock.now();
        self.submit_at(cmd, at)
    }

    /// Applies a command at `at`; returns only once the command is durable.
    pub fn submit_at(&self, cmd: Command, at: Timestamp) -> Result<Outcome, ServiceError> {
        let mut inner = self.inner.write().unwrap_or_else(|e| e.into_inner());
        if self.dir.is_some() && inner.store.is_none() {
            return Err(StoreError::Unavailable.into());
        }
        let logged = inner.store.is_some().then(|| cmd.clone());
        let outcome = inner.engine.apply(cmd, at)?;
        if let Some(cmd) = logged {
            let Inner { engine, store } = &mut *inner;
            let appended = store.as_mut().expect("checked above").append(at, &cmd);
            if let Err(e) = appended {
                // The engine is ahead of the log; rebuild it from disk. The
                // old handle must go first because it holds the lock.
                log::error!("log append failed, reloading state: {e}");
                *store = None;
                let dir = self.dir.as_deref().expect("persistent services have a directory");
                match Store::open(dir, self.snapshot_every, Engine::new()) {
                    Ok((s, en, _)) => {
                        *store = Some(s);
                        *engine = en;
                    }
                    // Without a store every later write fails loudly.
                    Err(reload) => log::error!("reload failed, service is read-only: {reload}"),
                }
                return Err(e.into());
            }
            let store = store.as_mut().expect("appended above");
            if let Err(e) = store.maybe_snapshot(engine) {
                // The log already has the record, so this only costs time.
                log::warn!("snapshot failed: {e}");
            }
        }
        Ok(outcome)
    }

    /// Runs `f` against a consistent view of the engine.
    pub fn read<T>(&self, f: impl FnOnce(&Engine) -> T) -> T {
        let inner = self.inner.read().unwrap_or_else(|e| e.into_inner());
        f(&inner.engine)
    }

    /// Writes a snapshot now (no-op without persistence).
    pub fn snapshot(&self) -> Result<(), StoreError> {
        let mut inner = self.inner.write().unwrap_or_else(|e| e.into_inner());
        let Inner { engine, store } = &mut *inner;
        match store {
            Some(s) => s.snapshot(engine),
            None => Ok(()),
        }
    }

    pub fn check_admin(&self, key: &str) -> bool {
        self.admin_digest.as_deref() == Some(digest(key).as_str())
    }

    pub fn check_tool(&self, id: &str, key: &str) -> bool {
        let d = digest(key);
        self.read(|e| e.env().tools.get(id).and_then(|t| t.secret.as_deref()) == Some(d.as_str()))
    }

    pub fn check_player(&self, id: &str, token: &str) -> bool {
        let d = digest(token);
        self.read(|e| e.env().players.get(id).and_then(|p| p.token.as_deref()) == Some(d.as_str()))
    }
}
