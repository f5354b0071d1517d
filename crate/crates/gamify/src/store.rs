//! Durable persistence: an append-only command log (`log.jsonl`, one
//! [`LogRecord`] per line) plus an occasional full-state snapshot
//! (`snapshot.json`). The engine state is a pure fold of the log, so the
//! snapshot is only a shortcut; recovery loads it and replays the tail.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use gamify_core::model::Timestamp;
use gamify_core::{Command, Engine, EngineState};
use serde::{Deserialize, Serialize};

pub const LOG_FILE: &str = "log.jsonl";
pub const SNAPSHOT_FILE: &str = "snapshot.json";
pub const LOCK_FILE: &str = "LOCK";
pub const DEFAULT_SNAPSHOT_EVERY: u64 = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub seq: u64,
    pub at: Timestamp,
    pub command: Command,
}

#[derive(Debug, Serialize, Deserialize)]
struct Snapshot {
    seq: u64,
    state: EngineState,
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("corrupt log at sequence number {seq}: {reason}")]
    CorruptLog { seq: u64, reason: String },
    #[error("corrupt snapshot: {0}")]
    CorruptSnapshot(String),
    #[error("the store failed and could not be reopened")]
    Unavailable,
    #[error("{0} is in use by another process")]
    Locked(PathBuf),
    #[error("cannot serialize record: {0}")]
    Encode(#[from] serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// What recovery found on disk.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Recovery {
    /// Sequence number the snapshot covered, if one was loaded.
    pub snapshot_seq: Option<u64>,
    /// Log records applied on top of the snapshot.
    pub replayed: u64,
    /// Bytes of a partial trailing record that were cut off.
    pub torn_bytes: Option<u64>,
}

#[derive(Debug)]
pub struct Store {
    dir: PathBuf,
    log: File,
    last_seq: u64,
    snapshot_every: u64,
    since_snapshot: u64,
    // Held for the store's lifetime; the OS releases it on exit or crash.
    _lock: File,
}

impl Store {
    /// Opens (creating if needed) the data directory and rebuilds the engine.
    /// `engine` supplies the classifier and brain; its state is replaced.
    pub fn open(dir: &Path, snapshot_every: u64, mut engine: Engine) -> Result<(Store, Engine, Recovery), StoreError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let lock_path = dir.join(LOCK_FILE);
        let lock = File::create(&lock_path).map_err(io_err(&lock_path))?;
        match lock.try_lock() {
            Ok(()) => {}
            Err(fs::TryLockError::WouldBlock) => return Err(StoreError::Locked(dir.to_path_buf())),
            Err(fs::TryLockError::Error(e)) => return Err(io_err(&lock_path)(e)),
        }
        let mut recovery = Recovery::default();

        let snap_path = dir.join(SNAPSHOT_FILE);
        let mut base_seq = 0;
        if snap_path.exists() {
            let text = fs::read_to_string(&snap_path).map_err(io_err(&snap_path))?;
            let snap: Snapshot =
                serde_json::from_str(&text).map_err(|e| StoreError::CorruptSnapshot(e.to_string()))?;
            base_seq = snap.seq;
            recovery.snapshot_seq = Some(snap.seq);
            engine = engine.with_state(snap.state);
        }

        let log_path = dir.join(LOG_FILE);
        let mut log = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(&log_path)
            .map_err(io_err(&log_path))?;
        let mut bytes = Vec::new();
        log.read_to_end(&mut bytes).map_err(io_err(&log_path))?;

        let mut last_seq = 0;
        let mut good_len = 0usize;
        let mut rest = &bytes[..];
        while !rest.is_empty() {
            let Some(nl) = rest.iter().position(|&b| b == b'\n') else {
                // No terminator: the write was cut short and never acknowledged.
                recovery.torn_bytes = Some(rest.len() as u64);
                break;
            };
            let line = &rest[..nl];
            let expected = last_seq + 1;
            let record: LogRecord = serde_json::from_slice(line).map_err(|e| StoreError::CorruptLog {
                seq: expected,
                reason: e.to_string(),
            })?;
            if record.seq != expected {
                return Err(StoreError::CorruptLog {
                    seq: expected,
                    reason: format!("found sequence number {}", record.seq),
                });
            }
            if record.seq > base_seq {
                engine
                    .apply(record.command, record.at)
                    .map_err(|e| StoreError::CorruptLog {
                        seq: record.seq,
                        reason: format!("logged command no longer applies: {e}"),
                    })?;
                recovery.replayed += 1;
            }
            last_seq = record.seq;
            good_len += nl + 1;
            rest = &rest[nl + 1..];
        }
        if last_seq < base_seq {
            return Err(StoreError::CorruptLog {
                seq: last_seq + 1,
                reason: format!("log ends before the snapshot at {base_seq}"),
            });
        }
        if let Some(n) = recovery.torn_bytes {
            log::warn!(
                "discarding {n} bytes of a partial record after sequence number {last_seq} in {}",
                log_path.display()
            );
            log.set_len(good_len as u64).map_err(io_err(&log_path))?;
            log.sync_all().map_err(io_err(&log_path))?;
        }
        log.seek(SeekFrom::End(0)).map_err(io_err(&log_path))?;

        let store = Store {
            dir: dir.to_path_buf(),
            log,
            last_seq,
            snapshot_every: snapshot_every.max(1),
            since_snapshot: recovery.replayed,
            _lock: lock,
        };
        Ok((store, engine, recovery))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn last_seq(&self) -> u64 {
        self.last_seq
    }

    /// Appends one record and syncs it to disk before returning.
    pub fn append(&mut self, at: Timestamp, command: &Command) -> Result<u64, StoreError> {
        #[derive(Serialize)]
        struct Borrowed<'a> {
            seq: u64,
            at: Timestamp,
            command: &'a Command,
        }
        let seq = self.last_seq + 1;
        let mut line = serde_json::to_vec(&Borrowed { seq, at, command })?;
        line.push(b'\n');
        let path = self.dir.join(LOG_FILE);
        self.log.write_all(&line).map_err(io_err(&path))?;
        self.log.sync_data().map_err(io_err(&path))?;
        self.last_seq = seq;
        self.since_snapshot += 1;
        Ok(seq)
    }

    /// Writes a snapshot when enough records have accumulated since the last.
    pub fn maybe_snapshot(&mut self, engine: &Engine) -> Result<bool, StoreError> {
        if self.since_snapshot < self.snapshot_every {
            return Ok(false);
        }
        self.snapshot(engine)?;
        Ok(true)
    }

    /// Atomically replaces the snapshot with the current state.
    pub fn snapshot(&mut self, engine: &Engine) -> Result<(), StoreError> {
        #[derive(Serialize)]
        struct Borrowed<'a> {
            seq: u64,
            state: &'a EngineState,
        }
        let tmp = self.dir.join(format!("{SNAPSHOT_FILE}.tmp"));
        let bytes = serde_json::to_vec(&Borrowed {
            seq: self.last_seq,
            state: engine.state(),
        })?;
        {
            let mut f = File::create(&tmp).map_err(io_err(&tmp))?;
            f.write_all(&bytes).map_err(io_err(&tmp))?;
            f.sync_all().map_err(io_err(&tmp))?;
        }
        let dest = self.dir.join(SNAPSHOT_FILE);
        fs::rename(&tmp, &dest).map_err(io_err(&dest))?;
        // Persist the rename itself.
        if let Ok(d) = File::open(&self.dir) {
            let _ = d.sync_all();
        }
        self.since_snapshot = 0;
        Ok(())
    }
}

/// True if `dir` holds no log records and no snapshot.
pub fn is_empty(dir: &Path) -> bool {
    let log_empty = fs::metadata(dir.join(LOG_FILE)).map(|m| m.len() == 0).unwrap_or(true);
    log_empty && !dir.join(SNAPSHOT_FILE).exists()
}

/// Reads every complete record of a log file, for reports and tooling.
pub fn read_log(dir: &Path) -> Result<Vec<LogRecord>, StoreError> {
    let path = dir.join(LOG_FILE);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_err(&path)(e)),
    };
    let mut out = Vec::new();
    for line in text.split_inclusive('\n').filter(|l| l.ends_with('\n')) {
        let seq = out.len() as u64 + 1;
        out.push(serde_json::from_str(line).map_err(|e| StoreError::CorruptLog {
            seq,
            reason: e.to_string(),
        })?);
    }
    Ok(out)
}
