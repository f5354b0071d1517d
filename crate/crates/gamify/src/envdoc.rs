//! File formats: the environment document (pretty JSON) and event
//! fixtures (one `BehaviorEvent` JSON object per line).

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use gamify_core::engine::EnvDocument;
use gamify_core::model::BehaviorEvent;

use crate::service::digest;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}:{line}: {source}")]
    Line {
        path: PathBuf,
        line: usize,
        source: serde_json::Error,
    },
}

/// Canonical bytes of a document. Exports are built from ordered maps, so
/// the same environment always produces the same bytes.
pub fn to_bytes(doc: &EnvDocument) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(doc).expect("documents always serialize");
    out.push(b'\n');
    out
}

pub fn read_document(path: &Path) -> Result<EnvDocument, FormatError> {
    let text = fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| FormatError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_document(path: &Path, doc: &EnvDocument) -> io::Result<()> {
    fs::write(path, to_bytes(doc))
}

/// Replaces any plaintext credentials in an incoming document by digests.
pub fn hash_credentials(doc: &mut EnvDocument) {
    for t in &mut doc.tools {
        if let Some(s) = t.secret.take() {
            t.secret = Some(digest(&s));
        }
    }
    for p in &mut doc.players {
        if let Some(s) = p.token.take() {
            p.token = Some(digest(&s));
        }
    }
}

pub fn parse_events(path: &Path, text: &str) -> Result<Vec<BehaviorEvent>, FormatError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|source| FormatError::Line {
                path: path.to_path_buf(),
                line: i + 1,
                source,
            })
        })
        .collect()
}

pub fn read_events(path: &Path) -> Result<Vec<BehaviorEvent>, FormatError> {
    let text = fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_events(path, &text)
}

pub fn events_to_bytes(events: &[BehaviorEvent]) -> Vec<u8> {
    let mut out = Vec::new();
    for e in events {
        serde_json::to_writer(&mut out, e).expect("events always serialize");
        out.push(b'\n');
    }
    out
}
