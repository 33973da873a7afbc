//! Writing sessions persisted as an append-only JSON-lines log.
//!
//! Every mutation is one line, synced before the call returns; opening a
//! store replays the log. A torn final line (crash mid-write) is skipped.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::error::{Error, Result};

fn default_k() -> usize {
    lyricraft_core::generation::DEFAULT_CANDIDATES
}

/// Per-session defaults for suggestion requests.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionSettings {
    /// Fixed syllable target; `None` derives it from the input lines.
    #[serde(default)]
    pub syllable_target: Option<usize>,
    #[serde(default)]
    pub force_rhyme: bool,
    #[serde(default = "default_k")]
    pub k: usize,
}

impl Default for SessionSettings {
    fn default() -> Self {
        SessionSettings { syllable_target: None, force_rhyme: false, k: default_k() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub created_at_ms: u64,
    pub updated_at_ms: u64,
    pub settings: SessionSettings,
    pub accepted_lines: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
enum Op {
    Create { id: String, at_ms: u64, settings: SessionSettings },
    Accept { id: String, at_ms: u64, line: String },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SessionError {
    #[error("unknown session {0:?}")]
    UnknownSession(String),
    #[error("accepted line is empty")]
    EmptyLine,
}

#[derive(Debug, Default)]
struct State {
    sessions: BTreeMap<String, Session>,
    log: Option<File>,
}

#[derive(Debug)]
pub struct SessionStore {
    path: Option<PathBuf>,
    state: Mutex<State>,
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

fn apply(sessions: &mut BTreeMap<String, Session>, op: Op) -> std::result::Result<(), SessionError> {
    match op {
        Op::Create { id, at_ms, settings } => {
            let session = Session {
                id: id.clone(),
                created_at_ms: at_ms,
                updated_at_ms: at_ms,
                settings,
                accepted_lines: Vec::new(),
            };
            sessions.insert(id, session);
        }
        Op::Accept { id, at_ms, line } => {
            let s = sessions.get_mut(&id).ok_or(SessionError::UnknownSession(id))?;
            s.accepted_lines.push(line);
            s.updated_at_ms = at_ms;
        }
    }
    Ok(())
}

impl SessionStore {
    /// A store that forgets everything on drop.
    pub fn in_memory() -> Self {
        SessionStore { path: None, state: Mutex::new(State::default()) }
    }

    /// Opens or creates the log at `path` and replays it.
    pub fn open(path: &Path) -> Result<Self> {
        let mut sessions = BTreeMap::new();
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
            Err(e) => return Err(Error::io(path, e)),
        };
        // bytes of complete records; anything after the last newline is torn
        let mut keep = text.len();
        let records: Vec<&str> = text.split_inclusive('\n').collect();
        let last = records.len();
        let mut offset = 0;
        for (i, raw) in records.iter().enumerate() {
            let record_start = offset;
            offset += raw.len();
            if raw.trim().is_empty() {
                continue;
            }
            let op: Op = match serde_json::from_str(raw) {
                Ok(op) if raw.ends_with('\n') => op,
                Ok(op) => {
                    keep = record_start;
                    op
                }
                Err(e) if i + 1 == last && !raw.ends_with('\n') => {
                    log::warn!("{}: dropping torn final record: {e}", path.display());
                    keep = record_start;
                    continue;
                }
                Err(e) => return Err(Error::Parse { path: path.to_path_buf(), record: i + 1, message: e.to_string() }),
            };
            apply(&mut sessions, op).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                record: i + 1,
                message: e.to_string(),
            })?;
        }
        let mut log = OpenOptions::new().create(true).append(true).open(path).map_err(|e| Error::io(path, e))?;
        if keep < text.len() {
            // rewrite a valid but unterminated tail with its newline, drop a torn one
            log.set_len(keep as u64).map_err(|e| Error::io(path, e))?;
            let tail = &text[keep..];
            if serde_json::from_str::<Op>(tail).is_ok() {
                log.write_all(tail.as_bytes()).and_then(|_| log.write_all(b"\n")).map_err(|e| Error::io(path, e))?;
            }
        }
        Ok(SessionStore { path: Some(path.to_path_buf()), state: Mutex::new(State { sessions, log: Some(log) }) })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, State> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn commit(&self, state: &mut State, op: Op) -> Result<()> {
        if let Some(log) = state.log.as_mut() {
            let path = self.path.as_deref().unwrap_or(Path::new(""));
            let mut line = serde_json::to_string(&op).expect("op serializes");
            line.push('\n');
            log.write_all(line.as_bytes()).map_err(|e| Error::io(path, e))?;
            log.sync_data().map_err(|e| Error::io(path, e))?;
        }
        apply(&mut state.sessions, op).expect("validated before commit");
        Ok(())
    }

    pub fn create(&self, settings: SessionSettings) -> Result<Session> {
        let id = Uuid::new_v4().to_string();
        let mut state = self.lock();
        self.commit(&mut state, Op::Create { id: id.clone(), at_ms: now_ms(), settings })?;
        Ok(state.sessions[&id].clone())
    }

    pub fn get(&self, id: &str) -> Option<Session> {
        self.lock().sessions.get(id).cloned()
    }

    pub fn len(&self) -> usize {
        self.lock().sessions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Appends an accepted line. The outer error is IO, the inner one a
    /// request problem.
    pub fn accept(&self, id: &str, line: &str) -> Result<std::result::Result<Session, SessionError>> {
        let line = line.trim();
        if line.is_empty() {
            return Ok(Err(SessionError::EmptyLine));
        }
        let mut state = self.lock();
        if !state.sessions.contains_key(id) {
            return Ok(Err(SessionError::UnknownSession(id.to_string())));
        }
        self.commit(&mut state, Op::Accept { id: id.to_string(), at_ms: now_ms(), line: line.to_string() })?;
        Ok(Ok(state.sessions[id].clone()))
    }

    pub fn flush(&self) -> Result<()> {
        let mut state = self.lock();
        if let (Some(log), Some(path)) = (state.log.as_mut(), self.path.as_deref()) {
            log.flush().map_err(|e| Error::io(path, e))?;
            log.sync_all().map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }
}
