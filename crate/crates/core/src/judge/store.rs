use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::service::Choice;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Judgment {
    pub trial_id: u32,
    pub pair_id: String,
    pub condition: String,
    pub subcondition: String,
    #[serde(default)]
    pub features: BTreeMap<String, String>,
    pub attention: bool,
    pub choice: Choice,
    pub correct: bool,
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    SessionCreated {
        session_id: String,
        list_id: u32,
        timestamp: u64,
    },
    Judgment {
        session_id: String,
        #[serde(flatten)]
        judgment: Judgment,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub session_id: String,
    pub list_id: u32,
    /// Judgments in trial order; the cursor is their count.
    pub judgments: Vec<Judgment>,
}

impl Session {
    pub fn cursor(&self) -> usize {
        self.judgments.len()
    }
}

/// Session state reconstructed from, and persisted to, a JSON Lines event
/// log. Every mutation is appended and flushed before it is applied.
#[derive(Debug, Default)]
pub struct JudgmentStore {
    path: Option<PathBuf>,
    file: Option<File>,
    /// Creation order.
    order: Vec<String>,
    sessions: BTreeMap<String, Session>,
    events: usize,
}

impl JudgmentStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (creating if needed) the log at `path` and replays it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut store = JudgmentStore::default();
        if path.exists() {
            let reader = BufReader::new(File::open(&path).map_err(|e| Error::io(&path, e))?);
            for (i, line) in reader.lines().enumerate() {
                let line = line.map_err(|e| Error::io(&path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let event: Event = serde_json::from_str(&line).map_err(|e| Error::Json {
                    line: i + 1,
                    message: e.to_string(),
                })?;
                store.apply(event).map_err(|e| Error::Json {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        store.file = Some(file);
        store.path = Some(path);
        Ok(store)
    }

    /// Rebuilds state from a sequence of events.
    pub fn replay(events: impl IntoIterator<Item = Event>) -> Result<Self> {
        let mut store = JudgmentStore::default();
        for e in events {
            store.apply(e)?;
        }
        Ok(store)
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    fn apply(&mut self, event: Event) -> Result<()> {
        match event {
            Event::SessionCreated {
                session_id, list_id, ..
            } => {
                if self.sessions.contains_key(&session_id) {
                    return Err(Error::Judge(format!("session {session_id} created twice")));
                }
                self.order.push(session_id.clone());
                self.sessions.insert(
                    session_id.clone(),
                    Session {
                        session_id,
                        list_id,
                        judgments: Vec::new(),
                    },
                );
            }
            Event::Judgment { session_id, judgment } => {
                let session = self
                    .sessions
                    .get_mut(&session_id)
                    .ok_or_else(|| Error::Judge(format!("judgment for unknown session {session_id}")))?;
                if judgment.trial_id as usize != session.cursor() + 1 {
                    return Err(Error::Judge(format!(
                        "session {session_id}: judgment for trial {} at cursor {}",
                        judgment.trial_id,
                        session.cursor()
                    )));
                }
                session.judgments.push(judgment);
            }
        }
        self.events += 1;
        Ok(())
    }

    /// Validates, persists, then applies `event`.
    pub fn append(&mut self, event: Event) -> Result<()> {
        match &event {
            Event::SessionCreated { session_id, .. } if self.sessions.contains_key(session_id) => {
                return Err(Error::Judge(format!("session {session_id} already exists")));
            }
            Event::Judgment { session_id, judgment } => {
                let session = self
                    .sessions
                    .get(session_id)
                    .ok_or_else(|| Error::Judge(format!("unknown session {session_id}")))?;
                if judgment.trial_id as usize != session.cursor() + 1 {
                    return Err(Error::Judge(format!(
                        "trial {} is not next (cursor {})",
                        judgment.trial_id,
                        session.cursor()
                    )));
                }
            }
            Event::SessionCreated { .. } => {}
        }
        if let Some(file) = &mut self.file {
            let mut line = serde_json::to_string(&event).expect("events serialize");
            line.push('\n');
            let path = self.path.clone().unwrap_or_default();
            file.write_all(line.as_bytes()).map_err(|e| Error::io(&path, e))?;
            file.flush().map_err(|e| Error::io(&path, e))?;
        }
        self.apply(event)
    }

    pub fn session(&self, id: &str) -> Option<&Session> {
        self.sessions.get(id)
    }

    /// Sessions in creation order.
    pub fn sessions(&self) -> impl Iterator<Item = &Session> {
        self.order.iter().map(|id| &self.sessions[id])
    }

    pub fn session_count(&self) -> usize {
        self.order.len()
    }

    pub fn event_count(&self) -> usize {
        self.events
    }
}
