//! Session bookkeeping behind the HTTP routes. All state sits behind one
//! mutex; every accepted write is journaled before it becomes visible.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex, MutexGuard};

use blindpe_core::annotation::iso8601;
use blindpe_core::{AnnotationRecord, ErrorFlags};
use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::clock::Clock;
use crate::journal::{Journal, JournalEntry, JournalError};
use crate::study::Study;

pub const DEFAULT_DEADLINE_MINUTES: u32 = 90;

pub const DEFAULT_INSTRUCTIONS: &str = "The translation below was produced by a machine translation system. \
Post-edit each segment: correct spelling and grammatical errors, but not style. \
Then tick every error type present in the shown translation (terminology, omission, typography) \
and leave a comment if you wish.";

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub deadline_minutes: u32,
    /// Shown with every session. Operators decide what raters are told.
    pub instructions: String,
    /// Bearer token for `GET /export`.
    pub operator_token: String,
    /// Client-side draft saving, passed through to the UI.
    pub autosave: bool,
    /// Compact the journal once this many superseded submissions pile up.
    pub compact_after: usize,
}

impl ServiceConfig {
    pub fn new(operator_token: impl Into<String>) -> Self {
        Self {
            deadline_minutes: DEFAULT_DEADLINE_MINUTES,
            instructions: DEFAULT_INSTRUCTIONS.into(),
            operator_token: operator_token.into(),
            autosave: true,
            compact_after: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    Active,
    Expired,
    Finished,
}

#[derive(Debug, Clone)]
struct Submission {
    record: AnnotationRecord,
    revision: u32,
}

#[derive(Debug, Clone)]
struct Session {
    rater_id: String,
    started_at: DateTime<Utc>,
    deadline: DateTime<Utc>,
    rows: Vec<Option<Submission>>,
    /// Set once expiry has been observed, so a clock stepping back cannot reopen.
    closed: bool,
}

impl Session {
    /// The deadline instant itself already counts as expired.
    fn state(&self, now: DateTime<Utc>) -> SessionState {
        if self.rows.iter().all(Option::is_some) {
            SessionState::Finished
        } else if self.closed || now >= self.deadline {
            SessionState::Expired
        } else {
            SessionState::Active
        }
    }

    fn observe(&mut self, now: DateTime<Utc>) -> SessionState {
        let state = self.state(now);
        if state == SessionState::Expired {
            self.closed = true;
        }
        state
    }

    fn remaining_seconds(&self, now: DateTime<Utc>) -> i64 {
        (self.deadline - now).num_seconds().max(0)
    }

    fn cursor(&self) -> Option<usize> {
        self.rows.iter().position(Option::is_none)
    }

    fn submitted(&self) -> usize {
        self.rows.iter().filter(|r| r.is_some()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionCreated {
    pub token: String,
    pub rater_id: String,
    #[serde(with = "iso8601")]
    pub started_at: DateTime<Utc>,
    #[serde(with = "iso8601")]
    pub deadline: DateTime<Utc>,
    pub total: usize,
    pub instructions: String,
    pub autosave: bool,
}

/// Exactly what a rater's client gets for one segment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskPayload {
    pub segment_id: String,
    pub source: String,
    pub target: String,
    /// 1-based.
    pub position: usize,
    pub total: usize,
    pub remaining_seconds: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmitRequest {
    pub postedit: String,
    #[serde(default)]
    pub flags: ErrorFlags,
    #[serde(default)]
    pub comment: Option<String>,
    /// Optional guard: must name the segment at this index.
    #[serde(default)]
    pub segment_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmitAck {
    pub segment_id: String,
    pub position: usize,
    pub revision: u32,
    pub completed: bool,
    #[serde(with = "iso8601")]
    pub submitted_at: DateTime<Utc>,
    pub state: SessionState,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionStatus {
    pub rater_id: String,
    pub state: SessionState,
    #[serde(with = "iso8601")]
    pub started_at: DateTime<Utc>,
    #[serde(with = "iso8601")]
    pub deadline: DateTime<Utc>,
    pub remaining_seconds: i64,
    pub total: usize,
    pub submitted: usize,
    /// Index of the first segment not yet submitted.
    pub cursor: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("no prepared document for rater {0:?}")]
    UnknownRater(String),
    #[error("rater {0:?} already has a session")]
    SessionExists(String),
    #[error("unknown session")]
    UnknownSession,
    #[error("task {index} is out of range (0..{total})")]
    IndexOutOfRange { index: usize, total: usize },
    #[error("session expired")]
    Expired,
    #[error("session finished")]
    Finished,
    #[error("{0}")]
    Invalid(String),
    #[error("operator token required")]
    Unauthorized,
    #[error(transparent)]
    Journal(#[from] JournalError),
}

#[derive(Debug, thiserror::Error)]
pub enum OpenError {
    #[error(transparent)]
    Journal(#[from] JournalError),
    #[error("journal does not match the study: {0}")]
    Mismatch(String),
}

struct Inner {
    journal: Journal,
    sessions: HashMap<String, Session>,
    by_rater: HashMap<String, String>,
    late: Vec<JournalEntry>,
    superseded: usize,
}

pub struct Collector {
    study: Study,
    config: ServiceConfig,
    clock: Arc<dyn Clock>,
    inner: Mutex<Inner>,
}

impl Collector {
    /// Opens the journal at `journal_path` and replays it.
    pub fn open(study: Study, config: ServiceConfig, clock: Arc<dyn Clock>, journal_path: &Path) -> Result<Self, OpenError> {
        let (journal, entries) = Journal::open(journal_path)?;
        let mut inner = Inner {
            journal,
            sessions: HashMap::new(),
            by_rater: HashMap::new(),
            late: Vec::new(),
            superseded: 0,
        };
        for entry in entries {
            replay(&study, &mut inner, entry).map_err(OpenError::Mismatch)?;
        }
        tracing::info!(
            sessions = inner.sessions.len(),
            late = inner.late.len(),
            "journal replayed"
        );
        Ok(Self {
            study,
            config,
            clock,
            inner: Mutex::new(inner),
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn create_session(&self, rater_id: &str) -> Result<SessionCreated, ServiceError> {
        let doc = self
            .study
            .document(rater_id)
            .ok_or_else(|| ServiceError::UnknownRater(rater_id.to_owned()))?;
        let mut inner = self.lock();
        if inner.by_rater.contains_key(rater_id) {
            return Err(ServiceError::SessionExists(rater_id.to_owned()));
        }
        let started_at = self.clock.now();
        let deadline = started_at + Duration::minutes(i64::from(self.config.deadline_minutes));
        let token = uuid::Uuid::new_v4().simple().to_string();
        inner.journal.append(&JournalEntry::SessionStarted {
            token: token.clone(),
            rater_id: rater_id.to_owned(),
            started_at,
            deadline,
        })?;
        inner.sessions.insert(
            token.clone(),
            Session {
                rater_id: rater_id.to_owned(),
                started_at,
                deadline,
                rows: vec![None; doc.rows.len()],
                closed: false,
            },
        );
        inner.by_rater.insert(rater_id.to_owned(), token.clone());
        tracing::info!(rater = rater_id, %deadline, "session started");
        Ok(SessionCreated {
            token,
            rater_id: rater_id.to_owned(),
            started_at,
            deadline,
            total: doc.rows.len(),
            instructions: self.config.instructions.clone(),
            autosave: self.config.autosave,
        })
    }

    pub fn task(&self, token: &str, index: usize) -> Result<TaskPayload, ServiceError> {
        let now = self.clock.now();
        let mut inner = self.lock();
        let session = inner.sessions.get_mut(token).ok_or(ServiceError::UnknownSession)?;
        if session.observe(now) == SessionState::Expired {
            return Err(ServiceError::Expired);
        }
        let doc = self.study.document(&session.rater_id).expect("sessions refer to known raters");
        let row = doc.rows.get(index).ok_or(ServiceError::IndexOutOfRange {
            index,
            total: doc.rows.len(),
        })?;
        Ok(TaskPayload {
            segment_id: row.segment_id.clone(),
            source: row.source.clone(),
            target: row.target.clone(),
            position: index + 1,
            total: doc.rows.len(),
            remaining_seconds: session.remaining_seconds(now),
        })
    }

    pub fn submit(&self, token: &str, index: usize, req: SubmitRequest) -> Result<SubmitAck, ServiceError> {
        let now = self.clock.now();
        let mut inner = self.lock();
        let session = inner.sessions.get_mut(token).ok_or(ServiceError::UnknownSession)?;
        let doc = self.study.document(&session.rater_id).expect("sessions refer to known raters");
        let row = doc.rows.get(index).ok_or(ServiceError::IndexOutOfRange {
            index,
            total: doc.rows.len(),
        })?;
        if req.segment_id.as_ref().is_some_and(|id| *id != row.segment_id) {
            return Err(ServiceError::Invalid(format!(
                "task {index} is segment {:?}, not {:?}",
                row.segment_id,
                req.segment_id.unwrap_or_default()
            )));
        }
        match session.observe(now) {
            SessionState::Active => {}
            SessionState::Finished => return Err(ServiceError::Finished),
            SessionState::Expired => {
                let entry = JournalEntry::LateRejected {
                    token: token.to_owned(),
                    rater_id: session.rater_id.clone(),
                    index,
                    segment_id: row.segment_id.clone(),
                    postedit: req.postedit,
                    flags: req.flags,
                    comment: req.comment,
                    received_at: now,
                    deadline: session.deadline,
                };
                inner.journal.append(&entry)?;
                inner.late.push(entry);
                tracing::warn!(token, index, "late submission rejected");
                return Err(ServiceError::Expired);
            }
        }
        if req.postedit.trim().is_empty() {
            return Err(ServiceError::Invalid("postedit must not be empty".into()));
        }
        let revision = session.rows[index].as_ref().map_or(1, |s| s.revision + 1);
        let record = AnnotationRecord {
            segment_id: row.segment_id.clone(),
            rater_id: session.rater_id.clone(),
            target: row.target.clone(),
            postedited: req.postedit.nfc().collect(),
            flags: req.flags,
            comment: req.comment.filter(|c| !c.trim().is_empty()),
            completed: true,
            submitted_at: now,
        };
        inner.journal.append(&JournalEntry::Submitted {
            token: token.to_owned(),
            index,
            revision,
            record: record.clone(),
        })?;
        if revision > 1 {
            inner.superseded += 1;
        }
        let session = inner.sessions.get_mut(token).expect("checked above");
        session.rows[index] = Some(Submission { record, revision });
        let state = session.state(now);
        if inner.superseded >= self.config.compact_after {
            compact(&mut inner)?;
        }
        Ok(SubmitAck {
            segment_id: row.segment_id.clone(),
            position: index + 1,
            revision,
            completed: true,
            submitted_at: now,
            state,
        })
    }

    pub fn status(&self, token: &str) -> Result<SessionStatus, ServiceError> {
        let now = self.clock.now();
        let mut inner = self.lock();
        let s = inner.sessions.get_mut(token).ok_or(ServiceError::UnknownSession)?;
        Ok(SessionStatus {
            rater_id: s.rater_id.clone(),
            state: s.observe(now),
            started_at: s.started_at,
            deadline: s.deadline,
            remaining_seconds: s.remaining_seconds(now),
            total: s.rows.len(),
            submitted: s.submitted(),
            cursor: s.cursor(),
        })
    }

    /// Current version of every accepted submission, by rater then position.
    pub fn export(&self) -> Vec<AnnotationRecord> {
        let inner = self.lock();
        let mut sessions: Vec<&Session> = inner.sessions.values().collect();
        sessions.sort_by(|a, b| a.rater_id.cmp(&b.rater_id));
        sessions
            .iter()
            .flat_map(|s| s.rows.iter().flatten().map(|sub| sub.record.clone()))
            .collect()
    }

    pub fn late_submissions(&self) -> usize {
        self.lock().late.len()
    }

    pub fn authorize(&self, bearer: Option<&str>) -> Result<(), ServiceError> {
        match bearer {
            Some(t) if !self.config.operator_token.is_empty() && t == self.config.operator_token => Ok(()),
            _ => Err(ServiceError::Unauthorized),
        }
    }

    /// Drops superseded submissions from the journal.
    pub fn compact(&self) -> Result<(), ServiceError> {
        compact(&mut self.lock())
    }
}

fn compact(inner: &mut Inner) -> Result<(), ServiceError> {
    let mut tokens: Vec<(&String, &Session)> = inner.sessions.iter().collect();
    tokens.sort_by(|a, b| (a.1.started_at, a.0).cmp(&(b.1.started_at, b.0)));
    let mut entries = Vec::new();
    for (token, s) in &tokens {
        entries.push(JournalEntry::SessionStarted {
            token: (*token).clone(),
            rater_id: s.rater_id.clone(),
            started_at: s.started_at,
            deadline: s.deadline,
        });
    }
    let mut subs: Vec<JournalEntry> = tokens
        .iter()
        .flat_map(|(token, s)| {
            s.rows.iter().enumerate().filter_map(move |(index, sub)| {
                sub.as_ref().map(|sub| JournalEntry::Submitted {
                    token: (*token).clone(),
                    index,
                    revision: sub.revision,
                    record: sub.record.clone(),
                })
            })
        })
        .collect();
    subs.sort_by_key(|e| match e {
        JournalEntry::Submitted { record, .. } => record.submitted_at,
        _ => unreachable!(),
    });
    entries.extend(subs);
    entries.extend(inner.late.iter().cloned());
    inner.journal.rewrite(&entries)?;
    tracing::info!(dropped = inner.superseded, "journal compacted");
    inner.superseded = 0;
    Ok(())
}

fn replay(study: &Study, inner: &mut Inner, entry: JournalEntry) -> Result<(), String> {
    match entry {
        JournalEntry::SessionStarted {
            token,
            rater_id,
            started_at,
            deadline,
        } => {
            let doc = study
                .document(&rater_id)
                .ok_or_else(|| format!("session for unknown rater {rater_id:?}"))?;
            inner.by_rater.insert(rater_id.clone(), token.clone());
            inner.sessions.insert(
                token,
                Session {
                    rater_id,
                    started_at,
                    deadline,
                    rows: vec![None; doc.rows.len()],
                    closed: false,
                },
            );
        }
        JournalEntry::Submitted {
            token,
            index,
            revision,
            record,
        } => {
            let session = inner
                .sessions
                .get_mut(&token)
                .ok_or_else(|| format!("submission for unknown session {token}"))?;
            let slot = session
                .rows
                .get_mut(index)
                .ok_or_else(|| format!("submission for task {index} outside the document"))?;
            if slot.is_some() {
                inner.superseded += 1;
            }
            *slot = Some(Submission { record, revision });
        }
        late @ JournalEntry::LateRejected { .. } => {
            if let JournalEntry::LateRejected { token, .. } = &late {
                if let Some(s) = inner.sessions.get_mut(token) {
                    s.closed = true;
                }
            }
            inner.late.push(late);
        }
    }
    Ok(())
}
