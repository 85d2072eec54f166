//! Append-only JSON-lines journal. Each entry is one line written with a
//! single `write` and flushed with `sync_data` before the request is
//! acknowledged. Compaction rewrites the file through a temporary sibling and
//! an atomic rename.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use blindpe_core::annotation::iso8601;
use blindpe_core::{AnnotationRecord, ErrorFlags};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum JournalEntry {
    SessionStarted {
        token: String,
        rater_id: String,
        #[serde(with = "iso8601")]
        started_at: DateTime<Utc>,
        #[serde(with = "iso8601")]
        deadline: DateTime<Utc>,
    },
    Submitted {
        token: String,
        index: usize,
        revision: u32,
        record: AnnotationRecord,
    },
    /// A write that arrived after the deadline. Kept, never exported.
    LateRejected {
        token: String,
        rater_id: String,
        index: usize,
        segment_id: String,
        postedit: String,
        flags: ErrorFlags,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        comment: Option<String>,
        #[serde(with = "iso8601")]
        received_at: DateTime<Utc>,
        #[serde(with = "iso8601")]
        deadline: DateTime<Utc>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum JournalError {
    #[error("journal {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("journal {path}, line {line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
}

#[derive(Debug)]
pub struct Journal {
    path: PathBuf,
    file: File,
}

impl Journal {
    /// Opens (or creates) the journal and returns every entry in it. A final
    /// line without a newline was never acknowledged and is cut off.
    pub fn open(path: &Path) -> Result<(Self, Vec<JournalEntry>), JournalError> {
        let io = |source| JournalError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut file = OpenOptions::new()
            .read(true)
            .create(true)
            .append(true)
            .open(path)
            .map_err(io)?;
        let mut entries = Vec::new();
        let mut good_len = 0u64;
        let mut reader = BufReader::new(&file);
        let mut buf = Vec::new();
        let mut line_no = 0;
        loop {
            buf.clear();
            let n = reader.read_until(b'\n', &mut buf).map_err(io)?;
            if n == 0 {
                break;
            }
            line_no += 1;
            if buf.last() != Some(&b'\n') {
                tracing::warn!(path = %path.display(), line = line_no, "dropping torn journal tail");
                break;
            }
            let entry = serde_json::from_slice(&buf).map_err(|e| JournalError::Corrupt {
                path: path.to_path_buf(),
                line: line_no,
                message: e.to_string(),
            })?;
            entries.push(entry);
            good_len += n as u64;
        }
        drop(reader);
        if file.seek(SeekFrom::End(0)).map_err(io)? != good_len {
            file.set_len(good_len).map_err(io)?;
            file.sync_data().map_err(io)?;
        }
        Ok((
            Self {
                path: path.to_path_buf(),
                file,
            },
            entries,
        ))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, entry: &JournalEntry) -> Result<(), JournalError> {
        let mut line = serde_json::to_vec(entry).expect("journal entries serialize");
        line.push(b'\n');
        self.file
            .write_all(&line)
            .and_then(|()| self.file.sync_data())
            .map_err(|source| JournalError::Io {
                path: self.path.clone(),
                source,
            })
    }

    /// Replaces the journal contents with `entries`.
    pub fn rewrite(&mut self, entries: &[JournalEntry]) -> Result<(), JournalError> {
        let io = |source| JournalError::Io {
            path: self.path.clone(),
            source,
        };
        let mut tmp_name = self.path.as_os_str().to_owned();
        tmp_name.push(".compact");
        let tmp = PathBuf::from(tmp_name);
        {
            let mut out = File::create(&tmp).map_err(io)?;
            let mut buf = Vec::new();
            for e in entries {
                serde_json::to_writer(&mut buf, e).expect("journal entries serialize");
                buf.push(b'\n');
            }
            out.write_all(&buf).map_err(io)?;
            out.sync_all().map_err(io)?;
        }
        std::fs::rename(&tmp, &self.path).map_err(io)?;
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            // Persist the rename itself.
            File::open(dir).and_then(|d| d.sync_all()).map_err(io)?;
        }
        self.file = OpenOptions::new().read(true).append(true).open(&self.path).map_err(io)?;
        Ok(())
    }
}
