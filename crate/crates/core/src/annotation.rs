//! Rater annotations: error flags, post-edits and comments, plus the two
//! ingest paths (filled prepared spreadsheets and service JSON lines).

use std::collections::HashMap;
use std::io::{BufRead, Write};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::interleaver::PREPARED_HEADER;
use crate::tsv;

/// The three error categories raters flag. Presence only, never counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ErrorFlags {
    /// Wrong or inconsistent domain terminology.
    pub terminology: bool,
    /// Source content missing from the translation.
    pub omission: bool,
    /// Spelling, punctuation, spacing or formatting problems.
    pub typography: bool,
}

impl ErrorFlags {
    pub fn any(&self) -> bool {
        self.terminology || self.omission || self.typography
    }
}

/// One rater's output for one segment.
///
/// `target` is the pre-translation the rater was shown. It carries no origin
/// information and lets analysis compute edit effort without the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub segment_id: String,
    pub rater_id: String,
    pub target: String,
    pub postedited: String,
    pub flags: ErrorFlags,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
    pub completed: bool,
    #[serde(with = "iso8601")]
    pub submitted_at: DateTime<Utc>,
}

impl AnnotationRecord {
    /// NFC-normalizes the shown target and the post-edit.
    pub fn normalized(mut self) -> Self {
        self.target = self.target.nfc().collect();
        self.postedited = self.postedited.nfc().collect();
        self
    }
}

/// RFC 3339 UTC timestamps with millisecond precision, for `#[serde(with)]`.
pub mod iso8601 {
    use chrono::{DateTime, SecondsFormat, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&t.to_rfc3339_opts(SecondsFormat::Millis, true))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let s = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(&s)
            .map(|t| t.with_timezone(&Utc))
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: invalid UTF-8")]
    InvalidUtf8 { line: usize },
    #[error("missing header row `{}`", PREPARED_HEADER.join("\\t"))]
    MissingHeader,
    #[error("line {line}: header does not match the prepared-document schema: {found:?}")]
    SchemaMismatch { line: usize, found: String },
    #[error("line {line}: expected {expected} columns, found {found}")]
    ColumnCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, column `{column}`: unrecognized flag value {value:?} (use 1 or leave empty)")]
    BadFlag {
        line: usize,
        column: &'static str,
        value: String,
    },
    #[error("line {line}, column `submitted_at`: {message}")]
    BadTimestamp { line: usize, message: String },
    #[error("line {line}: empty segment id")]
    EmptyId { line: usize },
    #[error("no rater id: the sheet has no `# rater=` line and none was supplied")]
    MissingRater,
    #[error("line {line}: invalid JSON annotation: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

/// Parses a spreadsheet flag cell. Empty and `0`/`no`/`false` mean absent.
pub fn parse_flag(cell: &str) -> Option<bool> {
    match cell.trim().to_ascii_lowercase().as_str() {
        "" | "0" | "no" | "false" => Some(false),
        "1" | "x" | "yes" | "true" => Some(true),
        _ => None,
    }
}

const FLAG_COLUMNS: [&str; 3] = ["terminology", "omission", "typography"];

/// Reads a filled prepared document.
///
/// A row counts as completed when its `postedit` cell is non-empty. A rater
/// who accepts a segment unchanged copies the target into that cell. An
/// optional ninth `submitted_at` column (RFC 3339) overrides `default_time`.
pub fn read_filled_sheet<R: BufRead>(
    input: R,
    rater: Option<&str>,
    default_time: DateTime<Utc>,
) -> Result<Vec<AnnotationRecord>, IngestError> {
    let mut sheet_rater: Option<String> = None;
    let mut width = None;
    let mut records = Vec::new();

    for (idx, raw) in tsv::raw_lines(input).enumerate() {
        let line_no = idx + 1;
        let raw = raw?;
        let line = String::from_utf8(raw).map_err(|_| IngestError::InvalidUtf8 { line: line_no })?;
        let line = line.strip_suffix('\r').unwrap_or(&line);

        let Some(width) = width else {
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((k, v)) = meta.trim().split_once('=') {
                    if k.trim() == "rater" {
                        sheet_rater = Some(tsv::unescape(v.trim()));
                    }
                }
                continue;
            }
            let cells: Vec<&str> = line.split('\t').collect();
            let base_ok = cells.len() >= PREPARED_HEADER.len()
                && cells[..PREPARED_HEADER.len()] == PREPARED_HEADER;
            let extra_ok = match cells.len() - PREPARED_HEADER.len().min(cells.len()) {
                0 => true,
                1 => cells[PREPARED_HEADER.len()] == "submitted_at",
                _ => false,
            };
            if !(base_ok && extra_ok) {
                return Err(IngestError::SchemaMismatch {
                    line: line_no,
                    found: line.to_owned(),
                });
            }
            width = Some(cells.len());
            continue;
        };

        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != width {
            return Err(IngestError::ColumnCount {
                line: line_no,
                expected: width,
                found: cells.len(),
            });
        }
        let segment_id = tsv::unescape(cells[0]);
        if segment_id.trim().is_empty() {
            return Err(IngestError::EmptyId { line: line_no });
        }
        let mut flags = [false; 3];
        for (i, column) in FLAG_COLUMNS.iter().enumerate() {
            let value = cells[4 + i];
            flags[i] = parse_flag(value).ok_or_else(|| IngestError::BadFlag {
                line: line_no,
                column,
                value: value.to_owned(),
            })?;
        }
        let submitted_at = if width > PREPARED_HEADER.len() && !cells[8].trim().is_empty() {
            DateTime::parse_from_rfc3339(cells[8].trim())
                .map(|t| t.with_timezone(&Utc))
                .map_err(|e| IngestError::BadTimestamp {
                    line: line_no,
                    message: e.to_string(),
                })?
        } else {
            default_time
        };
        let rater_id = rater
            .map(str::to_owned)
            .or_else(|| sheet_rater.clone())
            .ok_or(IngestError::MissingRater)?;
        let postedited = tsv::unescape(cells[3]);
        let comment = tsv::unescape(cells[7]);
        records.push(
            AnnotationRecord {
                segment_id,
                rater_id,
                target: tsv::unescape(cells[2]),
                completed: !postedited.trim().is_empty(),
                postedited,
                flags: ErrorFlags {
                    terminology: flags[0],
                    omission: flags[1],
                    typography: flags[2],
                },
                comment: (!comment.is_empty()).then_some(comment),
                submitted_at,
            }
            .normalized(),
        );
    }

    if width.is_none() {
        return Err(IngestError::MissingHeader);
    }
    Ok(records)
}

/// Reads annotation JSON lines as exported by the collection service.
pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<AnnotationRecord>, IngestError> {
    let mut out = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: AnnotationRecord = serde_json::from_str(&line).map_err(|source| IngestError::Json {
            line: idx + 1,
            source,
        })?;
        out.push(rec.normalized());
    }
    Ok(out)
}

pub fn write_jsonl<W: Write>(mut out: W, records: &[AnnotationRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Keeps one record per segment id. A completed record beats an incomplete
/// one; otherwise the later `submitted_at` wins, and on equal timestamps the
/// record appearing later in the input wins. Output follows first appearance.
pub fn merge_records(records: impl IntoIterator<Item = AnnotationRecord>) -> Vec<AnnotationRecord> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut out: Vec<AnnotationRecord> = Vec::new();
    for rec in records {
        match index.get(&rec.segment_id) {
            Some(&i) => {
                let cur = &out[i];
                if (rec.completed, rec.submitted_at) >= (cur.completed, cur.submitted_at) {
                    out[i] = rec;
                }
            }
            None => {
                index.insert(rec.segment_id.clone(), out.len());
                out.push(rec);
            }
        }
    }
    out
}

/// Per-rater count of completed records, in first-appearance order.
pub fn completion_summary(records: &[AnnotationRecord]) -> Vec<(String, usize, usize)> {
    let mut order: Vec<String> = Vec::new();
    let mut counts: HashMap<&str, (usize, usize)> = HashMap::new();
    for r in records {
        let e = counts.entry(r.rater_id.as_str()).or_insert_with(|| {
            order.push(r.rater_id.clone());
            (0, 0)
        });
        e.1 += 1;
        if r.completed {
            e.0 += 1;
        }
    }
    order
        .into_iter()
        .map(|r| {
            let (done, total) = counts[r.as_str()];
            (r, done, total)
        })
        .collect()
}

pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}
