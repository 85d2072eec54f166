//! Segment-aligned tri-text corpora (source, human translation, machine translation).
//!
//! The canonical interchange format is a UTF-8 TSV file:
//!
//! ```text
//! # language_pair=de-en
//! # domain=insurance
//! id	source	ht	mt
//! s1	Der Vertrag gilt.	The contract applies.	The contract is valid.
//! ```
//!
//! Leading `# key=value` lines are optional metadata. Tabs, newlines and
//! backslashes inside a cell are written as `\t`, `\n` and `\\`. All texts are
//! NFC-normalized on load so that downstream edit distances compare a single
//! composition form.

#![allow(clippy::tabs_in_doc_comments)]

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::tsv;

pub const CORPUS_HEADER: [&str; 4] = ["id", "source", "ht", "mt"];

/// Which translation a target segment was taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Origin {
    #[serde(rename = "HT")]
    Ht,
    #[serde(rename = "MT")]
    Mt,
}

impl Origin {
    pub const ALL: [Origin; 2] = [Origin::Ht, Origin::Mt];

    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Ht => "HT",
            Origin::Mt => "MT",
        }
    }

    pub fn other(self) -> Origin {
        match self {
            Origin::Ht => Origin::Mt,
            Origin::Mt => Origin::Ht,
        }
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown origin {0:?} (expected \"HT\" or \"MT\")")]
pub struct ParseOriginError(pub String);

impl FromStr for Origin {
    type Err = ParseOriginError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "HT" => Ok(Origin::Ht),
            "MT" => Ok(Origin::Mt),
            other => Err(ParseOriginError(other.to_owned())),
        }
    }
}

/// Source and target language codes, written as `de-en`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LanguagePair {
    pub source: String,
    pub target: String,
}

impl LanguagePair {
    pub fn new(source: impl Into<String>, target: impl Into<String>) -> Self {
        Self {
            source: source.into(),
            target: target.into(),
        }
    }
}

impl fmt::Display for LanguagePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.source, self.target)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed language pair {0:?} (expected e.g. \"de-en\")")]
pub struct ParseLanguagePairError(pub String);

impl FromStr for LanguagePair {
    type Err = ParseLanguagePairError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (src, tgt) = s
            .split_once(['-', '_'])
            .ok_or_else(|| ParseLanguagePairError(s.to_owned()))?;
        if src.is_empty() || tgt.is_empty() || tgt.contains(['-', '_']) {
            return Err(ParseLanguagePairError(s.to_owned()));
        }
        Ok(LanguagePair::new(src.to_lowercase(), tgt.to_lowercase()))
    }
}

impl TryFrom<String> for LanguagePair {
    type Error = ParseLanguagePairError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<LanguagePair> for String {
    fn from(value: LanguagePair) -> Self {
        value.to_string()
    }
}

/// One source segment with both of its translations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignedSegment {
    pub id: String,
    pub source: String,
    pub ht: String,
    pub mt: String,
}

impl AlignedSegment {
    pub fn new(
        id: impl Into<String>,
        source: impl Into<String>,
        ht: impl Into<String>,
        mt: impl Into<String>,
    ) -> Self {
        Self {
            id: id.into(),
            source: source.into(),
            ht: ht.into(),
            mt: mt.into(),
        }
    }

    pub fn target(&self, origin: Origin) -> &str {
        match origin {
            Origin::Ht => &self.ht,
            Origin::Mt => &self.mt,
        }
    }
}

/// An ordered, segment-aligned document. Segment order is document order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignedDocument {
    pub language_pair: Option<LanguagePair>,
    pub segments: Vec<AlignedSegment>,
    pub metadata: BTreeMap<String, String>,
}

impl AlignedDocument {
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Writes the document in the canonical TSV form accepted by [`load_aligned`].
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        if let Some(lp) = &self.language_pair {
            writeln!(out, "# language_pair={lp}")?;
        }
        for (k, v) in &self.metadata {
            writeln!(out, "# {}={}", tsv::escape(k), tsv::escape(v))?;
        }
        writeln!(out, "{}", CORPUS_HEADER.join("\t"))?;
        for s in &self.segments {
            tsv::write_row(&mut out, [&s.id, &s.source, &s.ht, &s.mt])?;
        }
        Ok(())
    }

    pub fn to_tsv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_tsv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("TSV output is UTF-8")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("I/O error reading corpus: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: invalid UTF-8")]
    InvalidUtf8 { line: usize },
    #[error("corpus is empty: missing header `id\\tsource\\tht\\tmt`")]
    MissingHeader,
    #[error("line {line}: unexpected header {found:?}, expected `id\\tsource\\tht\\tmt`")]
    BadHeader { line: usize, found: String },
    #[error("line {line}: expected 4 columns, found {found}")]
    ColumnCount { line: usize, found: usize },
    #[error("line {line}: empty `{column}` cell")]
    EmptyCell { line: usize, column: &'static str },
    #[error("line {line}: duplicate segment id {id:?} (first seen on line {first_line})")]
    DuplicateId {
        line: usize,
        id: String,
        first_line: usize,
    },
    #[error("line {line}: {message}")]
    Metadata { line: usize, message: String },
}

impl CorpusError {
    /// 1-based line number the error refers to, if any.
    pub fn line(&self) -> Option<usize> {
        match self {
            CorpusError::InvalidUtf8 { line }
            | CorpusError::BadHeader { line, .. }
            | CorpusError::ColumnCount { line, .. }
            | CorpusError::EmptyCell { line, .. }
            | CorpusError::DuplicateId { line, .. }
            | CorpusError::Metadata { line, .. } => Some(*line),
            CorpusError::Io(_) | CorpusError::MissingHeader => None,
        }
    }
}

fn nfc(s: &str) -> String {
    s.nfc().collect()
}

/// Reads an aligned corpus from TSV. Rows keep their order; texts are NFC-normalized.
pub fn load_aligned<R: BufRead>(input: R) -> Result<AlignedDocument, CorpusError> {
    let mut doc = AlignedDocument::default();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut header_seen = false;

    for (idx, raw) in tsv::raw_lines(input).enumerate() {
        let line_no = idx + 1;
        let raw = raw?;
        let line = String::from_utf8(raw).map_err(|_| CorpusError::InvalidUtf8 { line: line_no })?;
        let line = line.strip_suffix('\r').unwrap_or(&line);

        if !header_seen {
            if let Some(meta) = line.strip_prefix('#') {
                let (k, v) = meta.trim().split_once('=').ok_or_else(|| CorpusError::Metadata {
                    line: line_no,
                    message: format!("expected `# key=value`, found {line:?}"),
                })?;
                let (k, v) = (tsv::unescape(k.trim()), tsv::unescape(v.trim()));
                if k == "language_pair" {
                    let lp = v.parse().map_err(|e: ParseLanguagePairError| CorpusError::Metadata {
                        line: line_no,
                        message: e.to_string(),
                    })?;
                    doc.language_pair = Some(lp);
                } else {
                    doc.metadata.insert(k, v);
                }
                continue;
            }
            let cells: Vec<&str> = line.split('\t').collect();
            if cells != CORPUS_HEADER {
                return Err(CorpusError::BadHeader {
                    line: line_no,
                    found: line.to_owned(),
                });
            }
            header_seen = true;
            continue;
        }

        if line.is_empty() {
            // Tolerate a trailing blank line but nothing else.
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != 4 {
            return Err(CorpusError::ColumnCount {
                line: line_no,
                found: cells.len(),
            });
        }
        for (cell, column) in cells.iter().zip(CORPUS_HEADER) {
            if cell.trim().is_empty() {
                return Err(CorpusError::EmptyCell { line: line_no, column });
            }
        }
        let id = tsv::unescape(cells[0]);
        if let Some(&first_line) = seen.get(&id) {
            return Err(CorpusError::DuplicateId {
                line: line_no,
                id,
                first_line,
            });
        }
        seen.insert(id.clone(), line_no);
        doc.segments.push(AlignedSegment {
            id,
            source: nfc(&tsv::unescape(cells[1])),
            ht: nfc(&tsv::unescape(cells[2])),
            mt: nfc(&tsv::unescape(cells[3])),
        });
    }

    if !header_seen {
        return Err(CorpusError::MissingHeader);
    }
    Ok(doc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// A single invariant violation found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub segment_id: String,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}", self.severity, self.segment_id, self.message)
    }
}

/// Checks segment invariants. One finding per violation; duplicates are
/// reported once for every repeated occurrence after the first.
pub fn validate(doc: &AlignedDocument) -> Vec<Finding> {
    let mut findings = Vec::new();
    let mut seen = HashSet::new();
    let mut push = |id: &str, message: String| {
        findings.push(Finding {
            severity: Severity::Error,
            segment_id: id.to_owned(),
            message,
        })
    };
    for (pos, s) in doc.segments.iter().enumerate() {
        if s.id.trim().is_empty() {
            push(&s.id, format!("segment at position {} has an empty id", pos + 1));
        } else if !seen.insert(s.id.as_str()) {
            push(&s.id, "duplicate segment id".to_owned());
        }
        for (text, name) in [(&s.source, "source"), (&s.ht, "ht"), (&s.mt, "mt")] {
            if text.trim().is_empty() {
                push(&s.id, format!("empty {name} text"));
            }
        }
    }
    findings
}

/// Renders findings in the line-oriented `<severity>\t<segment-id>\t<message>` form.
pub fn findings_to_lines(findings: &[Finding]) -> String {
    findings.iter().map(|f| format!("{f}\n")).collect()
}
