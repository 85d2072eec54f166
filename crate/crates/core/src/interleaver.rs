//! Blinded per-rater documents that interleave human and machine translations.
//!
//! Each rater receives a consecutive section of the source document. Within a
//! balance scope (one section, or the whole document) half of the segments are
//! shown with their human translation and half with the machine translation.
//! The assignment is a seeded Fisher–Yates shuffle of a balanced label vector.
//!
//! # Randomness
//!
//! Materials must be reproducible across builds, so the generator is fixed:
//! ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded with
//! `SeedableRng::seed_from_u64(seed)`. Per-section mode uses stream
//! `section_index` of that generator; whole-document mode uses stream 0.
//! Bounded integers are drawn from `next_u64` by rejection sampling and the
//! shuffle walks the vector from the back (`i = n-1 ..= 1`, swap with
//! `j ∈ [0, i]`). For an odd scope size the extra label is drawn first from
//! the low bit of `next_u64` (0 → HT, 1 → MT).

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use rand_chacha::ChaCha20Rng;
use rand_core::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::analysis::{EvalDataset, EvalRecord};
use crate::annotation::AnnotationRecord;
use crate::corpus::{AlignedDocument, LanguagePair, Origin};
use crate::tsv;

/// Columns of a prepared rater document. The last five are filled by raters.
pub const PREPARED_HEADER: [&str; 8] = [
    "id",
    "source",
    "target",
    "postedit",
    "terminology",
    "omission",
    "typography",
    "comment",
];

pub const KEY_HEADER: [&str; 3] = ["id", "origin", "rater"];

pub const DEFAULT_SEGMENTS_PER_RATER: usize = 150;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BalanceScope {
    #[default]
    PerSection,
    WholeDocument,
}

impl std::str::FromStr for BalanceScope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "per_section" => Ok(BalanceScope::PerSection),
            "whole_document" => Ok(BalanceScope::WholeDocument),
            other => Err(format!("unknown balance scope {other:?}")),
        }
    }
}

impl std::fmt::Display for BalanceScope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BalanceScope::PerSection => "per_section",
            BalanceScope::WholeDocument => "whole_document",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreparationConfig {
    pub seed: u64,
    pub raters: Vec<String>,
    pub segments_per_rater: usize,
    #[serde(default)]
    pub balance_scope: BalanceScope,
}

impl PreparationConfig {
    pub fn new(seed: u64, raters: Vec<String>, segments_per_rater: usize) -> Self {
        Self {
            seed,
            raters,
            segments_per_rater,
            balance_scope: BalanceScope::PerSection,
        }
    }

    pub fn validate(&self) -> Result<(), InterleaveError> {
        if self.segments_per_rater == 0 {
            return Err(InterleaveError::Config("segments per rater must be at least 1".into()));
        }
        if self.raters.is_empty() {
            return Err(InterleaveError::Config("at least one rater is required".into()));
        }
        let mut seen = HashSet::new();
        for r in &self.raters {
            if r.trim().is_empty() {
                return Err(InterleaveError::Config("rater ids must be non-empty".into()));
            }
            if !seen.insert(r) {
                return Err(InterleaveError::Config(format!("duplicate rater id {r:?}")));
            }
        }
        Ok(())
    }
}

/// A consecutive range of the document allocated to one rater.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RaterSection {
    pub rater_id: String,
    pub start_index: usize,
    pub count: usize,
}

impl RaterSection {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start_index..self.start_index + self.count
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreparedRow {
    pub segment_id: String,
    pub source: String,
    pub target: String,
}

/// What a rater sees. Holds no origin information.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreparedDocument {
    pub rater_id: String,
    pub rows: Vec<PreparedRow>,
}

impl PreparedDocument {
    /// Writes the spreadsheet form: a `# rater=` line, the header, and one row
    /// per segment with empty annotation columns.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# rater={}", tsv::escape(&self.rater_id))?;
        writeln!(out, "{}", PREPARED_HEADER.join("\t"))?;
        for row in &self.rows {
            tsv::write_row(
                &mut out,
                [row.segment_id.as_str(), &row.source, &row.target, "", "", "", "", ""],
            )?;
        }
        Ok(())
    }

    pub fn to_tsv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_tsv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("TSV output is UTF-8")
    }

    /// Reads a prepared document back. Annotation columns are ignored.
    pub fn read_tsv<R: BufRead>(input: R, fallback_rater: Option<&str>) -> Result<Self, InterleaveError> {
        let mut rater = None;
        let mut header = false;
        let mut rows = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line.map_err(|e| InterleaveError::Format(e.to_string()))?;
            let line_no = idx + 1;
            if !header {
                if let Some(meta) = line.strip_prefix('#') {
                    if let Some(("rater", v)) = meta.trim().split_once('=').map(|(k, v)| (k.trim(), v)) {
                        rater = Some(tsv::unescape(v.trim()));
                    }
                    continue;
                }
                let cells: Vec<&str> = line.split('\t').collect();
                if cells.len() < PREPARED_HEADER.len() || cells[..PREPARED_HEADER.len()] != PREPARED_HEADER {
                    return Err(InterleaveError::Format(format!(
                        "line {line_no}: not a prepared-document header"
                    )));
                }
                header = true;
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split('\t').collect();
            if cells.len() < 3 {
                return Err(InterleaveError::Format(format!("line {line_no}: too few columns")));
            }
            rows.push(PreparedRow {
                segment_id: tsv::unescape(cells[0]),
                source: tsv::unescape(cells[1]),
                target: tsv::unescape(cells[2]),
            });
        }
        if !header {
            return Err(InterleaveError::Format("missing prepared-document header".into()));
        }
        let rater_id = rater
            .or_else(|| fallback_rater.map(str::to_owned))
            .ok_or_else(|| InterleaveError::Format("prepared document has no `# rater=` line".into()))?;
        Ok(PreparedDocument { rater_id, rows })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyEntry {
    pub segment_id: String,
    pub origin: Origin,
    pub rater_id: String,
}

/// Segment → (origin, rater). Stored apart from anything raters can see.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlindingKey {
    pub seed: u64,
    pub language_pair: Option<LanguagePair>,
    pub balance_scope: BalanceScope,
    entries: Vec<KeyEntry>,
    index: HashMap<String, usize>,
}

impl BlindingKey {
    pub fn new(
        seed: u64,
        language_pair: Option<LanguagePair>,
        balance_scope: BalanceScope,
        entries: Vec<KeyEntry>,
    ) -> Result<Self, InterleaveError> {
        let mut index = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if index.insert(e.segment_id.clone(), i).is_some() {
                return Err(InterleaveError::Format(format!(
                    "duplicate segment id {:?} in key",
                    e.segment_id
                )));
            }
        }
        Ok(Self {
            seed,
            language_pair,
            balance_scope,
            entries,
            index,
        })
    }

    pub fn entries(&self) -> &[KeyEntry] {
        &self.entries
    }

    pub fn get(&self, segment_id: &str) -> Option<&KeyEntry> {
        self.index.get(segment_id).map(|&i| &self.entries[i])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count(&self, origin: Origin) -> usize {
        self.entries.iter().filter(|e| e.origin == origin).count()
    }

    /// Number of segments assigned to each rater, in first-appearance order.
    pub fn assigned_per_rater(&self) -> Vec<(String, usize)> {
        let mut out: Vec<(String, usize)> = Vec::new();
        for e in &self.entries {
            match out.iter_mut().find(|(r, _)| *r == e.rater_id) {
                Some((_, n)) => *n += 1,
                None => out.push((e.rater_id.clone(), 1)),
            }
        }
        out
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# seed={}", self.seed)?;
        if let Some(lp) = &self.language_pair {
            writeln!(out, "# language_pair={lp}")?;
        }
        writeln!(out, "# balance_scope={}", self.balance_scope)?;
        writeln!(out, "{}", KEY_HEADER.join("\t"))?;
        for e in &self.entries {
            tsv::write_row(&mut out, [e.segment_id.as_str(), e.origin.as_str(), &e.rater_id])?;
        }
        Ok(())
    }

    pub fn to_tsv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_tsv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("TSV output is UTF-8")
    }

    pub fn read_tsv<R: BufRead>(input: R) -> Result<Self, InterleaveError> {
        let mut seed = None;
        let mut language_pair = None;
        let mut scope = BalanceScope::PerSection;
        let mut header = false;
        let mut entries = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line.map_err(|e| InterleaveError::Format(e.to_string()))?;
            let line_no = idx + 1;
            let bad = |msg: String| InterleaveError::Format(format!("key line {line_no}: {msg}"));
            if !header {
                if let Some(meta) = line.strip_prefix('#') {
                    let Some((k, v)) = meta.trim().split_once('=') else { continue };
                    let v = v.trim();
                    match k.trim() {
                        "seed" => seed = Some(v.parse::<u64>().map_err(|e| bad(e.to_string()))?),
                        "language_pair" => language_pair = Some(v.parse().map_err(|e: crate::corpus::ParseLanguagePairError| bad(e.to_string()))?),
                        "balance_scope" => scope = v.parse().map_err(bad)?,
                        _ => {}
                    }
                    continue;
                }
                if line.split('\t').collect::<Vec<_>>() != KEY_HEADER {
                    return Err(bad(format!("expected header `id\\torigin\\trater`, found {line:?}")));
                }
                header = true;
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split('\t').collect();
            if cells.len() != 3 {
                return Err(bad(format!("expected 3 columns, found {}", cells.len())));
            }
            entries.push(KeyEntry {
                segment_id: tsv::unescape(cells[0]),
                origin: cells[1].parse().map_err(|e: crate::corpus::ParseOriginError| bad(e.to_string()))?,
                rater_id: tsv::unescape(cells[2]),
            });
        }
        if !header {
            return Err(InterleaveError::Format("key has no header row".into()));
        }
        let seed = seed.ok_or_else(|| InterleaveError::Format("key has no `# seed=` line".into()))?;
        BlindingKey::new(seed, language_pair, scope, entries)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InterleaveError {
    #[error("invalid preparation config: {0}")]
    Config(String),
    #[error("document too short: need {required}, have {available}")]
    DocumentTooShort { required: usize, available: usize },
    #[error("invalid section for rater {rater:?}: {reason}")]
    Section { rater: String, reason: String },
    #[error("segment ids not in the blinding key: {}", .0.join(", "))]
    UnknownSegments(Vec<String>),
    #[error("segment {segment_id:?} was assigned to rater {expected:?} but annotated by {found:?}")]
    RaterMismatch {
        segment_id: String,
        expected: String,
        found: String,
    },
    #[error("{0}")]
    Format(String),
}

/// Allocates `segments_per_rater` consecutive segments to each rater in order.
pub fn partition_sections(
    doc: &AlignedDocument,
    cfg: &PreparationConfig,
) -> Result<Vec<RaterSection>, InterleaveError> {
    cfg.validate()?;
    let required = cfg.raters.len() * cfg.segments_per_rater;
    if required > doc.len() {
        return Err(InterleaveError::DocumentTooShort {
            required,
            available: doc.len(),
        });
    }
    Ok(cfg
        .raters
        .iter()
        .enumerate()
        .map(|(i, r)| RaterSection {
            rater_id: r.clone(),
            start_index: i * cfg.segments_per_rater,
            count: cfg.segments_per_rater,
        })
        .collect())
}

fn uniform_below(rng: &mut ChaCha20Rng, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let zone = u64::MAX - (u64::MAX % bound + 1) % bound;
    loop {
        let x = rng.next_u64();
        if x <= zone {
            return x % bound;
        }
    }
}

/// A shuffled label vector with `n / 2` of each origin, plus one seeded extra for odd `n`.
fn balanced_labels(n: usize, rng: &mut ChaCha20Rng) -> Vec<Origin> {
    let mut labels = Vec::with_capacity(n);
    labels.extend(std::iter::repeat_n(Origin::Ht, n / 2));
    labels.extend(std::iter::repeat_n(Origin::Mt, n / 2));
    if n % 2 == 1 {
        labels.push(if rng.next_u64() & 1 == 0 { Origin::Ht } else { Origin::Mt });
    }
    for i in (1..labels.len()).rev() {
        let j = uniform_below(rng, i as u64 + 1) as usize;
        labels.swap(i, j);
    }
    labels
}

fn section_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn check_sections(doc: &AlignedDocument, sections: &[RaterSection], cfg: &PreparationConfig) -> Result<(), InterleaveError> {
    let mut covered = vec![false; doc.len()];
    let mut raters = HashSet::new();
    for s in sections {
        let err = |reason: &str| InterleaveError::Section {
            rater: s.rater_id.clone(),
            reason: reason.to_owned(),
        };
        if s.count == 0 {
            return Err(err("empty section"));
        }
        if s.start_index + s.count > doc.len() {
            return Err(err("section extends past the end of the document"));
        }
        if !cfg.raters.contains(&s.rater_id) {
            return Err(err("rater is not in the configuration"));
        }
        if !raters.insert(&s.rater_id) {
            return Err(err("rater has more than one section"));
        }
        for i in s.range() {
            if std::mem::replace(&mut covered[i], true) {
                return Err(err("sections overlap"));
            }
        }
    }
    Ok(())
}

/// Builds one blinded document per section and the key that unblinds them.
pub fn interleave(
    doc: &AlignedDocument,
    sections: &[RaterSection],
    cfg: &PreparationConfig,
) -> Result<(Vec<PreparedDocument>, BlindingKey), InterleaveError> {
    cfg.validate()?;
    check_sections(doc, sections, cfg)?;

    let labels: Vec<Vec<Origin>> = match cfg.balance_scope {
        BalanceScope::PerSection => sections
            .iter()
            .enumerate()
            .map(|(i, s)| balanced_labels(s.count, &mut section_rng(cfg.seed, i as u64)))
            .collect(),
        BalanceScope::WholeDocument => {
            let total = sections.iter().map(|s| s.count).sum();
            let all = balanced_labels(total, &mut section_rng(cfg.seed, 0));
            let mut rest = &all[..];
            sections
                .iter()
                .map(|s| {
                    let (head, tail) = rest.split_at(s.count);
                    rest = tail;
                    head.to_vec()
                })
                .collect()
        }
    };

    let mut docs = Vec::with_capacity(sections.len());
    let mut entries = Vec::new();
    for (section, labels) in sections.iter().zip(labels) {
        let mut rows = Vec::with_capacity(section.count);
        for (seg, origin) in doc.segments[section.range()].iter().zip(labels) {
            rows.push(PreparedRow {
                segment_id: seg.id.clone(),
                source: seg.source.clone(),
                target: seg.target(origin).to_owned(),
            });
            entries.push(KeyEntry {
                segment_id: seg.id.clone(),
                origin,
                rater_id: section.rater_id.clone(),
            });
        }
        docs.push(PreparedDocument {
            rater_id: section.rater_id.clone(),
            rows,
        });
    }
    let key = BlindingKey::new(cfg.seed, doc.language_pair.clone(), cfg.balance_scope, entries)?;
    Ok((docs, key))
}

/// Joins records with their origin. Every unknown id is reported at once.
pub fn unblind(records: Vec<AnnotationRecord>, key: &BlindingKey) -> Result<EvalDataset, InterleaveError> {
    let unknown: Vec<String> = records
        .iter()
        .filter(|r| key.get(&r.segment_id).is_none())
        .map(|r| r.segment_id.clone())
        .collect();
    if !unknown.is_empty() {
        return Err(InterleaveError::UnknownSegments(unknown));
    }
    let mut joined = Vec::with_capacity(records.len());
    for record in records {
        let entry = key.get(&record.segment_id).expect("checked above");
        if entry.rater_id != record.rater_id {
            return Err(InterleaveError::RaterMismatch {
                segment_id: record.segment_id,
                expected: entry.rater_id.clone(),
                found: record.rater_id,
            });
        }
        joined.push(EvalRecord {
            origin: entry.origin,
            record,
        });
    }
    Ok(EvalDataset::new(key.language_pair.clone(), Some(key.seed), joined))
}
