//! Blinded comparison of human and machine translation through post-editing.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`corpus`] loads a segment-aligned source / HT / MT corpus.
//! 2. [`interleaver`] cuts it into rater sections, mixes HT and MT targets in
//!    equal numbers with a seeded shuffle, and writes the blinding key apart
//!    from the rater documents.
//! 3. [`annotation`] ingests the raters' post-edits and error flags.
//! 4. [`analysis`] joins annotations with the key, computes edit effort
//!    ([`metrics`]) and tests each property against origin ([`stats`]);
//!    [`report`] writes the results table, JSON and figure data.

pub mod analysis;
pub mod annotation;
pub mod corpus;
pub mod digest;
pub mod interleaver;
pub mod metrics;
pub mod report;
pub mod stats;
mod tsv;

pub use analysis::{analyze, build_contingency, exclude_incomplete, AnalysisConfig, Comparison, EvalDataset, PairResults};
pub use annotation::{AnnotationRecord, ErrorFlags};
pub use corpus::{load_aligned, validate, AlignedDocument, AlignedSegment, LanguagePair, Origin};
pub use interleaver::{interleave, partition_sections, unblind, BlindingKey, PreparationConfig, PreparedDocument};
pub use report::{ReportHeader, ResultsTable};
pub use metrics::EditThresholds;
pub use stats::ContingencyTable2x2;

pub const TOOL_NAME: &str = "blindpe";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
