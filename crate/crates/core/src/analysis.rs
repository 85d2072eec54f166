//! Unblinded analysis: exclusion of unfinished segments, contingency tables
//! for every error type and effort bin, and the per-language-pair results.

use serde::{Deserialize, Serialize};

use crate::annotation::AnnotationRecord;
use crate::corpus::{LanguagePair, Origin};
use crate::digest::sha256_hex;
use crate::interleaver::{unblind, BlindingKey, InterleaveError};
use crate::metrics::{
    bin_med, corpus_hter, descriptive_stats, med, tokenize, CorpusHter, DescriptiveStats, EditThresholds, MedBin,
    TerError,
};
use crate::stats::{
    chi_square, fisher_exact_two_tailed, g_test, wilson_ci, ContingencyTable2x2, ProportionCI, StatsError,
    TestOutcome, DEFAULT_ALPHA,
};

/// An annotation joined with the origin of the target it was made on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub origin: Origin,
    pub record: AnnotationRecord,
}

impl EvalRecord {
    pub fn med(&self) -> usize {
        med(&self.record.target, &self.record.postedited)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalDataset {
    pub language_pair: Option<LanguagePair>,
    pub seed: Option<u64>,
    pub records: Vec<EvalRecord>,
}

impl EvalDataset {
    pub fn new(language_pair: Option<LanguagePair>, seed: Option<u64>, records: Vec<EvalRecord>) -> Self {
        Self {
            language_pair,
            seed,
            records,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn n(&self, origin: Origin) -> usize {
        self.records.iter().filter(|r| r.origin == origin).count()
    }

    /// SHA-256 over the records in segment-id order, so the digest does not
    /// depend on input order.
    pub fn digest(&self) -> String {
        let mut sorted: Vec<&EvalRecord> = self.records.iter().collect();
        sorted.sort_by(|a, b| a.record.segment_id.cmp(&b.record.segment_id));
        let canonical = serde_json::to_vec(&(&self.language_pair, &self.seed, sorted))
            .expect("dataset serializes to JSON");
        sha256_hex(&canonical)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RaterCompletion {
    pub rater_id: String,
    pub assigned: usize,
    pub completed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CompletionReport {
    pub raters: Vec<RaterCompletion>,
    /// Raters with no completed segment at all.
    pub excluded_raters: Vec<String>,
    pub assigned: usize,
    pub completed: usize,
}

impl CompletionReport {
    pub fn excluded(&self) -> usize {
        self.assigned - self.completed
    }
}

/// Drops unfinished records and joins the rest with the key.
pub fn exclude_incomplete(
    records: Vec<AnnotationRecord>,
    key: &BlindingKey,
) -> Result<(EvalDataset, CompletionReport), InterleaveError> {
    let completed: Vec<AnnotationRecord> = records.into_iter().filter(|r| r.completed).collect();
    let mut report = CompletionReport::default();
    for (rater_id, assigned) in key.assigned_per_rater() {
        let done = completed.iter().filter(|r| r.rater_id == rater_id).count();
        if done == 0 {
            report.excluded_raters.push(rater_id.clone());
        }
        report.assigned += assigned;
        report.completed += done;
        report.raters.push(RaterCompletion {
            rater_id,
            assigned,
            completed: done,
        });
    }
    let ds = unblind(completed, key)?;
    report.completed = ds.len();
    Ok((ds, report))
}

/// `a`/`b` count HT records with/without the property, `c`/`d` likewise for MT.
pub fn build_contingency<F>(ds: &EvalDataset, property: F) -> ContingencyTable2x2
where
    F: Fn(&EvalRecord) -> bool,
{
    let mut t = ContingencyTable2x2::new(0, 0, 0, 0);
    for r in &ds.records {
        match (r.origin, property(r)) {
            (Origin::Ht, true) => t.a += 1,
            (Origin::Ht, false) => t.b += 1,
            (Origin::Mt, true) => t.c += 1,
            (Origin::Mt, false) => t.d += 1,
        }
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Terminology,
    Omission,
    Typography,
    /// MED above the edited threshold.
    MedEdited,
    /// MED above the high-effort threshold.
    MedHighEffort,
}

impl Comparison {
    pub const ALL: [Comparison; 5] = [
        Comparison::Terminology,
        Comparison::Omission,
        Comparison::Typography,
        Comparison::MedEdited,
        Comparison::MedHighEffort,
    ];

    /// Identifier used on stdout and in file names.
    pub fn key(&self, t: EditThresholds) -> String {
        match self {
            Comparison::Terminology => "terminology".into(),
            Comparison::Omission => "omission".into(),
            Comparison::Typography => "typography".into(),
            Comparison::MedEdited => format!("med>{}", t.edited_threshold),
            Comparison::MedHighEffort => format!("med>{}", t.high_effort_threshold),
        }
    }

    /// Row label in the results table.
    pub fn label(&self, t: EditThresholds) -> String {
        match self {
            Comparison::Terminology => "Terminology".into(),
            Comparison::Omission => "Omission".into(),
            Comparison::Typography => "Typography".into(),
            Comparison::MedEdited => format!(">{}", t.edited_threshold),
            Comparison::MedHighEffort => format!(">{}", t.high_effort_threshold),
        }
    }

    pub fn holds(&self, r: &EvalRecord, t: EditThresholds) -> bool {
        let f = &r.record.flags;
        match self {
            Comparison::Terminology => f.terminology,
            Comparison::Omission => f.omission,
            Comparison::Typography => f.typography,
            Comparison::MedEdited => r.med() > t.edited_threshold,
            Comparison::MedHighEffort => r.med() > t.high_effort_threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub alpha: f64,
    pub thresholds: EditThresholds,
    pub ci_level: f64,
    /// Also run G and χ² tests next to Fisher's exact test.
    pub alternative_tests: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            thresholds: EditThresholds::default(),
            ci_level: 0.95,
            alternative_tests: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub comparison: Comparison,
    pub key: String,
    pub label: String,
    pub table: ContingencyTable2x2,
    pub fisher: TestOutcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_test: Option<TestOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_square: Option<TestOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_square_yates: Option<TestOutcome>,
    pub ci_ht: Option<ProportionCI>,
    pub ci_mt: Option<ProportionCI>,
}

impl ComparisonResult {
    pub fn ci(&self, origin: Origin) -> Option<&ProportionCI> {
        match origin {
            Origin::Ht => self.ci_ht.as_ref(),
            Origin::Mt => self.ci_mt.as_ref(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinCounts {
    pub exact: usize,
    pub edited: usize,
    pub high_effort: usize,
}

impl BinCounts {
    pub fn total(&self) -> usize {
        self.exact + self.edited + self.high_effort
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginSummary {
    pub origin: Origin,
    pub n: usize,
    pub bins: BinCounts,
    pub med: Option<DescriptiveStats>,
    pub hter: Option<CorpusHter>,
}

/// Everything reported for one language pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResults {
    pub language_pair: Option<LanguagePair>,
    pub seed: Option<u64>,
    pub n_ht: usize,
    pub n_mt: usize,
    pub comparisons: Vec<ComparisonResult>,
    pub ht: OriginSummary,
    pub mt: OriginSummary,
    pub input_digest: String,
}

impl PairResults {
    pub fn summary(&self, origin: Origin) -> &OriginSummary {
        match origin {
            Origin::Ht => &self.ht,
            Origin::Mt => &self.mt,
        }
    }

    pub fn n(&self, origin: Origin) -> usize {
        self.summary(origin).n
    }

    pub fn comparison(&self, c: Comparison) -> Option<&ComparisonResult> {
        self.comparisons.iter().find(|r| r.comparison == c)
    }

    pub fn pair_name(&self) -> String {
        self.language_pair
            .as_ref()
            .map(ToString::to_string)
            .unwrap_or_else(|| "unknown".into())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("dataset has no completed records")]
    EmptyDataset,
    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    BadAlpha(f64),
    #[error("segment {segment_id:?}: {source}")]
    Ter {
        segment_id: String,
        #[source]
        source: TerError,
    },
    #[error(transparent)]
    Stats(#[from] StatsError),
}

fn summarize(records: &[&EvalRecord], origin: Origin, t: EditThresholds) -> Result<OriginSummary, AnalysisError> {
    let meds: Vec<usize> = records.iter().map(|r| r.med()).collect();
    let mut bins = BinCounts::default();
    for &m in &meds {
        match bin_med(m, t) {
            MedBin::Exact => bins.exact += 1,
            MedBin::Edited => bins.edited += 1,
            MedBin::HighEffort => bins.high_effort += 1,
        }
    }
    let pairs: Vec<(Vec<String>, Vec<String>)> = records
        .iter()
        .map(|r| (tokenize(&r.record.target), tokenize(&r.record.postedited)))
        .collect();
    let hter = if pairs.is_empty() {
        None
    } else {
        // Score pair by pair so an error names the offending segment.
        for (r, (h, p)) in records.iter().zip(&pairs) {
            if p.is_empty() && !h.is_empty() {
                return Err(AnalysisError::Ter {
                    segment_id: r.record.segment_id.clone(),
                    source: TerError::EmptyReference,
                });
            }
        }
        Some(corpus_hter(&pairs).map_err(|source| AnalysisError::Ter {
            segment_id: String::new(),
            source,
        })?)
    };
    Ok(OriginSummary {
        origin,
        n: records.len(),
        bins,
        med: descriptive_stats(&meds),
        hter,
    })
}

/// Runs the five origin comparisons plus effort summaries for one dataset.
/// Incomplete records are ignored.
pub fn analyze(ds: &EvalDataset, cfg: &AnalysisConfig) -> Result<PairResults, AnalysisError> {
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(AnalysisError::BadAlpha(cfg.alpha));
    }
    let completed = EvalDataset::new(
        ds.language_pair.clone(),
        ds.seed,
        ds.records.iter().filter(|r| r.record.completed).cloned().collect(),
    );
    if completed.is_empty() {
        return Err(AnalysisError::EmptyDataset);
    }
    let t = cfg.thresholds;

    let mut comparisons = Vec::with_capacity(Comparison::ALL.len());
    for c in Comparison::ALL {
        let table = build_contingency(&completed, |r| c.holds(r, t));
        let fisher = fisher_exact_two_tailed(&table).with_alpha(cfg.alpha);
        let (g, x2, x2y) = if cfg.alternative_tests && !table.is_degenerate() {
            (
                Some(g_test(&table)?.with_alpha(cfg.alpha)),
                Some(chi_square(&table, false)?.with_alpha(cfg.alpha)),
                Some(chi_square(&table, true)?.with_alpha(cfg.alpha)),
            )
        } else {
            (None, None, None)
        };
        let ci = |origin: Origin| -> Result<Option<ProportionCI>, StatsError> {
            let n = table.group_size(origin);
            if n == 0 {
                return Ok(None);
            }
            wilson_ci(table.present(origin), n, cfg.ci_level).map(Some)
        };
        comparisons.push(ComparisonResult {
            comparison: c,
            key: c.key(t),
            label: c.label(t),
            table,
            fisher,
            g_test: g,
            chi_square: x2,
            chi_square_yates: x2y,
            ci_ht: ci(Origin::Ht)?,
            ci_mt: ci(Origin::Mt)?,
        });
    }

    let by_origin = |o: Origin| -> Vec<&EvalRecord> { completed.records.iter().filter(|r| r.origin == o).collect() };
    let ht = summarize(&by_origin(Origin::Ht), Origin::Ht, t)?;
    let mt = summarize(&by_origin(Origin::Mt), Origin::Mt, t)?;

    Ok(PairResults {
        language_pair: completed.language_pair.clone(),
        seed: completed.seed,
        n_ht: ht.n,
        n_mt: mt.n,
        comparisons,
        ht,
        mt,
        input_digest: completed.digest(),
    })
}
