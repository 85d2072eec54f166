//! Synthetic datasets with the published per-pair counts. Each segment gets
//! the flags and an edit size chosen so that every count comes out exactly.

#![allow(dead_code)]

use blindpe_core::analysis::EvalRecord;
use blindpe_core::{AnnotationRecord, ErrorFlags, EvalDataset, LanguagePair, Origin};
use chrono::{TimeZone, Utc};

#[derive(Debug, Clone, Copy)]
pub struct OriginCounts {
    pub n: usize,
    pub terminology: usize,
    pub omission: usize,
    pub typography: usize,
    /// MED > 0.
    pub edited: usize,
    /// MED > 5.
    pub high_effort: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct PairCounts {
    pub source: &'static str,
    pub target: &'static str,
    pub ht: OriginCounts,
    pub mt: OriginCounts,
}

const fn oc(n: usize, terminology: usize, omission: usize, typography: usize, edited: usize, high_effort: usize) -> OriginCounts {
    OriginCounts { n, terminology, omission, typography, edited, high_effort }
}

pub const DE_EN: PairCounts = PairCounts {
    source: "de",
    target: "en",
    ht: oc(150, 8, 1, 3, 20, 12),
    mt: oc(150, 15, 5, 4, 37, 19),
};

pub const DE_FR: PairCounts = PairCounts {
    source: "de",
    target: "fr",
    ht: oc(237, 27, 14, 5, 67, 53),
    mt: oc(238, 39, 12, 3, 90, 75),
};

pub const DE_IT: PairCounts = PairCounts {
    source: "de",
    target: "it",
    ht: oc(244, 18, 4, 8, 65, 30),
    mt: oc(248, 19, 1, 6, 50, 27),
};

pub const ALL: [PairCounts; 3] = [DE_EN, DE_FR, DE_IT];

/// A shown target of 24 characters and a post-edit at the wanted distance.
fn texts(i: usize, distance: usize) -> (String, String) {
    let target = format!("Segment {i:05} text body.");
    let post: String = target
        .chars()
        .enumerate()
        .map(|(k, c)| if k >= target.len() - 1 - distance && k < target.len() - 1 { '#' } else { c })
        .collect();
    (target, post)
}

fn records(origin: Origin, c: OriginCounts, offset: usize) -> Vec<EvalRecord> {
    let at = Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap();
    (0..c.n)
        .map(|i| {
            let distance = if i < c.high_effort {
                8
            } else if i < c.edited {
                2
            } else {
                0
            };
            let (target, postedited) = texts(offset + i, distance);
            EvalRecord {
                origin,
                record: AnnotationRecord {
                    segment_id: format!("s{:05}", offset + i),
                    rater_id: "r1".into(),
                    target,
                    postedited,
                    // Counted from the end so flags and edits overlap differently.
                    flags: ErrorFlags {
                        terminology: i >= c.n - c.terminology,
                        omission: i % 2 == 0 && i / 2 < c.omission,
                        typography: i % 3 == 1 && i / 3 < c.typography,
                    },
                    comment: None,
                    completed: true,
                    submitted_at: at,
                },
            }
        })
        .collect()
}

pub fn dataset(p: &PairCounts) -> EvalDataset {
    let mut recs = records(Origin::Ht, p.ht, 0);
    recs.extend(records(Origin::Mt, p.mt, p.ht.n));
    EvalDataset::new(Some(LanguagePair::new(p.source, p.target)), Some(42), recs)
}
