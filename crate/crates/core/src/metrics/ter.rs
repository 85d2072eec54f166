//! Translation Edit Rate with greedy block shifts.
//!
//! The hypothesis is the text a rater was shown and the reference is the
//! rater's post-edit, so the rate is human-targeted (HTER).
//!
//! Conventions, fixed for comparability across runs:
//! * a shift moves a contiguous hypothesis block of at most [`MAX_SHIFT_LEN`]
//!   tokens; the block must equal some contiguous reference span and contain
//!   at least one token that is not matched in every minimum-cost alignment
//!   of the current hypothesis;
//! * every insertion point of the hypothesis is tried as the destination;
//! * each round applies the candidate with the smallest resulting word-level
//!   edit distance, breaking ties by earliest block start, then shortest
//!   block, then earliest destination; a shift is applied only if it strictly
//!   lowers the distance;
//! * total edits = shifts + the insertions, deletions and substitutions left.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::edit::levenshtein_within;

pub const MAX_SHIFT_LEN: usize = 10;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TerBreakdown {
    pub insertions: usize,
    pub deletions: usize,
    pub substitutions: usize,
    pub shifts: usize,
    pub ref_tokens: usize,
}

impl TerBreakdown {
    pub fn total_edits(&self) -> usize {
        self.insertions + self.deletions + self.substitutions + self.shifts
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TerError {
    #[error("empty reference with a non-empty hypothesis: edit rate is undefined")]
    EmptyReference,
    #[error("no segment pairs to score")]
    NoPairs,
}

/// One applied shift. `dest` is an insertion point in the pre-shift hypothesis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftStep {
    pub start: usize,
    pub len: usize,
    pub dest: usize,
    pub distance_after: usize,
    /// Distinct hypotheses reachable by the best-scoring candidates this round.
    pub tied_outcomes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerTrace {
    pub breakdown: TerBreakdown,
    pub steps: Vec<ShiftStep>,
}

impl TerTrace {
    /// True when every applied shift was the only way to reach the best distance.
    pub fn greedy_unique(&self) -> bool {
        self.steps.iter().all(|s| s.tied_outcomes == 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Match,
    Sub,
    Ins,
    Del,
}

/// Deterministic minimum-cost alignment, hypothesis → reference. Backtrace
/// prefers the diagonal, then deletion, then insertion.
fn align<T: PartialEq>(hyp: &[T], reference: &[T]) -> Vec<Op> {
    let (n, m) = (hyp.len(), reference.len());
    let w = m + 1;
    let d = distance_table(hyp, reference);
    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = d[i * w + j];
        if i > 0 && j > 0 {
            let same = hyp[i - 1] == reference[j - 1];
            if here == d[(i - 1) * w + j - 1] + usize::from(!same) {
                ops.push(if same { Op::Match } else { Op::Sub });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && here == d[(i - 1) * w + j] + 1 {
            ops.push(Op::Del);
            i -= 1;
        } else {
            ops.push(Op::Ins);
            j -= 1;
        }
    }
    ops.reverse();
    ops
}

fn distance_table<T: PartialEq>(a: &[T], b: &[T]) -> Vec<usize> {
    let w = b.len() + 1;
    let mut d = vec![0usize; (a.len() + 1) * w];
    for i in 0..=a.len() {
        d[i * w] = i;
    }
    for (j, cell) in d[..w].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let c = usize::from(a[i - 1] != b[j - 1]);
            d[i * w + j] = (d[(i - 1) * w + j - 1] + c)
                .min(d[(i - 1) * w + j] + 1)
                .min(d[i * w + j - 1] + 1);
        }
    }
    d
}

/// Per hypothesis token: is it an exact match in every minimum-cost
/// alignment? Tokens that some optimal alignment leaves unmatched count as
/// misaligned, so the shift candidates do not depend on backtrace order.
fn settled_tokens<T: PartialEq>(hyp: &[T], reference: &[T]) -> Vec<bool> {
    let (n, m) = (hyp.len(), reference.len());
    let w = m + 1;
    let fwd = distance_table(hyp, reference);
    let rh: Vec<&T> = hyp.iter().rev().collect();
    let rr: Vec<&T> = reference.iter().rev().collect();
    let bwd_rev = distance_table(&rh, &rr);
    // Cost of aligning hyp[i..] with reference[j..].
    let bwd = |i: usize, j: usize| bwd_rev[(n - i) * w + (m - j)];
    let total = fwd[n * w + m];
    (0..n)
        .map(|i| {
            !(0..=m).any(|j| {
                let before = fwd[i * w + j];
                let dropped = before + 1 + bwd(i + 1, j) == total;
                let substituted = j < m && hyp[i] != reference[j] && before + 1 + bwd(i + 1, j + 1) == total;
                dropped || substituted
            })
        })
        .collect()
}

fn apply_shift<T: Clone>(hyp: &[T], start: usize, len: usize, dest: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(hyp.len());
    let block = &hyp[start..start + len];
    if dest < start {
        out.extend_from_slice(&hyp[..dest]);
        out.extend_from_slice(block);
        out.extend_from_slice(&hyp[dest..start]);
        out.extend_from_slice(&hyp[start + len..]);
    } else {
        out.extend_from_slice(&hyp[..start]);
        out.extend_from_slice(&hyp[start + len..dest]);
        out.extend_from_slice(block);
        out.extend_from_slice(&hyp[dest..]);
    }
    out
}

struct Candidate<T> {
    distance: usize,
    start: usize,
    len: usize,
    dest: usize,
    shifted: Vec<T>,
}

fn best_shift<T: PartialEq + Clone>(hyp: &[T], reference: &[T]) -> Option<(Candidate<T>, usize)> {
    let (n, m) = (hyp.len(), reference.len());
    let matched = settled_tokens(hyp, reference);
    let mut best: Option<Candidate<T>> = None;
    let mut ties: Vec<Vec<T>> = Vec::new();

    for start in 0..n {
        for len in 1..=MAX_SHIFT_LEN.min(n - start) {
            let block = &hyp[start..start + len];
            if len > m || !reference.windows(len).any(|w| w == block) {
                // Longer blocks contain this one and cannot match either.
                break;
            }
            if matched[start..start + len].iter().all(|&b| b) {
                continue;
            }
            for dest in 0..=n {
                if (start..=start + len).contains(&dest) {
                    continue;
                }
                let shifted = apply_shift(hyp, start, len, dest);
                let bound = best.as_ref().map_or(usize::MAX, |b| b.distance);
                let Some(distance) = levenshtein_within(&shifted, reference, bound) else {
                    continue;
                };
                let better = distance < bound;
                if better {
                    ties.clear();
                    ties.push(shifted.clone());
                    best = Some(Candidate {
                        distance,
                        start,
                        len,
                        dest,
                        shifted,
                    });
                } else if !ties.contains(&shifted) {
                    ties.push(shifted);
                }
            }
        }
    }
    best.map(|b| (b, ties.len()))
}

/// Runs greedy TER and records every applied shift.
pub fn ter_trace<T: PartialEq + Clone>(hypothesis: &[T], reference: &[T]) -> Result<TerTrace, TerError> {
    if reference.is_empty() {
        if hypothesis.is_empty() {
            return Ok(TerTrace {
                breakdown: TerBreakdown::default(),
                steps: Vec::new(),
            });
        }
        return Err(TerError::EmptyReference);
    }
    let mut hyp = hypothesis.to_vec();
    let mut distance = levenshtein_within(&hyp, reference, usize::MAX).unwrap_or_default();
    let mut steps = Vec::new();

    while distance > 0 {
        let Some((cand, tied)) = best_shift(&hyp, reference) else { break };
        if cand.distance >= distance {
            break;
        }
        steps.push(ShiftStep {
            start: cand.start,
            len: cand.len,
            dest: cand.dest,
            distance_after: cand.distance,
            tied_outcomes: tied,
        });
        hyp = cand.shifted;
        distance = cand.distance;
    }
    let ops = align(&hyp, reference);

    let count = |op: Op| ops.iter().filter(|o| **o == op).count();
    Ok(TerTrace {
        breakdown: TerBreakdown {
            insertions: count(Op::Ins),
            deletions: count(Op::Del),
            substitutions: count(Op::Sub),
            shifts: steps.len(),
            ref_tokens: reference.len(),
        },
        steps,
    })
}

pub fn ter_edits<T: PartialEq + Clone>(hypothesis: &[T], reference: &[T]) -> Result<TerBreakdown, TerError> {
    ter_trace(hypothesis, reference).map(|t| t.breakdown)
}

/// Micro-averaged edit rate over a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusHter {
    pub edits: usize,
    pub ref_tokens: usize,
}

impl CorpusHter {
    pub fn percent(&self) -> f64 {
        if self.ref_tokens == 0 {
            0.0
        } else {
            100.0 * self.edits as f64 / self.ref_tokens as f64
        }
    }
}

impl fmt::Display for CorpusHter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}", self.percent())
    }
}

/// `100 × Σ edits / Σ reference tokens`.
pub fn corpus_hter<T, P>(pairs: &[(P, P)]) -> Result<CorpusHter, TerError>
where
    T: PartialEq + Clone,
    P: AsRef<[T]>,
{
    if pairs.is_empty() {
        return Err(TerError::NoPairs);
    }
    let mut total = CorpusHter { edits: 0, ref_tokens: 0 };
    for (hyp, reference) in pairs {
        let b = ter_edits(hyp.as_ref(), reference.as_ref())?;
        total.edits += b.total_edits();
        total.ref_tokens += b.ref_tokens;
    }
    Ok(total)
}
