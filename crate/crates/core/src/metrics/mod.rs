//! Post-editing effort: character edit distance, effort bins, TER/HTER and
//! descriptive statistics over edit distances.

mod descriptive;
mod edit;
mod ter;
mod tokenize;

pub use descriptive::{descriptive_stats, DescriptiveStats};
pub use edit::{levenshtein, levenshtein_within, med};
pub use ter::{corpus_hter, ter_edits, ter_trace, CorpusHter, ShiftStep, TerBreakdown, TerError, TerTrace, MAX_SHIFT_LEN};
pub use tokenize::tokenize;

use serde::{Deserialize, Serialize};

/// Edit-distance cut-offs. Both comparisons are strict (`>`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditThresholds {
    pub edited_threshold: usize,
    pub high_effort_threshold: usize,
}

impl Default for EditThresholds {
    fn default() -> Self {
        Self {
            edited_threshold: 0,
            high_effort_threshold: 5,
        }
    }
}

impl EditThresholds {
    pub fn new(edited_threshold: usize, high_effort_threshold: usize) -> Result<Self, String> {
        if edited_threshold >= high_effort_threshold {
            return Err(format!(
                "edited threshold ({edited_threshold}) must be below the high-effort threshold ({high_effort_threshold})"
            ));
        }
        Ok(Self {
            edited_threshold,
            high_effort_threshold,
        })
    }
}

impl std::str::FromStr for EditThresholds {
    type Err = String;

    /// Parses `"0,5"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| format!("expected two comma-separated integers, got {s:?}"))?;
        let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}"));
        EditThresholds::new(parse(a)?, parse(b)?)
    }
}

impl std::fmt::Display for EditThresholds {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{}", self.edited_threshold, self.high_effort_threshold)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MedBin {
    Exact,
    Edited,
    HighEffort,
}

/// Classifies an edit distance: `exact` at zero, `high_effort` above the
/// high-effort threshold, `edited` otherwise.
pub fn bin_med(value: usize, t: EditThresholds) -> MedBin {
    if value > t.high_effort_threshold {
        MedBin::HighEffort
    } else if value == 0 {
        MedBin::Exact
    } else {
        MedBin::Edited
    }
}
