//! Independence tests for origin × property 2×2 tables and proportion intervals.

mod asymptotic;
mod fisher;
mod wilson;

pub use asymptotic::{chi_square, g_test, normal_quantile};
pub use fisher::{fisher_exact_two_tailed, hypergeometric_pmf, LogFactorials, FISHER_RELATIVE_TOLERANCE};
pub use wilson::{wilson_ci, ProportionCI};

use serde::{Deserialize, Serialize};

use crate::corpus::Origin;

pub const DEFAULT_ALPHA: f64 = 0.05;

/// Rows are origins (HT first), columns are property present / absent.
///
/// ```text
///        present  absent
///   HT      a        b
///   MT      c        d
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContingencyTable2x2 {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ContingencyTable2x2 {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        Self { a, b, c, d }
    }

    /// Builds a table from `present` counts out of group sizes.
    pub fn from_counts(ht_present: u64, n_ht: u64, mt_present: u64, n_mt: u64) -> Self {
        assert!(ht_present <= n_ht && mt_present <= n_mt, "count exceeds group size");
        Self::new(ht_present, n_ht - ht_present, mt_present, n_mt - mt_present)
    }

    pub fn n(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    pub fn row_totals(&self) -> [u64; 2] {
        [self.a + self.b, self.c + self.d]
    }

    pub fn col_totals(&self) -> [u64; 2] {
        [self.a + self.c, self.b + self.d]
    }

    pub fn cells(&self) -> [[u64; 2]; 2] {
        [[self.a, self.b], [self.c, self.d]]
    }

    pub fn present(&self, origin: Origin) -> u64 {
        match origin {
            Origin::Ht => self.a,
            Origin::Mt => self.c,
        }
    }

    pub fn group_size(&self, origin: Origin) -> u64 {
        match origin {
            Origin::Ht => self.a + self.b,
            Origin::Mt => self.c + self.d,
        }
    }

    /// Share of a group with the property; 0 for an empty group.
    pub fn proportion(&self, origin: Origin) -> f64 {
        let n = self.group_size(origin);
        if n == 0 {
            0.0
        } else {
            self.present(origin) as f64 / n as f64
        }
    }

    /// True when some row or column total is zero.
    pub fn is_degenerate(&self) -> bool {
        self.row_totals().contains(&0) || self.col_totals().contains(&0)
    }

    pub fn swap_rows(&self) -> Self {
        Self::new(self.c, self.d, self.a, self.b)
    }

    pub fn swap_cols(&self) -> Self {
        Self::new(self.b, self.a, self.d, self.c)
    }

    /// Expected counts under independence with the observed margins.
    pub fn expected(&self) -> [[f64; 2]; 2] {
        let n = self.n() as f64;
        let r = self.row_totals();
        let c = self.col_totals();
        let mut e = [[0.0; 2]; 2];
        for (i, row) in e.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = r[i] as f64 * c[j] as f64 / n;
            }
        }
        e
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    FisherTwoTailed,
    GTest,
    ChiSquare,
    ChiSquareYates,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub method: TestMethod,
    /// Test statistic; absent for Fisher's exact test.
    pub statistic: Option<f64>,
    pub p: f64,
    pub alpha: f64,
    /// `p <= alpha`.
    pub significant: bool,
    /// A zero margin made the test uninformative (p = 1 by convention).
    #[serde(default)]
    pub degenerate: bool,
}

impl TestOutcome {
    pub fn new(method: TestMethod, statistic: Option<f64>, p: f64) -> Self {
        let p = p.clamp(0.0, 1.0);
        Self {
            method,
            statistic,
            p,
            alpha: DEFAULT_ALPHA,
            significant: p <= DEFAULT_ALPHA,
            degenerate: false,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self.significant = self.p <= alpha;
        self
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("table {0:?} has a zero margin; expected counts are undefined")]
    ZeroMargin(ContingencyTable2x2),
    #[error("proportion needs at least one trial")]
    NoTrials,
    #[error("successes ({k}) exceed trials ({n})")]
    TooManySuccesses { k: u64, n: u64 },
    #[error("confidence level must lie strictly between 0 and 1, got {0}")]
    BadLevel(f64),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margins_and_proportions() {
        let t = ContingencyTable2x2::from_counts(14, 237, 12, 238);
        assert_eq!(t, ContingencyTable2x2::new(14, 223, 12, 226));
        assert_eq!(t.row_totals(), [237, 238]);
        assert_eq!(t.col_totals(), [26, 449]);
        assert!((t.proportion(Origin::Ht) - 14.0 / 237.0).abs() < 1e-15);
        assert!(!t.is_degenerate());
        assert!(ContingencyTable2x2::new(0, 10, 0, 10).is_degenerate());
    }

    #[test]
    fn significance_uses_less_or_equal() {
        let o = TestOutcome::new(TestMethod::FisherTwoTailed, None, 0.05);
        assert!(o.significant);
        assert!(!o.with_alpha(0.049).significant);
    }
}
