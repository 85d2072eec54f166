use std::sync::OnceLock;

use super::{ContingencyTable2x2, TestMethod, TestOutcome};

/// Tables whose point probability is within this relative factor of the
/// observed one count as "at least as extreme" (R's `fisher.test` rule).
pub const FISHER_RELATIVE_TOLERANCE: f64 = 1e-7;

/// `ln(k!)` for `k ≤ max`, accumulated once.
#[derive(Debug, Clone)]
pub struct LogFactorials {
    table: Vec<f64>,
}

impl LogFactorials {
    pub fn new(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        table.push(0.0);
        let mut acc = 0.0f64;
        for k in 1..=max {
            acc += (k as f64).ln();
            table.push(acc);
        }
        Self { table }
    }

    /// Shared table covering corpora up to 8192 segments.
    pub fn shared() -> &'static LogFactorials {
        static SHARED: OnceLock<LogFactorials> = OnceLock::new();
        SHARED.get_or_init(|| LogFactorials::new(8192))
    }

    pub fn max(&self) -> usize {
        self.table.len() - 1
    }

    pub fn ln_factorial(&self, k: u64) -> f64 {
        self.table[k as usize]
    }

    pub fn ln_choose(&self, n: u64, k: u64) -> f64 {
        debug_assert!(k <= n);
        self.ln_factorial(n) - self.ln_factorial(k) - self.ln_factorial(n - k)
    }
}

/// Hypergeometric probabilities of the top-left cell given the margins of
/// `t`, indexed from the smallest feasible value. Returns `(lowest, probs)`.
pub fn hypergeometric_pmf(t: &ContingencyTable2x2, lf: &LogFactorials) -> (u64, Vec<f64>) {
    let [r1, r2] = t.row_totals();
    let [c1, _] = t.col_totals();
    let lo = c1.saturating_sub(r2);
    let hi = r1.min(c1);
    let log_p: Vec<f64> = (lo..=hi)
        .map(|k| lf.ln_choose(r1, k) + lf.ln_choose(r2, c1 - k))
        .collect();
    // Normalize in linear space relative to the mode; the shared constant
    // ln C(n, c1) cancels.
    let max = log_p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = log_p.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = p.iter().sum();
    for x in &mut p {
        *x /= total;
    }
    (lo, p)
}

/// Two-tailed Fisher's exact test: the total probability of all tables with
/// the observed margins that are no more likely than the observed table.
/// Degenerate tables (a zero margin) get p = 1 and `degenerate = true`.
pub fn fisher_exact_two_tailed(t: &ContingencyTable2x2) -> TestOutcome {
    if t.is_degenerate() {
        let mut o = TestOutcome::new(TestMethod::FisherTwoTailed, None, 1.0);
        o.degenerate = true;
        return o;
    }
    let n = t.n() as usize;
    let owned;
    let lf = if n <= LogFactorials::shared().max() {
        LogFactorials::shared()
    } else {
        owned = LogFactorials::new(n);
        &owned
    };
    let (lo, probs) = hypergeometric_pmf(t, lf);
    let observed = probs[(t.a - lo) as usize];
    let cutoff = observed * (1.0 + FISHER_RELATIVE_TOLERANCE);
    let p: f64 = probs.iter().filter(|&&q| q <= cutoff).sum();
    TestOutcome::new(TestMethod::FisherTwoTailed, None, p.min(1.0))
}
