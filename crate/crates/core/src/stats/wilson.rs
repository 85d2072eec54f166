use serde::{Deserialize, Serialize};

use super::{normal_quantile, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProportionCI {
    pub k: u64,
    pub n: u64,
    pub level: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_ci(k: u64, n: u64, level: f64) -> Result<ProportionCI, StatsError> {
    if n == 0 {
        return Err(StatsError::NoTrials);
    }
    if k > n {
        return Err(StatsError::TooManySuccesses { k, n });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(StatsError::BadLevel(level));
    }
    let z = normal_quantile(0.5 + level / 2.0);
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (centre - half).clamp(0.0, p) };
    let hi = if k == n { 1.0 } else { (centre + half).clamp(p, 1.0) };
    Ok(ProportionCI { k, n, level, lo, hi })
}
