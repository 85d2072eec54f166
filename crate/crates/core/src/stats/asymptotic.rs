use super::{ContingencyTable2x2, StatsError, TestMethod, TestOutcome};

/// Upper tail of χ² with one degree of freedom.
fn chi2_df1_sf(x: f64) -> f64 {
    libm::erfc((x.max(0.0) / 2.0).sqrt())
}

/// Likelihood-ratio (G) test of independence, one degree of freedom.
pub fn g_test(t: &ContingencyTable2x2) -> Result<TestOutcome, StatsError> {
    if t.is_degenerate() {
        return Err(StatsError::ZeroMargin(*t));
    }
    let e = t.expected();
    let o = t.cells();
    let mut g = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            if o[i][j] > 0 {
                let obs = o[i][j] as f64;
                g += obs * (obs / e[i][j]).ln();
            }
        }
    }
    let g = (2.0 * g).max(0.0);
    Ok(TestOutcome::new(TestMethod::GTest, Some(g), chi2_df1_sf(g)))
}

/// Pearson's χ² test, optionally with Yates' continuity correction. The
/// correction never pushes a cell past its expectation (`max(|O−E| − ½, 0)`).
pub fn chi_square(t: &ContingencyTable2x2, yates: bool) -> Result<TestOutcome, StatsError> {
    if t.is_degenerate() {
        return Err(StatsError::ZeroMargin(*t));
    }
    let e = t.expected();
    let o = t.cells();
    let correction = if yates { 0.5 } else { 0.0 };
    let mut x2 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let dev = ((o[i][j] as f64 - e[i][j]).abs() - correction).max(0.0);
            x2 += dev * dev / e[i][j];
        }
    }
    let method = if yates {
        TestMethod::ChiSquareYates
    } else {
        TestMethod::ChiSquare
    };
    Ok(TestOutcome::new(method, Some(x2), chi2_df1_sf(x2)))
}

/// Standard normal quantile, solved on `erfc` by bisection.
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile probability must be in (0, 1)");
    let upper = |z: f64| 0.5 * libm::erfc(z / std::f64::consts::SQRT_2);
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        // upper tail decreases in z; we want 1 - upper(z) = p
        if 1.0 - upper(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}
