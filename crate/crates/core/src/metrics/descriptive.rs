use serde::{Deserialize, Serialize};

/// Summary of an edit-distance sample. `sd` uses the n−1 denominator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub n: usize,
    pub min: f64,
    pub max: f64,
    pub avg: f64,
    pub med: f64,
    pub sd: f64,
}

/// `None` for an empty sample.
pub fn descriptive_stats(values: &[usize]) -> Option<DescriptiveStats> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    let avg = sorted.iter().map(|&v| v as f64).sum::<f64>() / n as f64;
    let med = if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] as f64 + sorted[n / 2] as f64) / 2.0
    };
    let sd = if n > 1 {
        let ss: f64 = sorted.iter().map(|&v| (v as f64 - avg).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Some(DescriptiveStats {
        n,
        min: sorted[0] as f64,
        max: sorted[n - 1] as f64,
        avg,
        med,
        sd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let s = descriptive_stats(&[0, 0, 0]).unwrap();
        assert_eq!((s.min, s.max, s.avg, s.med, s.sd), (0.0, 0.0, 0.0, 0.0, 0.0));

        // mean 10/3; squared deviations 2·(10/3)² + (20/3)² = 600/9; /2 → 100/3
        let s = descriptive_stats(&[0, 0, 10]).unwrap();
        assert_eq!((s.min, s.max, s.med), (0.0, 10.0, 0.0));
        assert_eq!(format!("{:.2}", s.avg), "3.33");
        assert!((s.sd - (100.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(format!("{:.2}", s.sd), "5.77");

        assert_eq!(descriptive_stats(&[4, 1, 3, 2]).unwrap().med, 2.5);
        assert!(descriptive_stats(&[]).is_none());
    }

    proptest! {
        #[test]
        fn ordering_invariants(v in proptest::collection::vec(0usize..200, 1..50)) {
            let s = descriptive_stats(&v).unwrap();
            prop_assert!(s.min <= s.med && s.med <= s.max);
            prop_assert!(s.min <= s.avg && s.avg <= s.max);
            prop_assert!(s.sd >= 0.0);
        }
    }
}
