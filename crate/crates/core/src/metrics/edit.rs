/// Unit-cost Levenshtein distance over arbitrary comparable items.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Levenshtein distance if it is at most `bound`, `None` otherwise. Stops as
/// soon as a whole DP row exceeds the bound.
pub fn levenshtein_within<T: PartialEq>(a: &[T], b: &[T], bound: usize) -> Option<usize> {
    if a.len().abs_diff(b.len()) > bound {
        return None;
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        let mut row_min = cur[0];
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
            row_min = row_min.min(cur[j + 1]);
        }
        if row_min > bound {
            return None;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Some(prev[b.len()]).filter(|&d| d <= bound)
}

/// Character-level minimum edit distance between a shown target and its post-edit.
///
/// Counts Unicode scalar values, so both inputs should already be NFC. Whitespace
/// edits count like any other character.
pub fn med(original: &str, postedited: &str) -> usize {
    if original == postedited {
        return 0;
    }
    let a: Vec<char> = original.chars().collect();
    let b: Vec<char> = postedited.chars().collect();
    levenshtein(&a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Full (n+1)×(m+1) table, kept separate from the two-row implementation.
    fn dp_table(a: &str, b: &str) -> usize {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for (i, row) in d.iter_mut().enumerate() {
            row[0] = i;
        }
        for (j, cell) in d[0].iter_mut().enumerate() {
            *cell = j;
        }
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                let c = if a[i - 1] == b[j - 1] { 0 } else { 1 };
                d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + c);
            }
        }
        d[a.len()][b.len()]
    }

    #[test]
    fn examples() {
        assert_eq!(med("Der Vertrag gilt.", "Der Vertrag gilt."), 0);
        assert_eq!(med("", "abc"), 3);
        assert_eq!(dp_table("kitten", "sitting"), 3);
        assert_eq!(med("kitten", "sitting"), 3);
    }

    #[test]
    fn counts_scalar_values_not_bytes() {
        assert_eq!(med("Straße", "Strasse"), 2);
        assert_eq!(med("naïve", "naive"), 1);
        assert_eq!(med("a b", "a  b"), 1);
    }

    proptest! {
        #[test]
        fn bounded_agrees_with_full(a in proptest::collection::vec(0u8..3, 0..10), b in proptest::collection::vec(0u8..3, 0..10), bound in 0usize..12) {
            let full = levenshtein(&a, &b);
            prop_assert_eq!(levenshtein_within(&a, &b, bound), (full <= bound).then_some(full));
        }

        #[test]
        fn matches_dp_table(a in "[a-cäß ]{0,12}", b in "[a-cäß ]{0,12}") {
            prop_assert_eq!(med(&a, &b), dp_table(&a, &b));
        }
    }
}
