//! Independent reference implementations shared by the oracle tests.
#![allow(dead_code, clippy::needless_range_loop, clippy::too_many_arguments)]

use std::collections::{HashMap, VecDeque};

use blindpe_core::metrics::{levenshtein, MAX_SHIFT_LEN};
use blindpe_core::ContingencyTable2x2;
use rand_chacha::ChaCha20Rng;
use rand_core::Rng;

pub fn all_sequences(max_len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    let mut layer: Vec<Vec<u8>> = vec![vec![]];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|s| (0..3u8).map(move |c| [s.as_slice(), &[c]].concat()))
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// Hypothesis positions left unmatched by at least one minimum-cost
/// alignment, found by enumerating every alignment path.
pub fn misaligned(h: &[u8], r: &[u8]) -> Vec<bool> {
    fn walk(h: &[u8], r: &[u8], i: usize, j: usize, cost: usize, best: usize, open: &mut Vec<usize>, out: &mut [bool]) {
        if cost > best {
            return;
        }
        if i == h.len() && j == r.len() {
            for &k in open.iter() {
                out[k] = true;
            }
            return;
        }
        if i < h.len() && j < r.len() {
            let sub = h[i] != r[j];
            if sub {
                open.push(i);
            }
            walk(h, r, i + 1, j + 1, cost + usize::from(sub), best, open, out);
            if sub {
                open.pop();
            }
        }
        if i < h.len() {
            open.push(i);
            walk(h, r, i + 1, j, cost + 1, best, open, out);
            open.pop();
        }
        if j < r.len() {
            walk(h, r, i, j + 1, cost + 1, best, open, out);
        }
    }
    let mut out = vec![false; h.len()];
    walk(h, r, 0, 0, 0, levenshtein(h, r), &mut vec![], &mut out);
    out
}

/// All single block moves; with a reference, only blocks that occur in it and
/// hold a misaligned token.
pub fn moves(s: &[u8], constrain_to: Option<&[u8]>) -> Vec<Vec<u8>> {
    let n = s.len();
    let open = constrain_to.map(|r| misaligned(s, r));
    let mut out = vec![];
    for start in 0..n {
        for len in 1..=MAX_SHIFT_LEN.min(n - start) {
            let block = &s[start..start + len];
            if let (Some(r), Some(open)) = (constrain_to, &open) {
                if !r.windows(len).any(|w| w == block) || !open[start..start + len].contains(&true) {
                    continue;
                }
            }
            let rest: Vec<u8> = [&s[..start], &s[start + len..]].concat();
            for at in 0..=rest.len() {
                if at == start {
                    continue;
                }
                out.push([&rest[..at], block, &rest[at..]].concat());
            }
        }
    }
    out
}

/// min over reachable hypotheses of (shifts taken + remaining edit distance).
pub fn oracle(h: &[u8], r: &[u8], constrained: bool) -> usize {
    let mut depth = HashMap::from([(h.to_vec(), 0usize)]);
    let mut queue = VecDeque::from([h.to_vec()]);
    while let Some(s) = queue.pop_front() {
        let d = depth[&s];
        for t in moves(&s, constrained.then_some(r)) {
            if !depth.contains_key(&t) {
                depth.insert(t.clone(), d + 1);
                queue.push_back(t);
            }
        }
    }
    depth.iter().map(|(s, k)| k + levenshtein(s, r)).min().unwrap()
}


pub fn choose(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

/// Two-tailed Fisher in integer arithmetic. Every point probability shares
/// the denominator C(N, c1), so the tolerance rule compares numerators:
/// num_k * 10^7 <= num_obs * (10^7 + 1).
pub fn fisher_rational(t: &ContingencyTable2x2) -> f64 {
    let (r1, r2) = (t.a + t.b, t.c + t.d);
    let c1 = t.a + t.c;
    let n = r1 + r2;
    let lo = c1.saturating_sub(r2);
    let hi = c1.min(r1);
    let num = |k: u64| choose(r1, k) * choose(r2, c1 - k);
    let obs = num(t.a);
    let total: u128 = (lo..=hi)
        .map(num)
        .filter(|&x| x * 10_000_000 <= obs * 10_000_001)
        .sum();
    total as f64 / choose(n, c1) as f64
}


pub fn uniform(rng: &mut ChaCha20Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}


pub const ALPHABET: [char; 14] = ['a', 'b', 'e', 'ä', 'é', 'ß', 'ж', 'д', 'ω', '中', '文', '😀', ' ', '-'];

/// Full (n+1)×(m+1) Wagner–Fischer table.
pub fn dp_table(a: &[char], b: &[char]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + cost);
        }
    }
    d[a.len()][b.len()]
}

pub fn random_string(rng: &mut ChaCha20Rng) -> String {
    let len = (rng.next_u64() % 31) as usize;
    (0..len).map(|_| ALPHABET[(rng.next_u64() % ALPHABET.len() as u64) as usize]).collect()
}

