//! Greedy TER against breadth-first search over shift sequences, for every
//! hypothesis/reference pair up to length 5 over {0, 1, 2}.

#[path = "support/oracles.rs"]
mod oracles;

use std::collections::{HashMap, VecDeque};

use blindpe_core::metrics::{corpus_hter, levenshtein, ter_edits, ter_trace};
use oracles::{all_sequences, moves, oracle};

#[test]
fn greedy_matches_exhaustive_search() {
    let seqs = all_sequences(5);
    let unconstrained: Vec<HashMap<Vec<u8>, usize>> = seqs
        .iter()
        .map(|h| {
            let mut depth = HashMap::from([(h.clone(), 0usize)]);
            let mut queue = VecDeque::from([h.clone()]);
            while let Some(s) = queue.pop_front() {
                let d = depth[&s];
                for t in moves(&s, None) {
                    if !depth.contains_key(&t) {
                        depth.insert(t.clone(), d + 1);
                        queue.push_back(t);
                    }
                }
            }
            depth
        })
        .collect();

    let (mut unique, mut tied, mut above_free_optimum) = (0usize, 0usize, 0usize);
    for (h, reach) in seqs.iter().zip(&unconstrained) {
        for r in seqs.iter().filter(|r| !r.is_empty()) {
            let trace = ter_trace(h, r).unwrap();
            let greedy = trace.breakdown.total_edits();
            let free = reach.iter().map(|(s, k)| k + levenshtein(s, r)).min().unwrap();
            assert!(greedy >= free, "greedy beat the unconstrained optimum: {h:?} -> {r:?}");
            if greedy > free {
                above_free_optimum += 1;
            }
            if trace.greedy_unique() {
                unique += 1;
                assert_eq!(greedy, oracle(h, r, true), "unique greedy choice, {h:?} -> {r:?}");
            } else {
                tied += 1;
                assert!(greedy >= oracle(h, r, true), "{h:?} -> {r:?}");
            }
        }
    }
    println!("pairs: {unique} unique, {tied} with ties, {above_free_optimum} above the unconstrained optimum");
    assert_eq!(unique + tied, 364 * 363);
}

#[test]
fn oracle_examples() {
    assert_eq!(oracle(&[0, 1, 2], &[1, 2, 0], true), 1);
    assert_eq!(oracle(&[0, 1], &[0, 2, 2], true), 2);
    // The block [0, 0, 1] is already aligned, so the cheaper move is out of reach.
    assert_eq!(oracle(&[0, 0, 1, 2, 2], &[1, 1, 0, 0, 1], true), 4);
    assert_eq!(oracle(&[0, 0, 1, 2, 2], &[1, 1, 0, 0, 1], false), 3);
}

#[test]
fn worked_examples() {
    let t = ter_edits(&["sat", "the", "cat"], &["the", "cat", "sat"]).unwrap();
    assert_eq!((t.shifts, t.insertions, t.deletions, t.substitutions), (1, 0, 0, 0));
    let t = ter_edits(&["a", "b"], &["a", "c", "d"]).unwrap();
    assert_eq!((t.shifts, t.insertions, t.deletions, t.substitutions), (0, 1, 0, 1));

    let hyp: Vec<String> = "a b c d e f g h i x".split(' ').map(String::from).collect();
    let reference: Vec<String> = "a b c d e f g h i j".split(' ').map(String::from).collect();
    assert_eq!(corpus_hter(&[(hyp, reference)]).unwrap().to_string(), "10.00");
}
