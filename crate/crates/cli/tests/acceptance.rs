//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Tolerances are the constants below.

#[path = "../../core/tests/support/oracles.rs"]
mod oracles;
#[path = "../../core/tests/support/published.rs"]
mod published;

use std::collections::{HashMap, VecDeque};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use blindpe_core::metrics::{corpus_hter, levenshtein, med, ter_trace};
use blindpe_core::report::{table_csv, ReportHeader, ResultsTable};
use blindpe_core::stats::{fisher_exact_two_tailed, g_test, wilson_ci};
use blindpe_core::{
    analyze, interleave, partition_sections, AlignedDocument, AlignedSegment, AnalysisConfig, Comparison,
    ContingencyTable2x2, EditThresholds, Origin, PreparationConfig,
};
use rand_chacha::ChaCha20Rng;
use rand_core::SeedableRng;

const P_TOL: f64 = 0.001;
const G_TOL: f64 = 0.002;
const PUBLISHED_P_TOL: f64 = 0.002;
const FISHER_BUDGET: Duration = Duration::from_millis(1);
const SUITE_BUDGET: Duration = Duration::from_millis(100);
const PIPELINE_BUDGET: Duration = Duration::from_secs(5);
const EXACT_TOL: f64 = 1e-9;
const COVERAGE_TOL: f64 = 0.01;
const COVERAGE_SEED: u64 = 42;
/// Hand-computed p-values are compared at this precision.
const E2E_P_TOL: f64 = 1e-6;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn fisher_p(a: u64, b: u64, c: u64, d: u64) -> f64 {
    fisher_exact_two_tailed(&ContingencyTable2x2::new(a, b, c, d)).p
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let p = fisher_p(14, 223, 12, 226);
    let took = start.elapsed();
    ensure((p - 0.693).abs() <= P_TOL, format!("p = {p:.4}, want 0.693 ± {P_TOL}"))?;
    ensure(took < FISHER_BUDGET, format!("took {took:?}, budget {FISHER_BUDGET:?}"))?;
    Ok(format!("p = {p:.4} in {took:?}"))
}

fn criterion_2() -> Check {
    let p = fisher_p(1, 149, 5, 145);
    let g = g_test(&ContingencyTable2x2::new(1, 149, 5, 145)).map_err(|e| e.to_string())?.p;
    ensure((p - 0.214).abs() <= P_TOL, format!("Fisher p = {p:.4}, want 0.214 ± {P_TOL}"))?;
    ensure((g - 0.085).abs() <= G_TOL, format!("G p = {g:.4}, want 0.085 ± {G_TOL}"))?;
    Ok(format!("Fisher p = {p:.4}, G p = {g:.4}"))
}

fn published_results() -> Result<(Vec<blindpe_core::PairResults>, Duration), String> {
    let datasets: Vec<_> = published::ALL.iter().map(published::dataset).collect();
    let cfg = AnalysisConfig::default();
    let start = Instant::now();
    let results = datasets
        .iter()
        .map(|ds| analyze(ds, &cfg).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((results, start.elapsed()))
}

fn criterion_3() -> Check {
    let (results, took) = published_results()?;
    let mut significant = Vec::new();
    let mut tests = 0;
    for r in &results {
        for c in &r.comparisons {
            tests += 1;
            if c.fisher.significant {
                significant.push(format!("{} {}", r.pair_name(), c.key));
            }
        }
    }
    ensure(tests == 15, format!("{tests} comparisons, want 15"))?;
    let want = ["de-en med>0", "de-fr med>0", "de-fr med>5"];
    ensure(significant == want, format!("significant: {significant:?}, want {want:?}"))?;
    let p = |pair: usize, c: Comparison| results[pair].comparison(c).map(|r| r.fisher.p).unwrap_or(f64::NAN);
    for (label, got, want) in [
        ("de-en med>5", p(0, Comparison::MedHighEffort), 0.255),
        ("de-it med>0", p(2, Comparison::MedEdited), 0.110),
        ("de-it med>5", p(2, Comparison::MedHighEffort), 0.674),
    ] {
        ensure((got - want).abs() <= PUBLISHED_P_TOL, format!("{label}: p = {got:.4}, want {want} ± {PUBLISHED_P_TOL}"))?;
    }
    ensure(took < SUITE_BUDGET, format!("15 comparisons took {took:?}, budget {SUITE_BUDGET:?}"))?;
    Ok(format!("significant {significant:?}; 15 comparisons in {took:?}"))
}

fn criterion_4() -> Check {
    let (results, _) = published_results()?;
    let table = ResultsTable {
        header: ReportHeader {
            tool: "blindpe".into(),
            version: "test".into(),
            seeds: vec![],
            alpha: 0.05,
            thresholds: EditThresholds::default(),
            ci_level: 0.95,
            generated_at: None,
        },
        pairs: results,
    };
    let csv = table_csv(&table);
    let row = csv
        .lines()
        .find(|l| l.starts_with("Omission,"))
        .ok_or("no Omission row")?
        .to_owned();
    ensure(row.starts_with("Omission,1,(0.67),5,(3.33),"), format!("row {row:?}"))?;
    Ok(row)
}

fn criterion_5() -> Check {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    for _ in 0..10_000 {
        let (a, b) = (oracles::random_string(&mut rng), oracles::random_string(&mut rng));
        let (ac, bc): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
        ensure(med(&a, &b) == oracles::dp_table(&ac, &bc), format!("{a:?} / {b:?}"))?;
    }
    let mut triples = 0;
    for _ in 0..10_000 {
        let (x, y, z) = (
            oracles::random_string(&mut rng),
            oracles::random_string(&mut rng),
            oracles::random_string(&mut rng),
        );
        let (xy, yz, xz) = (med(&x, &y), med(&y, &z), med(&x, &z));
        ensure(med(&x, &x) == 0 && (xy == 0) == (x == y), format!("identity fails on {x:?} {y:?}"))?;
        ensure(xy == med(&y, &x), format!("symmetry fails on {x:?} {y:?}"))?;
        ensure(xz <= xy + yz, format!("triangle fails on {x:?} {y:?} {z:?}"))?;
        triples += 1;
    }
    Ok(format!("10000 pairs agree with the DP table; axioms hold on {triples} triples"))
}

fn criterion_6() -> Check {
    let seqs = oracles::all_sequences(5);
    let (mut unique, mut tied, mut above_free) = (0usize, 0usize, 0usize);
    for h in &seqs {
        // Everything reachable from h by unrestricted block moves, with depth.
        let mut reach = HashMap::from([(h.clone(), 0usize)]);
        let mut queue = VecDeque::from([h.clone()]);
        while let Some(s) = queue.pop_front() {
            let d = reach[&s];
            for t in oracles::moves(&s, None) {
                if !reach.contains_key(&t) {
                    reach.insert(t.clone(), d + 1);
                    queue.push_back(t);
                }
            }
        }
        for r in seqs.iter().filter(|r| !r.is_empty()) {
            let trace = ter_trace(h, r).map_err(|e| e.to_string())?;
            let greedy = trace.breakdown.total_edits();
            let legal = oracles::oracle(h, r, true);
            let free = reach.iter().map(|(s, k)| k + levenshtein(s, r)).min().unwrap_or(usize::MAX);
            ensure(greedy >= legal, format!("greedy {greedy} beats the oracle {legal} on {h:?} -> {r:?}"))?;
            ensure(greedy >= free, format!("greedy {greedy} beats unrestricted search {free} on {h:?} -> {r:?}"))?;
            if greedy > free {
                above_free += 1;
            }
            if trace.greedy_unique() {
                unique += 1;
                ensure(greedy == legal, format!("unique choice: greedy {greedy}, oracle {legal} on {h:?} -> {r:?}"))?;
            } else {
                tied += 1;
            }
        }
    }
    let hyp: Vec<String> = "a b c d e f g h i x".split(' ').map(String::from).collect();
    let reference: Vec<String> = "a b c d e f g h i j".split(' ').map(String::from).collect();
    let hter = corpus_hter(&[(hyp, reference)]).map_err(|e| e.to_string())?.to_string();
    ensure(hter == "10.00", format!("corpus HTER {hter}, want 10.00"))?;
    println!(
        "    info: {above_free} of {} pairs cost more than unrestricted block moves allow; none cost less",
        unique + tied
    );
    Ok(format!("{unique} unique pairs equal the oracle, {tied} tied pairs never beat it; HTER {hter}"))
}

fn criterion_7() -> Check {
    let doc = |identical: bool| AlignedDocument {
        language_pair: None,
        metadata: Default::default(),
        segments: (0..6)
            .map(|i| {
                let ht = format!("Satz {i} Fassung eins.");
                let mt = if identical { ht.clone() } else { format!("Satz {i} Fassung zwei.") };
                AlignedSegment::new(format!("seg{i}"), format!("Source {i}."), ht, mt)
            })
            .collect(),
    };
    let prepare = |d: &AlignedDocument, seed: u64| -> Result<(String, String, usize), String> {
        let cfg = PreparationConfig::new(seed, vec!["r1".into()], 6);
        let sections = partition_sections(d, &cfg).map_err(|e| e.to_string())?;
        let (docs, key) = interleave(d, &sections, &cfg).map_err(|e| e.to_string())?;
        Ok((docs[0].to_tsv_string(), key.to_tsv_string(), key.count(Origin::Ht)))
    };
    let (distinct, same) = (doc(false), doc(true));
    let baseline = prepare(&same, 0)?.0;
    for seed in 0..1_000u64 {
        let (text, key, ht) = prepare(&distinct, seed)?;
        ensure(ht == 3, format!("seed {seed}: {ht} HT of 6"))?;
        ensure(prepare(&distinct, seed)? == (text.clone(), key, ht), format!("seed {seed}: rerun differs"))?;
        for marker in ["HT", "MT", "origin", "seed"] {
            ensure(!text.contains(marker), format!("seed {seed}: document contains {marker:?}"))?;
        }
        // With identical texts any byte difference could only come from the origin.
        ensure(prepare(&same, seed)?.0 == baseline, format!("seed {seed}: document bytes depend on origin"))?;
    }
    Ok("1000 seeds: 3/3 split, byte-identical reruns, no origin bytes".into())
}

fn criterion_8() -> Check {
    let (mut tables, mut worst) = (0usize, 0.0f64);
    for n in 0..=50u64 {
        for a in 0..=n {
            for b in 0..=n - a {
                for c in 0..=n - a - b {
                    let t = ContingencyTable2x2::new(a, b, c, n - a - b - c);
                    let got = fisher_exact_two_tailed(&t).p;
                    let want = if t.is_degenerate() { 1.0 } else { oracles::fisher_rational(&t) };
                    worst = worst.max((got - want).abs());
                    tables += 1;
                }
            }
        }
    }
    ensure(worst < EXACT_TOL, format!("max abs error {worst:.3e} over {tables} tables"))?;

    let (n, p, draws) = (150u64, 0.1f64, 10_000);
    let mut rng = ChaCha20Rng::seed_from_u64(COVERAGE_SEED);
    let mut covered = 0;
    for _ in 0..draws {
        let k = (0..n).filter(|_| oracles::uniform(&mut rng) < p).count() as u64;
        let ci = wilson_ci(k, n, 0.95).map_err(|e| e.to_string())?;
        if ci.lo <= p && p <= ci.hi {
            covered += 1;
        }
    }
    let rate = f64::from(covered) / f64::from(draws);
    ensure(
        (rate - 0.95).abs() <= COVERAGE_TOL,
        format!("Wilson coverage {rate:.4} outside 0.95 ± {COVERAGE_TOL} (seed {COVERAGE_SEED})"),
    )?;
    Ok(format!(
        "{tables} tables, max abs error {worst:.1e}; Wilson coverage {rate:.4} (seed {COVERAGE_SEED})"
    ))
}

/// Characters appended to the last word of segment `i`'s shown target.
const EDIT_SIZES: [usize; 20] = [0, 2, 0, 0, 3, 8, 0, 1, 2, 7, 4, 5, 6, 9, 7, 0, 0, 0, 0, 0];
const TERMINOLOGY: [usize; 6] = [4, 5, 9, 12, 13, 16];
const OMISSION: [usize; 3] = [3, 7, 17];
const TYPOGRAPHY: [usize; 1] = [1];
/// Origins drawn by seed 42 for two raters of ten segments.
const ASSIGNMENT: &str = "HHHHMMHMMMMMMMHHHMHH";

fn run_cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_blindpe"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn fill_sheet(path: &Path) -> Result<(), String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let mut out = String::new();
    for line in text.lines() {
        let mut cells: Vec<String> = line.split('\t').map(String::from).collect();
        if cells.len() == 8 && cells[0] != "id" {
            let i: usize = cells[0].trim_start_matches('s').parse().map_err(|_| "bad id")?;
            cells[3] = format!("{}{}", cells[2], "q".repeat(EDIT_SIZES[i]));
            let flag = |set: &[usize]| if set.contains(&i) { "1".to_owned() } else { String::new() };
            cells[4] = flag(&TERMINOLOGY);
            cells[5] = flag(&OMISSION);
            cells[6] = flag(&TYPOGRAPHY);
        }
        out.push_str(&cells.join("\t"));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| e.to_string())
}

fn criterion_9() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let mut corpus = String::from("# language_pair=de-en\nid\tsource\tht\tmt\n");
    for i in 0..20 {
        corpus.push_str(&format!("s{i:02}\tQuelle {i}\tthe first rendering {i} ok\tthe second rendering {i} ok\n"));
    }
    std::fs::write(p("corpus.tsv"), corpus).map_err(|e| e.to_string())?;

    let start = Instant::now();
    run_cli(&[
        "prepare", "--corpus", &p("corpus.tsv"), "--raters", "a,b", "--segments-per-rater", "10",
        "--seed", "42", "--out", &p("prep"), "--reproducible",
    ])?;
    let key = std::fs::read_to_string(p("prep/key.tsv")).map_err(|e| e.to_string())?;
    let drawn: String = key
        .lines()
        .filter(|l| l.starts_with('s'))
        .map(|l| if l.split('\t').nth(1) == Some("HT") { 'H' } else { 'M' })
        .collect();
    ensure(drawn == ASSIGNMENT, format!("assignment {drawn}, want {ASSIGNMENT}"))?;
    for r in ["a", "b"] {
        fill_sheet(&dir.path().join(format!("prep/raters/{r}.tsv")))?;
    }
    run_cli(&[
        "ingest", "--annotations", &p("prep/raters/a.tsv"), &p("prep/raters/b.tsv"), "--out",
        &p("ann.jsonl"), "--key", &p("prep/key.tsv"),
    ])?;
    let stdout = run_cli(&[
        "analyze", "--annotations", &p("ann.jsonl"), "--key", &p("prep/key.tsv"), "--out", &p("results"),
        "--reproducible",
    ])?;
    let took = start.elapsed();

    // HT = {0,1,2,3,6,14,15,16,18,19}, MT = the other ten.
    let expected = [
        ("terminology", 1, 5, 0.140867),
        ("omission", 1, 2, 1.0),
        ("typography", 1, 0, 1.0),
        ("med>0", 2, 9, 0.005477),
        ("med>5", 1, 4, 0.303406),
    ];
    let json = std::fs::read_to_string(p("results/results.json")).map_err(|e| e.to_string())?;
    let results = blindpe_core::report::results_from_json(&json).map_err(|e| e.to_string())?;
    let pair = &results.pairs[0];
    for (key, ht, mt, want_p) in expected {
        let c = pair.comparisons.iter().find(|c| c.key == key).ok_or(format!("no {key}"))?;
        ensure(
            (c.table.a, c.table.c) == (ht, mt),
            format!("{key}: HT {} MT {}, want {ht} and {mt}", c.table.a, c.table.c),
        )?;
        ensure((c.fisher.p - want_p).abs() <= E2E_P_TOL, format!("{key}: p = {}, want {want_p}", c.fisher.p))?;
        ensure(stdout.contains(&format!("{key} HT {ht}/10 MT {mt}/10")), format!("{key} missing from output"))?;
    }
    let bins = |o: Origin| {
        let b = pair.summary(o).bins;
        (b.exact, b.edited, b.high_effort)
    };
    ensure(bins(Origin::Ht) == (8, 1, 1), format!("HT bins {:?}, want (8, 1, 1)", bins(Origin::Ht)))?;
    ensure(bins(Origin::Mt) == (1, 5, 4), format!("MT bins {:?}, want (1, 5, 4)", bins(Origin::Mt)))?;
    let hter = |o: Origin| pair.summary(o).hter.map(|h| h.to_string()).unwrap_or_default();
    // One substituted word per edited segment over 50 reference words.
    ensure(hter(Origin::Ht) == "4.00" && hter(Origin::Mt) == "18.00", format!("HTER {} / {}", hter(Origin::Ht), hter(Origin::Mt)))?;
    ensure(took < PIPELINE_BUDGET, format!("pipeline took {took:?}, budget {PIPELINE_BUDGET:?}"))?;
    Ok(format!("counts, bins, HTER and p-values match in {took:?}"))
}

fn main() {
    let criteria: [(u32, fn() -> Check); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut failed = Vec::new();
    for (n, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {n}: PASS  {detail}"),
            Err(why) => {
                println!("criterion {n}: FAIL  {why}");
                failed.push(n);
            }
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
