use std::path::{Path, PathBuf};

use anyhow::Context;
use blindpe_core::report::{comparison_lines, emit_report, results_from_json, ReportFormat};
use blindpe_core::{
    analyze, exclude_incomplete, AnalysisConfig, EditThresholds, ReportHeader, ResultsTable, TOOL_NAME, TOOL_VERSION,
};

use crate::ingest::{load_all, read_key};
use crate::{Failure, Format, Outcome};

pub struct Args {
    pub annotations: Vec<PathBuf>,
    pub keys: Vec<PathBuf>,
    pub alpha: f64,
    pub thresholds: EditThresholds,
    pub ci_level: f64,
    pub out: PathBuf,
    pub formats: Vec<Format>,
    pub reproducible: bool,
}

fn report_formats(formats: &[Format]) -> Vec<ReportFormat> {
    let formats = if formats.is_empty() { &[Format::Csv, Format::Json][..] } else { formats };
    let mut out = Vec::new();
    for f in formats {
        let add: &[ReportFormat] = match f {
            Format::Csv => &[ReportFormat::Table, ReportFormat::Figures],
            Format::Json => &[ReportFormat::Json],
        };
        for r in add {
            if !out.contains(r) {
                out.push(*r);
            }
        }
    }
    out
}

pub fn run(args: Args) -> Outcome {
    if args.keys.is_empty() {
        return Err(Failure::Usage(
            "refusing to analyze blinded data: pass the blinding key with --key".into(),
        ));
    }
    if args.keys.len() != args.annotations.len() {
        return Err(Failure::Usage(format!(
            "got {} --annotations but {} --key; give one key per annotation file",
            args.annotations.len(),
            args.keys.len()
        )));
    }
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Failure::Usage(format!("--alpha must lie strictly between 0 and 1, got {}", args.alpha)));
    }
    if !(args.ci_level > 0.0 && args.ci_level < 1.0) {
        return Err(Failure::Usage(format!("--ci-level must lie strictly between 0 and 1, got {}", args.ci_level)));
    }
    let cfg = AnalysisConfig {
        alpha: args.alpha,
        thresholds: args.thresholds,
        ci_level: args.ci_level,
        alternative_tests: true,
    };

    let mut pairs = Vec::new();
    let mut seeds = Vec::new();
    for (ann, key_path) in args.annotations.iter().zip(&args.keys) {
        let key = read_key(key_path)?;
        let records = load_all(std::slice::from_ref(ann), None)?;
        let (ds, completion) = exclude_incomplete(records, &key).with_context(|| format!("{}", ann.display()))?;
        for r in &completion.raters {
            if r.completed < r.assigned {
                eprintln!("{}: {} of {} segments completed", r.rater_id, r.completed, r.assigned);
            }
        }
        if completion.excluded() > 0 {
            eprintln!("excluded {} incomplete segment(s)", completion.excluded());
        }
        let result = analyze(&ds, &cfg).with_context(|| format!("{}", ann.display()))?;
        println!("{}", result.pair_name());
        for line in comparison_lines(&result) {
            println!("  {line}");
        }
        seeds.push(key.seed);
        pairs.push(result);
    }

    let table = ResultsTable {
        header: ReportHeader {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            seeds,
            alpha: cfg.alpha,
            thresholds: cfg.thresholds,
            ci_level: cfg.ci_level,
            generated_at: (!args.reproducible)
                .then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
        },
        pairs,
    };
    let written = emit_report(&table, &args.out, &report_formats(&args.formats))?;
    println!("wrote {} file(s) to {}", written.len(), args.out.display());
    Ok(())
}

pub fn report(results: &Path, out: &Path, formats: &[Format]) -> Outcome {
    let text = std::fs::read_to_string(results).with_context(|| format!("cannot read {}", results.display()))?;
    let table = results_from_json(&text).with_context(|| format!("{}", results.display()))?;
    let written = emit_report(&table, out, &report_formats(formats))?;
    println!("wrote {} file(s) to {}", written.len(), out.display());
    Ok(())
}
