use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;

use anyhow::Context;
use blindpe_core::annotation::{completion_summary, merge_records, read_filled_sheet, read_jsonl, write_jsonl};
use blindpe_core::interleaver::InterleaveError;
use blindpe_core::{AnnotationRecord, BlindingKey};
use chrono::{DateTime, Utc};

use crate::Outcome;

/// Reads one annotation file. `.jsonl` is a service export, anything else a
/// filled sheet whose rows default to the file's modification time.
pub fn load(path: &Path, rater: Option<&str>) -> anyhow::Result<Vec<AnnotationRecord>> {
    let file = File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
    let records = if path.extension().is_some_and(|e| e == "jsonl") {
        read_jsonl(BufReader::new(file))
    } else {
        let mtime: DateTime<Utc> = file
            .metadata()
            .and_then(|m| m.modified())
            .map(Into::into)
            .unwrap_or_else(|_| Utc::now());
        read_filled_sheet(BufReader::new(file), rater, mtime)
    };
    records.with_context(|| format!("{}", path.display()))
}

pub fn load_all(paths: &[impl AsRef<Path>], rater: Option<&str>) -> anyhow::Result<Vec<AnnotationRecord>> {
    let mut all = Vec::new();
    for p in paths {
        all.extend(load(p.as_ref(), rater)?);
    }
    Ok(merge_records(all))
}

pub fn read_key(path: &Path) -> anyhow::Result<BlindingKey> {
    let file = File::open(path).with_context(|| format!("cannot read key {}", path.display()))?;
    BlindingKey::read_tsv(BufReader::new(file)).with_context(|| format!("{}", path.display()))
}

pub fn run(annotations: &[std::path::PathBuf], out: &Path, key: Option<&Path>, rater: Option<&str>) -> Outcome {
    let records = load_all(annotations, rater)?;
    if let Some(key) = key {
        let key = read_key(key)?;
        let unknown: Vec<String> = records
            .iter()
            .filter(|r| key.get(&r.segment_id).is_none())
            .map(|r| r.segment_id.clone())
            .collect();
        if !unknown.is_empty() {
            return Err(anyhow::Error::from(InterleaveError::UnknownSegments(unknown)).into());
        }
    }
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut buf = Vec::new();
    write_jsonl(&mut buf, &records)?;
    fs::write(out, buf).with_context(|| format!("cannot write {}", out.display()))?;
    for (rater, done, total) in completion_summary(&records) {
        println!("{rater}: {done} of {total} completed");
    }
    println!("wrote {} records to {}", records.len(), out.display());
    Ok(())
}
