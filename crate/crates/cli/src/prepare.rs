use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use blindpe_core::corpus::findings_to_lines;
use blindpe_core::digest::sha256_hex;
use blindpe_core::interleaver::BalanceScope;
use blindpe_core::{interleave, load_aligned, partition_sections, validate, PreparationConfig, TOOL_NAME, TOOL_VERSION};
use serde_json::json;

use crate::{Failure, Outcome};

pub struct Args {
    pub corpus: PathBuf,
    pub raters: Vec<String>,
    pub segments_per_rater: usize,
    pub seed: u64,
    pub balance_scope: BalanceScope,
    pub out: PathBuf,
    pub key: Option<PathBuf>,
    pub reproducible: bool,
}

/// Lexical containment after resolving what exists on disk.
fn is_inside(path: &Path, dir: &Path) -> bool {
    let abs = |p: &Path| -> PathBuf {
        let p = if p.is_absolute() {
            p.to_path_buf()
        } else {
            std::env::current_dir().unwrap_or_default().join(p)
        };
        // Canonicalize the deepest existing ancestor, keep the rest as is.
        let mut existing = p.as_path();
        let mut rest = Vec::new();
        while !existing.exists() {
            match (existing.parent(), existing.file_name()) {
                (Some(parent), Some(name)) => {
                    rest.push(name.to_owned());
                    existing = parent;
                }
                _ => break,
            }
        }
        let mut base = existing.canonicalize().unwrap_or_else(|_| existing.to_path_buf());
        for name in rest.into_iter().rev() {
            base.push(name);
        }
        base
    };
    abs(path).starts_with(abs(dir))
}

pub fn run(args: Args) -> Outcome {
    let raters_dir = args.out.join("raters");
    let key_path = args.key.clone().unwrap_or_else(|| args.out.join("key.tsv"));
    if is_inside(&key_path, &raters_dir) {
        return Err(Failure::Usage(format!(
            "key path {} is inside the rater directory {}; raters would receive the key",
            key_path.display(),
            raters_dir.display()
        )));
    }

    let corpus_bytes = fs::read(&args.corpus).with_context(|| format!("cannot read {}", args.corpus.display()))?;
    let doc = load_aligned(BufReader::new(corpus_bytes.as_slice()))
        .with_context(|| format!("{}", args.corpus.display()))?;
    let findings = validate(&doc);
    if !findings.is_empty() {
        eprint!("{}", findings_to_lines(&findings));
        return Err(anyhow!("{} finding(s) in {}", findings.len(), args.corpus.display()).into());
    }

    let mut cfg = PreparationConfig::new(args.seed, args.raters, args.segments_per_rater);
    cfg.balance_scope = args.balance_scope;
    let sections = partition_sections(&doc, &cfg)?;
    let (docs, key) = interleave(&doc, &sections, &cfg)?;

    fs::create_dir_all(&raters_dir).with_context(|| format!("cannot create {}", raters_dir.display()))?;
    let mut outputs = serde_json::Map::new();
    let mut write = |path: &Path, contents: String| -> anyhow::Result<()> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, &contents).with_context(|| format!("cannot write {}", path.display()))?;
        let name = path.strip_prefix(&args.out).unwrap_or(path);
        outputs.insert(name.display().to_string(), json!(sha256_hex(contents.as_bytes())));
        Ok(())
    };
    for d in &docs {
        write(&raters_dir.join(format!("{}.tsv", d.rater_id)), d.to_tsv_string())?;
    }
    write(&key_path, key.to_tsv_string())?;

    let mut manifest = json!({
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "seed": cfg.seed,
        "language_pair": doc.language_pair.as_ref().map(ToString::to_string),
        "config": cfg,
        "corpus": { "path": args.corpus.display().to_string(), "sha256": sha256_hex(&corpus_bytes) },
        "outputs": outputs,
    });
    if !args.reproducible {
        manifest["generated_at"] = json!(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    }
    let manifest_path = args.out.join("manifest.json");
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("cannot write {}", manifest_path.display()))?;

    println!(
        "prepared {} documents of {} segments (HT {}, MT {}) in {}; key at {}",
        docs.len(),
        cfg.segments_per_rater,
        key.count(blindpe_core::Origin::Ht),
        key.count(blindpe_core::Origin::Mt),
        raters_dir.display(),
        key_path.display()
    );
    Ok(())
}
