//! Results table, full-precision JSON and per-comparison figure data.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{ComparisonResult, PairResults};
use crate::corpus::Origin;
use crate::metrics::EditThresholds;

/// Provenance written at the top of every emitted file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub tool: String,
    pub version: String,
    pub seeds: Vec<u64>,
    pub alpha: f64,
    pub thresholds: EditThresholds,
    pub ci_level: f64,
    /// Wall-clock time; omitted for reproducible output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
}

impl ReportHeader {
    pub fn comment_lines(&self) -> String {
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        let mut s = format!(
            "# {} {} seed={} alpha={} thresholds={} ci_level={}\n",
            self.tool,
            self.version,
            if seeds.is_empty() { "none".into() } else { seeds.join(",") },
            self.alpha,
            self.thresholds,
            self.ci_level,
        );
        if let Some(t) = &self.generated_at {
            let _ = writeln!(s, "# generated={t}");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    pub header: ReportHeader,
    pub pairs: Vec<PairResults>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReportFormat {
    /// Results table in CSV.
    Table,
    /// Full-precision JSON.
    Json,
    /// One CSV per comparison with proportions, intervals and p.
    Figures,
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("results JSON is invalid: {0}")]
    Json(#[from] serde_json::Error),
}

/// `"*"` prefix for significant comparisons.
fn marked(count: u64, significant: bool) -> String {
    if significant {
        format!("*{count}")
    } else {
        count.to_string()
    }
}

fn percent(count: u64, n: usize) -> String {
    if n == 0 {
        "(-)".into()
    } else {
        format!("({:.2})", 100.0 * count as f64 / n as f64)
    }
}

fn number(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{x:.0}")
    } else {
        format!("{x:.2}")
    }
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// The results table: per pair, two columns (count, proportion in percent)
/// for HT and for MT. Significant comparisons carry a `*` on both counts.
pub fn table_csv(r: &ResultsTable) -> String {
    let mut out = r.header.comment_lines();
    let row = |out: &mut String, label: &str, cells: Vec<String>| {
        let mut line = csv_cell(label);
        for c in cells {
            line.push(',');
            line.push_str(&csv_cell(&c));
        }
        out.push_str(&line);
        out.push('\n');
    };
    let per_pair = |f: &dyn Fn(&PairResults) -> [String; 4]| -> Vec<String> {
        r.pairs.iter().flat_map(f).collect()
    };

    row(&mut out, "", per_pair(&|p| [p.pair_name(), String::new(), String::new(), String::new()]));
    row(
        &mut out,
        "",
        per_pair(&|p| [format!("HT (N={})", p.n_ht), String::new(), format!("MT (N={})", p.n_mt), String::new()]),
    );

    let blank = |label: &str, out: &mut String| row(out, label, per_pair(&|_| Default::default()));
    let comparison_row = |out: &mut String, idx: usize| {
        let label = r.pairs.first().map(|p| p.comparisons[idx].label.clone()).unwrap_or_default();
        let cells = per_pair(&|p| {
            let c = &p.comparisons[idx];
            let sig = c.fisher.significant;
            [
                marked(c.table.a, sig),
                percent(c.table.a, p.n_ht),
                marked(c.table.c, sig),
                percent(c.table.c, p.n_mt),
            ]
        });
        row(out, &label, cells);
    };

    blank("Error Analysis", &mut out);
    for idx in 0..3 {
        comparison_row(&mut out, idx);
    }
    blank("MED", &mut out);
    for idx in 3..5 {
        comparison_row(&mut out, idx);
    }
    type Stat = fn(&crate::metrics::DescriptiveStats) -> f64;
    let stats: [(&str, Stat, bool); 5] = [
        ("min", |s| s.min, false),
        ("max", |s| s.max, false),
        ("avg", |s| s.avg, true),
        ("med", |s| s.med, false),
        ("sd", |s| s.sd, true),
    ];
    for (label, get, fixed) in stats {
        let cells = per_pair(&|p| {
            let fmt = |o: Origin| {
                p.summary(o)
                    .med
                    .as_ref()
                    .map(|s| if fixed { format!("{:.2}", get(s)) } else { number(get(s)) })
                    .unwrap_or_default()
            };
            [fmt(Origin::Ht), String::new(), fmt(Origin::Mt), String::new()]
        });
        row(&mut out, label, cells);
    }
    blank("HTER", &mut out);
    let cells = per_pair(&|p| {
        let fmt = |o: Origin| p.summary(o).hter.map(|h| h.to_string()).unwrap_or_default();
        [fmt(Origin::Ht), String::new(), fmt(Origin::Mt), String::new()]
    });
    row(&mut out, "Corpus-level", cells);
    out
}

pub fn results_json(r: &ResultsTable) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("results serialize to JSON");
    s.push('\n');
    s
}

pub fn results_from_json(s: &str) -> Result<ResultsTable, ReportError> {
    Ok(serde_json::from_str(s)?)
}

/// Data behind one bar chart: one row per origin.
pub fn figure_csv(header: &ReportHeader, c: &ComparisonResult) -> String {
    let mut out = header.comment_lines();
    out.push_str("origin,proportion,ci_lo,ci_hi,p\n");
    for origin in Origin::ALL {
        let (lo, hi) = c
            .ci(origin)
            .map(|ci| (format!("{:.4}", ci.lo), format!("{:.4}", ci.hi)))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{origin},{:.4},{lo},{hi},{:.3}",
            c.table.proportion(origin),
            c.fisher.p
        );
    }
    out
}

fn file_slug(key: &str) -> String {
    key.replace('>', "_gt_")
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect()
}

/// One line per comparison, e.g. `omission HT 14/237 MT 12/238 p=0.693`,
/// with a trailing ` *` when significant.
pub fn comparison_lines(p: &PairResults) -> Vec<String> {
    p.comparisons
        .iter()
        .map(|c| {
            format!(
                "{} HT {}/{} MT {}/{} p={:.3}{}",
                c.key,
                c.table.a,
                p.n_ht,
                c.table.c,
                p.n_mt,
                c.fisher.p,
                if c.fisher.significant { " *" } else { "" }
            )
        })
        .collect()
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf, ReportError> {
    std::fs::write(&path, contents).map_err(|source| ReportError::Write {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes the requested formats into `dir` and returns the written paths.
pub fn emit_report(r: &ResultsTable, dir: &Path, formats: &[ReportFormat]) -> Result<Vec<PathBuf>, ReportError> {
    std::fs::create_dir_all(dir).map_err(|source| ReportError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    for f in formats {
        match f {
            ReportFormat::Table => written.push(write(dir.join("results.csv"), &table_csv(r))?),
            ReportFormat::Json => written.push(write(dir.join("results.json"), &results_json(r))?),
            ReportFormat::Figures => {
                for p in &r.pairs {
                    for c in &p.comparisons {
                        let name = format!("figure_{}_{}.csv", file_slug(&p.pair_name()), file_slug(&c.key));
                        written.push(write(dir.join(name), &figure_csv(&r.header, c))?);
                    }
                }
            }
        }
    }
    Ok(written)
}
