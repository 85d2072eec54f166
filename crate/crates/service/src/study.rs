use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use blindpe_core::PreparedDocument;

/// The prepared documents a service instance hands out, one per rater.
#[derive(Debug, Clone, Default)]
pub struct Study {
    documents: BTreeMap<String, PreparedDocument>,
}

#[derive(Debug, thiserror::Error)]
pub enum StudyError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("rater {0:?} has more than one prepared document")]
    DuplicateRater(String),
    #[error("no prepared documents found in {0}")]
    Empty(PathBuf),
}

impl Study {
    pub fn new(documents: Vec<PreparedDocument>) -> Result<Self, StudyError> {
        let mut map = BTreeMap::new();
        for doc in documents {
            let rater = doc.rater_id.clone();
            if map.insert(rater.clone(), doc).is_some() {
                return Err(StudyError::DuplicateRater(rater));
            }
        }
        Ok(Self { documents: map })
    }

    /// Loads every `*.tsv` file in `dir` as a prepared document. A file
    /// without a `# rater=` line is assigned to the rater named by its stem.
    pub fn load_dir(dir: &Path) -> Result<Self, StudyError> {
        let io = |source| StudyError::Io {
            path: dir.to_path_buf(),
            source,
        };
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(io)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()
            .map_err(io)?;
        paths.retain(|p| p.extension().is_some_and(|e| e == "tsv"));
        paths.sort();
        if paths.is_empty() {
            return Err(StudyError::Empty(dir.to_path_buf()));
        }
        let mut docs = Vec::with_capacity(paths.len());
        for path in paths {
            let file = File::open(&path).map_err(|source| StudyError::Io {
                path: path.clone(),
                source,
            })?;
            let stem = path.file_stem().and_then(|s| s.to_str()).map(str::to_owned);
            let doc = PreparedDocument::read_tsv(BufReader::new(file), stem.as_deref()).map_err(|e| {
                StudyError::Format {
                    path: path.clone(),
                    message: e.to_string(),
                }
            })?;
            docs.push(doc);
        }
        Self::new(docs)
    }

    pub fn document(&self, rater_id: &str) -> Option<&PreparedDocument> {
        self.documents.get(rater_id)
    }

    pub fn raters(&self) -> impl Iterator<Item = &str> {
        self.documents.keys().map(String::as_str)
    }
}
