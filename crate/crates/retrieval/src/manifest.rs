use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, RetrievalError};

/// One source text and the agents allowed to retrieve from it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub corpus_id: String,
    pub path: PathBuf,
    #[serde(default)]
    pub owner_agent_ids: Vec<String>,
}

/// The corpus manifest, a TOML file of `[[corpus]]` tables.
///
/// Relative paths are resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusManifest {
    #[serde(default, rename = "corpus")]
    pub corpora: Vec<CorpusEntry>,
}

impl CorpusManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let source = std::fs::read_to_string(path).map_err(|e| RetrievalError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut manifest = Self::parse(&source, path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for entry in &mut manifest.corpora {
            if entry.path.is_relative() {
                entry.path = base.join(&entry.path);
            }
        }
        Ok(manifest)
    }

    pub fn parse(source: &str, origin: &Path) -> Result<Self> {
        let invalid = |reason: String| RetrievalError::Manifest {
            path: origin.to_path_buf(),
            reason,
        };
        let manifest: CorpusManifest = toml::from_str(source).map_err(|e| invalid(e.message().to_string()))?;
        if manifest.corpora.is_empty() {
            return Err(invalid("no corpora listed".into()));
        }
        let mut seen = BTreeSet::new();
        for entry in &manifest.corpora {
            if entry.corpus_id.trim().is_empty() {
                return Err(invalid("empty corpus_id".into()));
            }
            if entry.corpus_id.contains('#') {
                return Err(invalid(format!("corpus_id `{}` contains '#'", entry.corpus_id)));
            }
            if !seen.insert(entry.corpus_id.as_str()) {
                return Err(invalid(format!("duplicate corpus_id `{}`", entry.corpus_id)));
            }
        }
        Ok(manifest)
    }

    /// Source files listed in the manifest that do not exist.
    pub fn missing_sources(&self) -> Vec<PathBuf> {
        self.corpora
            .iter()
            .filter(|c| !c.path.is_file())
            .map(|c| c.path.clone())
            .collect()
    }

    pub fn get(&self, corpus_id: &str) -> Option<&CorpusEntry> {
        self.corpora.iter().find(|c| c.corpus_id == corpus_id)
    }

    /// Corpus ids owned by `agent_id`, in manifest order.
    pub fn owned_by(&self, agent_id: &str) -> Vec<String> {
        self.corpora
            .iter()
            .filter(|c| c.owner_agent_ids.iter().any(|a| a == agent_id))
            .map(|c| c.corpus_id.clone())
            .collect()
    }
}
