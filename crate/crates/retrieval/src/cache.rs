use std::collections::BTreeMap;
use std::path::Path;

use hde_core::scalar::Real;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bm25::Bm25Index;
use crate::chunk::{ingest_bytes, Chunk};
use crate::error::{Result, RetrievalError};
use crate::manifest::CorpusManifest;

/// File name of the index cache inside a cache directory.
pub const CACHE_FILE: &str = "index_cache.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    /// Every source hash matched; nothing was re-chunked.
    Hit,
    /// At least one corpus was added, changed, or removed.
    Rebuilt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct CachedCorpus {
    source_sha256: String,
    chunks: Vec<Chunk>,
}

/// Chunked corpora persisted as JSON, keyed by the SHA-256 of each source.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusCache {
    corpora: BTreeMap<String, CachedCorpus>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl CorpusCache {
    pub fn load(path: &Path) -> Result<Option<Self>> {
        let raw = match std::fs::read(path) {
            Ok(raw) => raw,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => {
                return Err(RetrievalError::Io {
                    path: path.to_path_buf(),
                    source: e,
                })
            }
        };
        serde_json::from_slice(&raw).map(Some).map_err(|e| RetrievalError::Cache {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let io = |e| RetrievalError::Io {
            path: path.to_path_buf(),
            source: e,
        };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
        let json = serde_json::to_vec_pretty(self).expect("cache serializes");
        std::fs::write(path, json).map_err(io)
    }

    /// Bring the cache at `cache_path` up to date with `manifest`.
    ///
    /// Sources whose hash matches the cached entry are reused; others are
    /// re-chunked. The cache file is rewritten only when something changed.
    pub fn sync(manifest: &CorpusManifest, cache_path: &Path) -> Result<(Self, CacheStatus)> {
        let missing = manifest.missing_sources();
        if !missing.is_empty() {
            return Err(RetrievalError::MissingSources(missing));
        }
        let previous = match Self::load(cache_path) {
            Ok(c) => c.unwrap_or_default(),
            Err(RetrievalError::Cache { path, reason }) => {
                tracing::warn!(path = %path.display(), %reason, "discarding unreadable index cache");
                Self::default()
            }
            Err(e) => return Err(e),
        };
        let mut next = CorpusCache::default();
        let mut changed = previous.corpora.len() != manifest.corpora.len();
        for entry in &manifest.corpora {
            let bytes = std::fs::read(&entry.path).map_err(|e| RetrievalError::Io {
                path: entry.path.clone(),
                source: e,
            })?;
            let hash = sha256_hex(&bytes);
            let cached = previous
                .corpora
                .get(&entry.corpus_id)
                .filter(|c| c.source_sha256 == hash)
                .cloned();
            let corpus = match cached {
                Some(c) => c,
                None => {
                    changed = true;
                    CachedCorpus {
                        source_sha256: hash,
                        chunks: ingest_bytes(&bytes, &entry.path, &entry.corpus_id)?,
                    }
                }
            };
            next.corpora.insert(entry.corpus_id.clone(), corpus);
        }
        if changed {
            next.save(cache_path)?;
            Ok((next, CacheStatus::Rebuilt))
        } else {
            Ok((next, CacheStatus::Hit))
        }
    }

    /// Chunk every corpus in `manifest` without touching any cache file.
    pub fn build(manifest: &CorpusManifest) -> Result<Self> {
        let missing = manifest.missing_sources();
        if !missing.is_empty() {
            return Err(RetrievalError::MissingSources(missing));
        }
        let mut cache = CorpusCache::default();
        for entry in &manifest.corpora {
            let bytes = std::fs::read(&entry.path).map_err(|e| RetrievalError::Io {
                path: entry.path.clone(),
                source: e,
            })?;
            cache.corpora.insert(
                entry.corpus_id.clone(),
                CachedCorpus {
                    source_sha256: sha256_hex(&bytes),
                    chunks: ingest_bytes(&bytes, &entry.path, &entry.corpus_id)?,
                },
            );
        }
        Ok(cache)
    }

    pub fn corpus_ids(&self) -> impl Iterator<Item = &str> {
        self.corpora.keys().map(String::as_str)
    }

    pub fn chunk_count(&self, corpus_id: &str) -> Option<usize> {
        self.corpora.get(corpus_id).map(|c| c.chunks.len())
    }

    pub fn source_hash(&self, corpus_id: &str) -> Option<&str> {
        self.corpora.get(corpus_id).map(|c| c.source_sha256.as_str())
    }

    pub fn index<T: Real>(&self) -> Bm25Index<T> {
        Bm25Index::build(self.corpora.values().flat_map(|c| c.chunks.iter().cloned()).collect())
    }
}
