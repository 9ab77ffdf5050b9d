use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RetrievalError};

/// A window of source words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub chunk_id: String,
    pub corpus_id: String,
    pub text: String,
    /// Whitespace word count of `text`.
    pub token_estimate: usize,
    /// Ordinal within the source, from 0.
    pub position: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkParams {
    pub window: usize,
    pub overlap: usize,
    /// A trailing chunk that adds fewer new words than this is dropped.
    pub min_tail: usize,
}

impl Default for ChunkParams {
    fn default() -> Self {
        ChunkParams {
            window: 200,
            overlap: 40,
            min_tail: 20,
        }
    }
}

pub(crate) fn chunk_id(corpus_id: &str, position: usize) -> String {
    format!("{corpus_id}#{position:04}")
}

/// Split text into overlapping word windows.
///
/// Windows start every `window - overlap` words. A document no longer than
/// one window is a single chunk; otherwise the last window is kept only if
/// it covers at least `min_tail` words beyond the previous one.
pub fn chunk_text(text: &str, corpus_id: &str, params: ChunkParams) -> Vec<Chunk> {
    assert!(params.overlap < params.window, "overlap must be smaller than the window");
    let words: Vec<&str> = text.split_whitespace().collect();
    let stride = params.window - params.overlap;
    let mut chunks = Vec::new();
    let mut start = 0;
    let mut covered = 0;
    while start < words.len() {
        let end = (start + params.window).min(words.len());
        if !chunks.is_empty() && end - covered < params.min_tail {
            break;
        }
        let position = chunks.len();
        chunks.push(Chunk {
            chunk_id: chunk_id(corpus_id, position),
            corpus_id: corpus_id.to_string(),
            text: words[start..end].join(" "),
            token_estimate: end - start,
            position,
        });
        covered = end;
        if end == words.len() {
            break;
        }
        start += stride;
    }
    chunks
}

/// Read a UTF-8 plain-text source and chunk it with the default parameters.
pub fn ingest(source: &Path, corpus_id: &str) -> Result<Vec<Chunk>> {
    let bytes = std::fs::read(source).map_err(|e| RetrievalError::Io {
        path: source.to_path_buf(),
        source: e,
    })?;
    ingest_bytes(&bytes, source, corpus_id)
}

pub(crate) fn ingest_bytes(bytes: &[u8], source: &Path, corpus_id: &str) -> Result<Vec<Chunk>> {
    let text = std::str::from_utf8(bytes).map_err(|e| RetrievalError::Encoding {
        path: source.to_path_buf(),
        offset: e.valid_up_to(),
    })?;
    if text.trim().is_empty() {
        return Err(RetrievalError::EmptySource {
            path: source.to_path_buf(),
        });
    }
    Ok(chunk_text(text, corpus_id, ChunkParams::default()))
}
