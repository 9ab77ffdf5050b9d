//! Corpus ingestion and deterministic lexical retrieval.
//!
//! Source texts are cut into overlapping word windows and scored with BM25.
//! Retrieval is restricted to a scope of corpus ids, and collection
//! statistics are computed over that scope only, so an agent's results never
//! depend on corpora it does not own.

mod bm25;
mod cache;
mod chunk;
mod error;
mod manifest;
mod query;

pub use bm25::{Bm25Index, Bm25Params, Scored};
pub use cache::{CacheStatus, CorpusCache, CACHE_FILE};
pub use chunk::{chunk_text, ingest, Chunk, ChunkParams};
pub use error::{Result, RetrievalError};
pub use manifest::{CorpusEntry, CorpusManifest};
pub use query::{analyze, build_query, is_stopword};

/// BM25 index over `f64` scores.
pub type RetrievalIndex = Bm25Index<f64>;

/// Default number of chunks retrieved per turn.
pub const DEFAULT_K: usize = 4;
