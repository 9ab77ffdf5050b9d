use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use hde_core::scalar::{from_count, Real};

use crate::chunk::Chunk;
use crate::error::{Result, RetrievalError};
use crate::query::analyze;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Params<T> {
    pub k1: T,
    pub b: T,
}

impl<T: Real> Default for Bm25Params<T> {
    fn default() -> Self {
        Bm25Params {
            k1: T::from_f64(1.2).expect("k1"),
            b: T::from_f64(0.75).expect("b"),
        }
    }
}

#[derive(Debug, Clone)]
struct Doc {
    len: usize,
    tf: BTreeMap<String, usize>,
}

/// An immutable BM25 index over chunks from any number of corpora.
#[derive(Debug, Clone)]
pub struct Bm25Index<T> {
    params: Bm25Params<T>,
    chunks: Vec<Chunk>,
    docs: Vec<Doc>,
    postings: BTreeMap<String, Vec<usize>>,
    corpora: BTreeSet<String>,
}

/// A chunk with its score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scored<'a, T> {
    pub chunk: &'a Chunk,
    pub score: T,
}

impl<T: Real> Bm25Index<T> {
    pub fn build(chunks: Vec<Chunk>) -> Self {
        Self::with_params(chunks, Bm25Params::default())
    }

    pub fn with_params(mut chunks: Vec<Chunk>, params: Bm25Params<T>) -> Self {
        chunks.sort_by(|a, b| a.chunk_id.cmp(&b.chunk_id));
        let mut postings: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        let docs: Vec<Doc> = chunks
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let tokens = analyze(&c.text);
                let mut tf = BTreeMap::new();
                for t in &tokens {
                    *tf.entry(t.clone()).or_insert(0) += 1;
                }
                for t in tf.keys() {
                    postings.entry(t.clone()).or_default().push(i);
                }
                Doc { len: tokens.len(), tf }
            })
            .collect();
        let corpora = chunks.iter().map(|c| c.corpus_id.clone()).collect();
        Bm25Index {
            params,
            chunks,
            docs,
            postings,
            corpora,
        }
    }

    pub fn chunks(&self) -> &[Chunk] {
        &self.chunks
    }

    pub fn corpora(&self) -> &BTreeSet<String> {
        &self.corpora
    }

    pub fn params(&self) -> Bm25Params<T> {
        self.params
    }

    /// Top-`k` chunks of `scope` for `query`, by descending score with ties
    /// broken by ascending chunk id. Collection statistics (N, average
    /// length, document frequency) are taken over the scope. Chunks sharing
    /// no term with the query are never returned.
    pub fn retrieve<S: AsRef<str>>(&self, query: &str, k: usize, scope: &[S]) -> Result<Vec<Scored<'_, T>>> {
        if k == 0 {
            return Err(RetrievalError::ZeroK);
        }
        if scope.is_empty() {
            return Err(RetrievalError::EmptyScope);
        }
        let scope: BTreeSet<&str> = scope.iter().map(AsRef::as_ref).collect();
        if let Some(unknown) = scope.iter().find(|c| !self.corpora.contains(**c)) {
            return Err(RetrievalError::UnknownCorpus(unknown.to_string()));
        }
        let in_scope = |i: usize| scope.contains(self.chunks[i].corpus_id.as_str());

        let n_docs = (0..self.chunks.len()).filter(|&i| in_scope(i)).count();
        let total_len: usize = (0..self.chunks.len())
            .filter(|&i| in_scope(i))
            .map(|i| self.docs[i].len)
            .sum();
        if n_docs == 0 {
            return Ok(Vec::new());
        }
        let avgdl = from_count::<T>(total_len) / from_count::<T>(n_docs);

        let terms: BTreeSet<String> = analyze(query).into_iter().collect();
        let half = T::from_f64(0.5).expect("0.5");
        let Bm25Params { k1, b } = self.params;

        let mut scores: BTreeMap<usize, T> = BTreeMap::new();
        for term in &terms {
            let Some(docs) = self.postings.get(term) else {
                continue;
            };
            let matching: Vec<usize> = docs.iter().copied().filter(|&i| in_scope(i)).collect();
            if matching.is_empty() {
                continue;
            }
            let df = from_count::<T>(matching.len());
            let idf = (T::one() + (from_count::<T>(n_docs) - df + half) / (df + half)).ln();
            for i in matching {
                let doc = &self.docs[i];
                let tf = from_count::<T>(doc.tf[term]);
                let norm = T::one() - b + b * from_count::<T>(doc.len) / avgdl;
                let part = idf * tf * (k1 + T::one()) / (tf + k1 * norm);
                let slot = scores.entry(i).or_insert_with(T::zero);
                *slot = *slot + part;
            }
        }

        let mut ranked: Vec<(usize, T)> = scores.into_iter().collect();
        ranked.sort_by(|(ia, sa), (ib, sb)| {
            sb.partial_cmp(sa)
                .unwrap_or(Ordering::Equal)
                .then_with(|| self.chunks[*ia].chunk_id.cmp(&self.chunks[*ib].chunk_id))
        });
        Ok(ranked
            .into_iter()
            .take(k)
            .map(|(i, score)| Scored {
                chunk: &self.chunks[i],
                score,
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chunk::chunk_id;

    fn chunk(corpus: &str, pos: usize, text: &str) -> Chunk {
        Chunk {
            chunk_id: chunk_id(corpus, pos),
            corpus_id: corpus.into(),
            text: text.into(),
            token_estimate: text.split_whitespace().count(),
            position: pos,
        }
    }

    fn toy() -> Bm25Index<f64> {
        Bm25Index::build(vec![
            chunk("kant", 0, "duty binds every rational will"),
            chunk("kant", 1, "the categorical imperative commands duty"),
            chunk("kant", 2, "a good will shines like a jewel"),
            chunk("mill", 0, "happiness is the only desirable end"),
        ])
    }

    #[test]
    fn unique_term_ranks_its_chunk_first() {
        let idx = toy();
        let hits = idx.retrieve("jewel", 4, &["kant"]).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].chunk.chunk_id, "kant#0002");
    }

    #[test]
    fn hand_computed_score_on_three_chunks() {
        // scope = kant: N = 3, every chunk has 4 non-stopword tokens, so avgdl = 4
        // and the length norm is 1. "imperative" occurs once, only in kant#0001:
        // idf = ln(1 + (3 - 1 + 0.5) / 1.5) = ln(8/3), tf part = 2.2 / 2.2.
        let idx = toy();
        let hits = idx.retrieve("imperative", 1, &["kant"]).unwrap();
        let expected = (8.0f64 / 3.0).ln();
        assert_eq!(hits[0].chunk.chunk_id, "kant#0001");
        assert!((hits[0].score - expected).abs() < 1e-12);
    }

    #[test]
    fn saturation_returns_all_matching_ranked() {
        let idx = toy();
        let hits = idx.retrieve("duty will jewel", 99, &["kant"]).unwrap();
        assert_eq!(hits.len(), 3);
        assert!(hits.windows(2).all(|w| w[0].score >= w[1].score));
    }

    #[test]
    fn no_overlap_means_no_results() {
        assert!(toy().retrieve("trolley lever", 4, &["kant", "mill"]).unwrap().is_empty());
        assert!(toy().retrieve("the of and", 4, &["kant"]).unwrap().is_empty());
    }

    #[test]
    fn ties_break_by_chunk_id() {
        let idx = Bm25Index::<f64>::build(vec![
            chunk("b", 0, "virtue habit"),
            chunk("a", 0, "virtue habit"),
        ]);
        let hits = idx.retrieve("virtue", 2, &["a", "b"]).unwrap();
        assert_eq!(hits[0].score, hits[1].score);
        assert_eq!(hits[0].chunk.chunk_id, "a#0000");
    }

    #[test]
    fn scope_is_isolated_and_validated() {
        let idx = toy();
        let hits = idx.retrieve("happiness duty", 10, &["mill"]).unwrap();
        assert!(hits.iter().all(|h| h.chunk.corpus_id == "mill"));
        assert!(matches!(idx.retrieve("duty", 1, &["hume"]), Err(RetrievalError::UnknownCorpus(c)) if c == "hume"));
        assert!(matches!(idx.retrieve("duty", 0, &["kant"]), Err(RetrievalError::ZeroK)));
        assert!(matches!(idx.retrieve::<&str>("duty", 1, &[]), Err(RetrievalError::EmptyScope)));
    }

    #[test]
    fn scoring_is_generic_over_precision() {
        let idx = Bm25Index::<f32>::build(toy().chunks().to_vec());
        let hits = idx.retrieve("jewel", 1, &["kant"]).unwrap();
        assert_eq!(hits[0].chunk.chunk_id, "kant#0002");
        assert!(hits[0].score > 0.0f32);
    }
}
