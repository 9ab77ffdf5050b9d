use std::collections::HashSet;
use std::sync::OnceLock;

use hde_core::text::tokenize;

const STOPWORDS: &str = include_str!("../data/stopwords.txt");

fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        STOPWORDS
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

pub fn is_stopword(token: &str) -> bool {
    stopwords().contains(token)
}

/// Lowercase tokens with stopwords removed; shared by indexing and querying.
pub fn analyze(text: &str) -> Vec<String> {
    tokenize(text).filter(|t| !is_stopword(t)).collect()
}

/// Retrieval query for a debate turn: the dilemma followed by the opponent's
/// last turn, lowercased and stopword-filtered.
pub fn build_query(dilemma: &str, opponent_last_turn: Option<&str>) -> String {
    let mut terms = analyze(dilemma);
    if let Some(t) = opponent_last_turn {
        terms.extend(analyze(t));
    }
    terms.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn query_drops_stopwords_and_case() {
        let q = build_query("Should you pull the Lever?", Some("It is our duty to refrain."));
        assert_eq!(q, "pull lever duty refrain");
    }

    #[test]
    fn query_without_opponent_turn() {
        assert_eq!(build_query("The trolley problem", None), "trolley problem");
    }
}
