//! Lexical normalization and phrase matching.

/// Lowercase and collapse every whitespace run to a single space.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    out
}

/// Plain containment of a normalized phrase in normalized text.
pub fn contains_phrase(normalized_text: &str, phrase: &str) -> bool {
    let phrase = normalize(phrase);
    !phrase.is_empty() && normalized_text.contains(&phrase)
}

/// Keyword containment: single words must stand alone ("one" does not match
/// "someone"), multi-word phrases match as substrings.
pub fn contains_keyword(normalized_text: &str, keyword: &str) -> bool {
    let keyword = normalize(keyword);
    if keyword.is_empty() {
        return false;
    }
    if keyword.contains(' ') {
        return normalized_text.contains(&keyword);
    }
    normalized_text.match_indices(&keyword).any(|(start, m)| {
        let before = normalized_text[..start].chars().next_back();
        let after = normalized_text[start + m.len()..].chars().next();
        !before.is_some_and(char::is_alphanumeric) && !after.is_some_and(char::is_alphanumeric)
    })
}

/// Lowercase alphanumeric tokens.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
}

/// Whitespace word count.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_collapses_case_and_space() {
        assert_eq!(normalize("  The  Greatest\tHAPPINESS\n"), "the greatest happiness");
        assert_eq!(normalize(""), "");
    }

    #[test]
    fn single_words_respect_boundaries() {
        let t = normalize("Someone pulls the lever; one dies.");
        assert!(contains_keyword(&t, "one"));
        assert!(contains_keyword(&t, "lever"));
        assert!(!contains_keyword(&normalize("someone alone"), "one"));
        assert!(contains_keyword(&normalize("one's duty"), "one"));
        assert!(!contains_keyword(&normalize("fivefold"), "five"));
    }

    #[test]
    fn phrases_match_as_substrings() {
        let t = normalize("the Categorical   Imperative binds");
        assert!(contains_keyword(&t, "categorical imperative"));
        assert!(!contains_keyword(&t, "kingdom of ends"));
        assert!(!contains_keyword(&t, "   "));
    }

    #[test]
    fn tokenizer_splits_on_punctuation() {
        let toks: Vec<_> = tokenize("Duty, not pleasure—the Law!").collect();
        assert_eq!(toks, ["duty", "not", "pleasure", "the", "law"]);
    }
}
