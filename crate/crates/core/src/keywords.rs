//! Keyword lexicons for turn-level metrics.
//!
//! Files hold one phrase per line; `#` starts a comment. The effective VALID
//! set is the union of `valid.txt`, the base list and every framework list,
//! which keeps BASE ⊆ VALID by construction for file-loaded lexicons.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CoreError, Result};
use crate::school::School;
use crate::text::{contains_keyword, normalize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum KeywordKind {
    Base,
    Valid,
    Framework(School),
}

impl fmt::Display for KeywordKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KeywordKind::Base => f.write_str("BASE"),
            KeywordKind::Valid => f.write_str("VALID"),
            KeywordKind::Framework(s) => write!(f, "FRAMEWORK({s})"),
        }
    }
}

/// A named, non-empty set of lowercase keywords.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KeywordSet {
    kind: KeywordKind,
    keywords: Vec<String>,
}

impl KeywordSet {
    pub fn new<I, S>(kind: KeywordKind, keywords: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut seen = BTreeSet::new();
        let keywords: Vec<String> = keywords
            .into_iter()
            .map(|k| normalize(k.as_ref()))
            .filter(|k| !k.is_empty() && seen.insert(k.clone()))
            .collect();
        if keywords.is_empty() {
            return Err(CoreError::InvalidKeywordSet {
                name: kind.to_string(),
                reason: "no keywords".into(),
            });
        }
        Ok(KeywordSet { kind, keywords })
    }

    pub fn parse(kind: KeywordKind, source: &str) -> Result<Self> {
        let lines = source
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        KeywordSet::new(kind, lines)
    }

    pub fn kind(&self) -> KeywordKind {
        self.kind
    }

    pub fn keywords(&self) -> &[String] {
        &self.keywords
    }

    pub fn contains(&self, keyword: &str) -> bool {
        let k = normalize(keyword);
        self.keywords.contains(&k)
    }

    /// Distinct keywords of this set present in `text`, in set order.
    pub fn hits(&self, text: &str) -> Vec<&str> {
        let norm = normalize(text);
        self.keywords
            .iter()
            .filter(|k| contains_keyword(&norm, k))
            .map(String::as_str)
            .collect()
    }

    /// Number of distinct keywords of this set present in `text`.
    pub fn count_hits(&self, text: &str) -> usize {
        let norm = normalize(text);
        self.keywords
            .iter()
            .filter(|k| contains_keyword(&norm, k))
            .count()
    }
}

/// The full keyword configuration used to score a transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lexicon {
    pub base: KeywordSet,
    pub valid: KeywordSet,
    pub frameworks: BTreeMap<School, KeywordSet>,
}

const DEFAULT_BASE: &str = include_str!("../data/keywords/base.txt");
const DEFAULT_VALID: &str = include_str!("../data/keywords/valid.txt");
const DEFAULT_FRAMEWORKS: [(School, &str); 5] = [
    (School::Deontology, include_str!("../data/keywords/deontology.txt")),
    (School::Utilitarianism, include_str!("../data/keywords/utilitarianism.txt")),
    (School::VirtueAncient, include_str!("../data/keywords/virtue_ancient.txt")),
    (School::VirtueChristian, include_str!("../data/keywords/virtue_christian.txt")),
    (School::NaturalLaw, include_str!("../data/keywords/natural_law.txt")),
];

impl Lexicon {
    /// Build a lexicon, checking that every base keyword is also valid.
    pub fn new(
        base: KeywordSet,
        valid: KeywordSet,
        frameworks: BTreeMap<School, KeywordSet>,
    ) -> Result<Self> {
        if let Some(missing) = base.keywords().iter().find(|k| !valid.contains(k)) {
            return Err(CoreError::InvalidKeywordSet {
                name: "VALID".into(),
                reason: format!("base keyword `{missing}` is not a valid keyword"),
            });
        }
        Ok(Lexicon {
            base,
            valid,
            frameworks,
        })
    }

    /// The lexicon shipped with the crate.
    pub fn defaults() -> Self {
        let frameworks = DEFAULT_FRAMEWORKS
            .iter()
            .map(|(s, src)| (*s, src.to_string()))
            .collect();
        Self::from_sources(DEFAULT_BASE, DEFAULT_VALID, frameworks)
            .expect("shipped keyword lists are valid")
    }

    /// Load `base.txt`, `valid.txt` and `<school>.txt` files from a directory.
    /// Framework files that do not exist are skipped.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let read = |name: &str| {
            let path = dir.join(name);
            std::fs::read_to_string(&path).map_err(|source| CoreError::Io { path, source })
        };
        let base = read("base.txt")?;
        let valid = read("valid.txt")?;
        let mut frameworks = BTreeMap::new();
        for school in School::DOCTRINAL {
            let path = dir.join(format!("{}.txt", school.file_stem()));
            if path.exists() {
                frameworks.insert(school, read(&format!("{}.txt", school.file_stem()))?);
            }
        }
        Self::from_sources(&base, &valid, frameworks)
    }

    fn from_sources(base: &str, valid: &str, frameworks: BTreeMap<School, String>) -> Result<Self> {
        let base = KeywordSet::parse(KeywordKind::Base, base)?;
        let frameworks = frameworks
            .into_iter()
            .map(|(s, src)| Ok((s, KeywordSet::parse(KeywordKind::Framework(s), &src)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let general = KeywordSet::parse(KeywordKind::Valid, valid)?;
        let union = base
            .keywords()
            .iter()
            .chain(general.keywords())
            .chain(frameworks.values().flat_map(|f| f.keywords()));
        let valid = KeywordSet::new(KeywordKind::Valid, union)?;
        Lexicon::new(base, valid, frameworks)
    }

    pub fn framework(&self, school: School) -> Result<&KeywordSet> {
        self.frameworks
            .get(&school)
            .ok_or(CoreError::MissingFramework(school))
    }

    /// Hex SHA-256 over the canonical rendering of every set, so reports can
    /// name the exact lexicon used.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        let mut feed = |label: String, set: &KeywordSet| {
            h.update(label.as_bytes());
            h.update(b"\n");
            for k in set.keywords() {
                h.update(k.as_bytes());
                h.update(b"\n");
            }
        };
        feed("BASE".into(), &self.base);
        feed("VALID".into(), &self.valid);
        for (school, set) in &self.frameworks {
            feed(format!("FRAMEWORK({school})"), set);
        }
        hex::encode(h.finalize())
    }
}

/// Distinct hits of `set` in `text`.
pub fn count_hits(text: &str, set: &KeywordSet) -> usize {
    set.count_hits(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> KeywordSet {
        KeywordSet::new(KeywordKind::Base, ["trolley", "lever", "five", "one", "death"]).unwrap()
    }

    #[test]
    fn counts_distinct_keywords() {
        assert_eq!(count_hits("pull the lever to save five", &base()), 2);
        assert_eq!(count_hits("", &base()), 0);
        assert_eq!(count_hits("lever lever lever lever lever", &base()), 1);
        assert_eq!(count_hits("Someone must decide", &base()), 0);
    }

    #[test]
    fn parse_skips_comments_and_blanks() {
        let set = KeywordSet::parse(KeywordKind::Base, "# header\n\nTrolley  # inline\n lever\ntrolley\n")
            .unwrap();
        assert_eq!(set.keywords(), ["trolley", "lever"]);
    }

    #[test]
    fn empty_set_is_rejected() {
        assert!(KeywordSet::parse(KeywordKind::Valid, "# nothing\n").is_err());
    }

    #[test]
    fn base_must_be_valid() {
        let valid = KeywordSet::new(KeywordKind::Valid, ["trolley"]).unwrap();
        assert!(Lexicon::new(base(), valid, BTreeMap::new()).is_err());
    }

    #[test]
    fn defaults_are_consistent() {
        let lex = Lexicon::defaults();
        assert!(lex.base.keywords().iter().all(|k| lex.valid.contains(k)));
        for school in School::DOCTRINAL {
            let fw = lex.framework(school).unwrap();
            assert!(fw.keywords().len() >= 10);
            assert!(fw.keywords().iter().all(|k| lex.valid.contains(k)));
        }
        assert!(lex.base.contains("trolley") && lex.base.contains("death"));
        assert!(lex.framework(School::Deontology).unwrap().contains("categorical imperative"));
        assert!((60..=90).contains(&lex.valid.keywords().len()));
        assert!(matches!(
            lex.framework(School::Neutral),
            Err(CoreError::MissingFramework(School::Neutral))
        ));
    }

    #[test]
    fn hash_is_stable_and_content_sensitive() {
        let a = Lexicon::defaults();
        assert_eq!(a.content_hash(), Lexicon::defaults().content_hash());
        let mut b = a.clone();
        b.base = KeywordSet::new(KeywordKind::Base, ["trolley"]).unwrap();
        assert_ne!(a.content_hash(), b.content_hash());
    }
}
