//! Heuristic opponent modelling.
//!
//! Each agent carries a static map of the weaknesses of other schools. When
//! an opponent speaks, entries aimed at that opponent's school are scored by
//! how many of their trigger phrases appear in the turn, and the best few are
//! offered to the agent as counter-argument hints. Nothing here reads or
//! changes an agent's identity.

use std::path::{Path, PathBuf};

use hde_core::text::{contains_phrase, normalize};
use hde_core::School;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hints offered per turn unless configured otherwise.
pub const DEFAULT_MAX_HINTS: usize = 2;

#[derive(Debug, Error)]
pub enum TomError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("weakness map {path} does not match the schema: {message}")]
    Schema { path: PathBuf, message: String },
    #[error("weakness entry {index} targets the owner's own school {school}")]
    OwnSchool { index: usize, school: School },
    #[error("weakness entry {index} has no trigger patterns")]
    NoTriggers { index: usize },
    #[error("weakness map has an empty owner_agent_id")]
    NoOwner,
}

pub type Result<T, E = TomError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeaknessEntry {
    pub target_school: School,
    pub weakness_text: String,
    pub trigger_patterns: Vec<String>,
    pub counter_hint: String,
}

impl WeaknessEntry {
    /// Number of distinct trigger patterns present in already-normalized text.
    pub fn score(&self, normalized_turn: &str) -> usize {
        self.trigger_patterns
            .iter()
            .filter(|p| contains_phrase(normalized_turn, p))
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeaknessMap {
    owner_agent_id: String,
    entries: Vec<WeaknessEntry>,
}

impl WeaknessMap {
    /// Validate entries against the owner's school. Trigger patterns are
    /// lowercased and whitespace-collapsed.
    pub fn new(owner_agent_id: impl Into<String>, owner_school: School, mut entries: Vec<WeaknessEntry>) -> Result<Self> {
        let owner_agent_id = owner_agent_id.into();
        if owner_agent_id.trim().is_empty() {
            return Err(TomError::NoOwner);
        }
        for (index, entry) in entries.iter_mut().enumerate() {
            if entry.target_school == owner_school {
                return Err(TomError::OwnSchool {
                    index,
                    school: owner_school,
                });
            }
            entry.trigger_patterns = entry
                .trigger_patterns
                .iter()
                .map(|p| normalize(p))
                .filter(|p| !p.is_empty())
                .collect();
            if entry.trigger_patterns.is_empty() {
                return Err(TomError::NoTriggers { index });
            }
        }
        Ok(WeaknessMap { owner_agent_id, entries })
    }

    /// A map with no entries, for agents running without opponent modelling.
    pub fn empty(owner_agent_id: impl Into<String>) -> Self {
        WeaknessMap {
            owner_agent_id: owner_agent_id.into(),
            entries: Vec::new(),
        }
    }

    pub fn from_json(source: &str, origin: &Path, owner_school: School) -> Result<Self> {
        let raw: WeaknessMap = serde_json::from_str(source).map_err(|e| TomError::Schema {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::new(raw.owner_agent_id, owner_school, raw.entries)
    }

    pub fn load(path: &Path, owner_school: School) -> Result<Self> {
        let source = std::fs::read_to_string(path).map_err(|source| TomError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&source, path, owner_school)
    }

    pub fn owner_agent_id(&self) -> &str {
        &self.owner_agent_id
    }

    pub fn entries(&self) -> &[WeaknessEntry] {
        &self.entries
    }
}

/// Entries about `opponent_school` whose triggers fire in `opponent_turn`,
/// best first. Ties keep map order; entries with no firing trigger are
/// never returned.
pub fn select_hints<'a>(
    map: &'a WeaknessMap,
    opponent_turn: &str,
    opponent_school: School,
    max_hints: usize,
) -> Vec<&'a WeaknessEntry> {
    let turn = normalize(opponent_turn);
    if turn.is_empty() {
        return Vec::new();
    }
    let mut scored: Vec<(usize, &WeaknessEntry)> = map
        .entries
        .iter()
        .filter(|e| e.target_school == opponent_school)
        .map(|e| (e.score(&turn), e))
        .filter(|(s, _)| *s >= 1)
        .collect();
    // stable sort keeps map order among equal scores
    scored.sort_by_key(|s| std::cmp::Reverse(s.0));
    scored.into_iter().take(max_hints).map(|(_, e)| e).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(target: School, triggers: &[&str], hint: &str) -> WeaknessEntry {
        WeaknessEntry {
            target_school: target,
            weakness_text: format!("weakness of {target}"),
            trigger_patterns: triggers.iter().map(|s| s.to_string()).collect(),
            counter_hint: hint.into(),
        }
    }

    fn kant_map() -> WeaknessMap {
        WeaknessMap::new(
            "kant",
            School::Deontology,
            vec![
                entry(School::Utilitarianism, &["greatest happiness"], "persons are not sums"),
                entry(School::Utilitarianism, &["sacrifice", "aggregate"], "aggregation ignores separateness"),
                entry(School::NaturalLaw, &["double effect"], "intention is opaque"),
                entry(School::Utilitarianism, &["Greatest  Happiness", "sacrifice"], "both"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn picks_entry_whose_trigger_appears() {
        let map = WeaknessMap::new(
            "kant",
            School::Deontology,
            vec![entry(School::Utilitarianism, &["greatest happiness"], "h")],
        )
        .unwrap();
        let hints = select_hints(&map, "the greatest happiness justifies the sacrifice", School::Utilitarianism, 2);
        assert_eq!(hints.len(), 1);
        assert_eq!(hints[0].counter_hint, "h");
    }

    #[test]
    fn higher_counts_win_and_ties_keep_order() {
        let map = kant_map();
        let hints = select_hints(&map, "The GREATEST happiness demands a sacrifice", School::Utilitarianism, 2);
        let got: Vec<&str> = hints.iter().map(|h| h.counter_hint.as_str()).collect();
        // "both" scores 2; the other two score 1 each and tie in map order
        assert_eq!(got, ["both", "persons are not sums"]);
        let all = select_hints(&map, "The GREATEST happiness demands a sacrifice", School::Utilitarianism, 10);
        assert_eq!(all.len(), 3);
    }

    #[test]
    fn nothing_forced() {
        let map = kant_map();
        assert!(select_hints(&map, "virtue is a mean", School::Utilitarianism, 2).is_empty());
        assert!(select_hints(&map, "greatest happiness", School::VirtueAncient, 2).is_empty());
        assert!(select_hints(&map, "greatest happiness", School::Utilitarianism, 0).is_empty());
        assert!(select_hints(&map, "   ", School::Utilitarianism, 2).is_empty());
    }

    #[test]
    fn validation() {
        let own = WeaknessMap::new("kant", School::Deontology, vec![entry(School::Deontology, &["duty"], "")]);
        assert!(matches!(own, Err(TomError::OwnSchool { index: 0, .. })));
        let bare = WeaknessMap::new("kant", School::Deontology, vec![entry(School::Utilitarianism, &[" "], "")]);
        assert!(matches!(bare, Err(TomError::NoTriggers { index: 0 })));
        assert!(matches!(WeaknessMap::new("", School::Deontology, vec![]), Err(TomError::NoOwner)));
    }

    #[test]
    fn json_round_trip() {
        let map = kant_map();
        let json = serde_json::to_string(&map).unwrap();
        assert!(json.contains("\"owner_agent_id\":\"kant\""));
        let back = WeaknessMap::from_json(&json, Path::new("x.json"), School::Deontology).unwrap();
        assert_eq!(back, map);
        let err = WeaknessMap::from_json(&json, Path::new("x.json"), School::Utilitarianism).unwrap_err();
        assert!(matches!(err, TomError::OwnSchool { .. }));
    }
}
