use hde_core::text::{contains_phrase, normalize};
use serde::{Deserialize, Serialize};

use crate::error::{IdentityError, Result};
use crate::graph::{MatchMode, NegativeConstraint};

/// Default working-memory capacity in entries.
pub const DEFAULT_CAPACITY: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MemorySource {
    Transcript,
    RetrievedFact,
    TomHint,
    Moderator,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryEntry {
    source: MemorySource,
    text: String,
    origin_ref: Option<String>,
    /// Core entries are never evicted.
    #[serde(default)]
    core: bool,
}

impl MemoryEntry {
    pub fn new(source: MemorySource, text: impl Into<String>, origin_ref: Option<String>) -> Result<Self> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(IdentityError::EmptyEntry);
        }
        Ok(MemoryEntry {
            source,
            text,
            origin_ref,
            core: false,
        })
    }

    /// A retrieved fact from the given chunk.
    pub fn retrieved(text: impl Into<String>, chunk_id: impl Into<String>) -> Result<Self> {
        MemoryEntry::new(MemorySource::RetrievedFact, text, Some(chunk_id.into()))
    }

    /// Mark the entry as core (never evicted).
    pub fn pinned(mut self) -> Self {
        self.core = true;
        self
    }

    pub fn source(&self) -> MemorySource {
        self.source
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn origin_ref(&self) -> Option<&str> {
        self.origin_ref.as_deref()
    }

    pub fn is_core(&self) -> bool {
        self.core
    }
}

/// Bounded, ordered agent memory. Over capacity, the oldest non-core entry
/// is evicted first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkingMemory {
    entries: Vec<MemoryEntry>,
    capacity: usize,
}

impl Default for WorkingMemory {
    fn default() -> Self {
        WorkingMemory {
            entries: Vec::new(),
            capacity: DEFAULT_CAPACITY,
        }
    }
}

impl WorkingMemory {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(IdentityError::ZeroCapacity);
        }
        Ok(WorkingMemory {
            entries: Vec::new(),
            capacity,
        })
    }

    /// Build from existing entries, evicting as needed. Fails if the core
    /// entries alone exceed the capacity.
    pub fn from_entries(capacity: usize, entries: Vec<MemoryEntry>) -> Result<Self> {
        let mut wm = WorkingMemory::new(capacity)?;
        let core = entries.iter().filter(|e| e.core).count();
        if core > capacity {
            return Err(IdentityError::CoreOverflow { core, capacity });
        }
        wm.entries = entries;
        wm.evict();
        Ok(wm)
    }

    pub fn entries(&self) -> &[MemoryEntry] {
        &self.entries
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Append one entry, then evict. A core entry that would overflow the
    /// capacity with core entries is rejected.
    pub fn push(&mut self, entry: MemoryEntry) -> Result<()> {
        if entry.core {
            let core = self.entries.iter().filter(|e| e.core).count() + 1;
            if core > self.capacity {
                return Err(IdentityError::CoreOverflow {
                    core,
                    capacity: self.capacity,
                });
            }
        }
        self.entries.push(entry);
        self.evict();
        Ok(())
    }

    /// Entries of one source, in order.
    pub fn by_source(&self, source: MemorySource) -> impl Iterator<Item = &MemoryEntry> {
        self.entries.iter().filter(move |e| e.source == source)
    }

    fn evict(&mut self) {
        let mut excess = self.entries.len().saturating_sub(self.capacity);
        if excess == 0 {
            return;
        }
        self.entries.retain(|e| {
            if excess > 0 && !e.core {
                excess -= 1;
                false
            } else {
                true
            }
        });
    }
}

/// Whether a fact matches a constraint: its patterns are looked up in the
/// case- and whitespace-normalized fact text, any one sufficing under
/// `AnyPhrase` and all being required under `AllPhrases`.
pub fn violates(fact: &MemoryEntry, constraint: &NegativeConstraint) -> bool {
    let text = normalize(fact.text());
    let mut hits = constraint.patterns().iter().map(|p| contains_phrase(&text, p));
    match constraint.match_mode() {
        MatchMode::AnyPhrase => hits.any(|h| h),
        MatchMode::AllPhrases => hits.all(|h| h),
    }
}

/// Append the retrieved facts that violate no constraint to a copy of `wm`,
/// keeping their order, then apply capacity eviction.
pub fn filter_and_merge(
    wm: &WorkingMemory,
    retrieved: &[MemoryEntry],
    constraints: &[NegativeConstraint],
) -> WorkingMemory {
    debug_assert!(retrieved.iter().all(|e| e.source == MemorySource::RetrievedFact));
    let mut out = wm.clone();
    out.entries.extend(
        retrieved
            .iter()
            .filter(|f| !constraints.iter().any(|n| violates(f, n)))
            .cloned(),
    );
    out.evict();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fact(text: &str) -> MemoryEntry {
        MemoryEntry::retrieved(text, format!("c:{text}")).unwrap()
    }

    fn any_of(patterns: &[&str]) -> NegativeConstraint {
        NegativeConstraint::new("n", "REJECT", patterns, MatchMode::AnyPhrase).unwrap()
    }

    #[test]
    fn violates_by_phrase() {
        let c = any_of(&["calculation of utility"]);
        assert!(violates(&fact("morality is fundamentally a calculation of utility"), &c));
        assert!(!violates(&fact("duty is prior to consequence"), &c));
    }

    #[test]
    fn violates_ignores_case_and_spacing() {
        let c = any_of(&["calculation of utility"]);
        assert!(violates(&fact("A CALCULATION   of\n utility"), &c));
    }

    #[test]
    fn all_phrases_needs_every_pattern() {
        let c = NegativeConstraint::new("n", "REJECT", ["pleasure", "highest good"], MatchMode::AllPhrases).unwrap();
        assert!(!violates(&fact("pleasure is pleasant"), &c));
        assert!(violates(&fact("pleasure is the highest good"), &c));
    }

    #[test]
    fn empty_fact_is_rejected_before_matching() {
        assert!(matches!(MemoryEntry::retrieved("", "c0"), Err(IdentityError::EmptyEntry)));
    }

    #[test]
    fn filter_drops_only_violating_facts() {
        let wm = WorkingMemory::new(10).unwrap();
        let f1 = fact("all is a calculation of utility");
        let f2 = fact("act only on a universalizable maxim");
        let out = filter_and_merge(&wm, &[f1, f2.clone()], &[any_of(&["calculation of utility"])]);
        assert_eq!(out.entries(), [f2]);
        assert!(wm.is_empty());
    }

    #[test]
    fn no_constraints_appends_everything() {
        let wm = WorkingMemory::from_entries(10, vec![fact("old")]).unwrap();
        let out = filter_and_merge(&wm, &[fact("a"), fact("b")], &[]);
        let texts: Vec<_> = out.entries().iter().map(MemoryEntry::text).collect();
        assert_eq!(texts, ["old", "a", "b"]);
    }

    #[test]
    fn empty_retrieval_is_identity() {
        let wm = WorkingMemory::from_entries(3, vec![fact("x"), fact("y")]).unwrap();
        assert_eq!(filter_and_merge(&wm, &[], &[any_of(&["x"])]), wm);
    }

    #[test]
    fn eviction_is_oldest_first_and_spares_core() {
        let core = MemoryEntry::new(MemorySource::Transcript, "team position", None).unwrap().pinned();
        let wm = WorkingMemory::from_entries(3, vec![core.clone(), fact("a"), fact("b")]).unwrap();
        let out = filter_and_merge(&wm, &[fact("c"), fact("d")], &[]);
        let texts: Vec<_> = out.entries().iter().map(MemoryEntry::text).collect();
        assert_eq!(texts, ["team position", "c", "d"]);
    }

    #[test]
    fn core_overflow_is_rejected() {
        let core = || MemoryEntry::new(MemorySource::Transcript, "p", None).unwrap().pinned();
        assert!(WorkingMemory::from_entries(1, vec![core(), core()]).is_err());
        let mut wm = WorkingMemory::new(1).unwrap();
        wm.push(core()).unwrap();
        assert!(wm.push(core()).is_err());
        assert!(WorkingMemory::new(0).is_err());
    }

    const ALPHABET: [&str; 8] = ["duty", "utility", "pleasure", "virtue", "law", "grace", "good will", "the many"];

    fn arb_text() -> impl Strategy<Value = String> {
        prop::collection::vec(prop::sample::select(ALPHABET.to_vec()), 1..4).prop_map(|w| w.join(" "))
    }

    fn arb_constraint() -> impl Strategy<Value = NegativeConstraint> {
        (
            prop::collection::vec(prop::sample::select(ALPHABET.to_vec()), 1..3),
            any::<bool>(),
        )
            .prop_map(|(p, all)| {
                let mode = if all { MatchMode::AllPhrases } else { MatchMode::AnyPhrase };
                NegativeConstraint::new("n", "REJECT", p, mode).unwrap()
            })
    }

    proptest! {
        #[test]
        fn adding_a_constraint_never_admits_more(
            facts in prop::collection::vec(arb_text(), 0..8),
            cs in prop::collection::vec(arb_constraint(), 0..4),
            extra in arb_constraint(),
        ) {
            let wm = WorkingMemory::new(64).unwrap();
            let facts: Vec<_> = facts.iter().map(|t| fact(t)).collect();
            let before = filter_and_merge(&wm, &facts, &cs).len();
            let mut more = cs.clone();
            more.push(extra);
            prop_assert!(filter_and_merge(&wm, &facts, &more).len() <= before);
        }

        #[test]
        fn violates_is_case_and_space_invariant(text in arb_text(), c in arb_constraint()) {
            let shouted = text.to_uppercase().replace(' ', "  \t ");
            prop_assert_eq!(violates(&fact(&text), &c), violates(&fact(&shouted), &c));
        }
    }
}
