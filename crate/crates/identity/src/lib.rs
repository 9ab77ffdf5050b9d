//! Agent identity: belief graphs with certainty-weighted nodes, negative
//! doctrinal constraints, and the working memory that retrieved facts must
//! pass through.
//!
//! Retrieved facts enter working memory only if no negative constraint of
//! the agent matches them:
//!
//! ```text
//! WM' = WM ⊕ (K \ { f ∈ K | ∃ n ∈ N : f ⊨ n })
//! ```
//!
//! where `f ⊨ n` is lexical phrase matching ([`violates`]) and `⊕` is an
//! ordered append followed by oldest-first eviction of non-core entries.

mod error;
mod graph;
mod memory;

pub use error::{IdentityError, Result};
pub use graph::{
    load_identity, BeliefNode, Edge, IdentityGraph, IdentityStats, MatchMode, NegativeConstraint,
    NodeKind,
};
pub use memory::{
    filter_and_merge, violates, MemoryEntry, MemorySource, WorkingMemory, DEFAULT_CAPACITY,
};
