//! Shared building blocks for the heterogeneous debate engine.
//!
//! This crate carries everything the other crates agree on: the school
//! taxonomy, transcript records, lexical phrase matching, keyword lexicons,
//! and the evaluation metrics computed over finished transcripts. Numeric
//! code is generic over [`scalar::Real`]; the aliases below pin it to `f64`
//! for everyday use.

pub mod acs;
pub mod error;
pub mod keywords;
pub mod metrics;
pub mod scalar;
pub mod school;
pub mod text;
pub mod transcript;

pub use error::{CoreError, Result};
pub use keywords::{KeywordKind, KeywordSet, Lexicon};
pub use metrics::{MetricWindow, Roster, RosterEntry};
pub use scalar::Real;
pub use school::School;
pub use transcript::{Phase, Speaker, Turn};

/// Metric report over `f64`.
pub type MetricReport = metrics::MetricReport<f64>;
/// Resilience block (SysAR / ArCo) over `f64`.
pub type Resilience = metrics::Resilience<f64>;
/// Per-agent doctrinal accuracy or cross-referencing scores over `f64`.
pub type AgentScores = metrics::AgentScores<f64>;
/// Participant record over `f64`.
pub type AcsRecord = acs::AcsRecord<f64>;
/// Aggregated learning outcomes over `f64`.
pub type AcsSummary = acs::AcsSummary<f64>;
