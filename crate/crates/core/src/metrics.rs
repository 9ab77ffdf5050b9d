//! Turn-level evaluation metrics over debate transcripts.
//!
//! All functions are pure over `(transcript, keyword sets)`. Only agent turns
//! of the inter-team debate phase are scored; moderator injections never
//! count as observation turns.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::keywords::{KeywordSet, Lexicon};
use crate::scalar::{self, Real};
use crate::school::School;
use crate::transcript::Turn;

/// Speaker turns observed after a perturbation.
pub const OBSERVATION_TURNS: usize = 6;
/// Base keywords a turn needs to count as recovered.
pub const RECOVERY_HITS: usize = 3;
/// Valid keywords a turn needs to count as coherent.
pub const COHERENCE_HITS: usize = 3;
/// Own-framework keywords a turn needs for doctrinal accuracy.
pub const DOCTRINAL_HITS: usize = 2;
/// Default opponent-framework keywords a turn needs to count as cross-referencing.
pub const CROSS_REFERENCE_HITS: usize = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub school: School,
    pub team_id: Option<String>,
}

/// Agent id → school and team, for every agent that may speak.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roster {
    pub agents: BTreeMap<String, RosterEntry>,
}

impl Roster {
    pub fn insert(&mut self, agent_id: impl Into<String>, school: School, team_id: Option<String>) {
        self.agents
            .insert(agent_id.into(), RosterEntry { school, team_id });
    }

    fn entry(&self, agent_id: &str) -> Result<&RosterEntry> {
        self.agents
            .get(agent_id)
            .ok_or_else(|| CoreError::UnknownSpeaker(agent_id.to_string()))
    }

    /// Schools of agents on a different team. Team-less agents have no opponents.
    pub fn opposing_schools(&self, agent_id: &str) -> Result<Vec<School>> {
        let me = self.entry(agent_id)?;
        let Some(team) = &me.team_id else {
            return Ok(Vec::new());
        };
        let mut schools: Vec<School> = self
            .agents
            .values()
            .filter(|e| e.team_id.as_ref().is_some_and(|t| t != team))
            .map(|e| e.school)
            .collect();
        schools.sort();
        schools.dedup();
        Ok(schools)
    }
}

/// Which debate turns DA and CR are computed over.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricWindow {
    /// Every debate-phase speaker turn.
    #[default]
    All,
    /// Only speaker turns after the injection turn.
    Post,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MetricOptions {
    pub window: MetricWindow,
    pub cross_reference_hits: usize,
}

impl Default for MetricOptions {
    fn default() -> Self {
        MetricOptions {
            window: MetricWindow::All,
            cross_reference_hits: CROSS_REFERENCE_HITS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SysAr<T> {
    pub value: T,
    pub recovery_time: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resilience<T> {
    pub injection_turn: usize,
    /// `debate_turn_index` of each observed speaker turn.
    pub observation_turns: Vec<usize>,
    pub sys_ar: T,
    pub recovery_time: Option<usize>,
    pub ar_co: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentScores<T> {
    /// `None` for agents with no scored turns.
    pub per_agent: BTreeMap<String, Option<T>>,
    pub mean: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport<T> {
    pub resilience: Option<Resilience<T>>,
    pub doctrinal_accuracy: AgentScores<T>,
    pub cross_referencing: AgentScores<T>,
    pub window: MetricWindow,
}

fn speaker_turns(transcript: &[Turn]) -> impl Iterator<Item = &Turn> {
    transcript.iter().filter(|t| t.is_debate_speaker_turn())
}

/// The (at most six) debate speaker turns following `injection_turn`.
pub fn observation_window(transcript: &[Turn], injection_turn: usize) -> Result<Vec<&Turn>> {
    let window: Vec<&Turn> = speaker_turns(transcript)
        .filter(|t| t.debate_turn_index.is_some_and(|d| d > injection_turn))
        .take(OBSERVATION_TURNS)
        .collect();
    if window.is_empty() {
        return Err(CoreError::EmptyWindow { injection_turn });
    }
    Ok(window)
}

/// System argumentative resilience: the reciprocal of the 1-based position of
/// the first recovered turn in the observation window, or zero when none of
/// the window recovers.
pub fn sys_ar<T: Real>(transcript: &[Turn], base: &KeywordSet, injection_turn: usize) -> Result<SysAr<T>> {
    let window = observation_window(transcript, injection_turn)?;
    let recovery_time = window
        .iter()
        .position(|t| base.count_hits(&t.text) >= RECOVERY_HITS)
        .map(|p| p + 1);
    let value = match recovery_time {
        Some(rt) => T::one() / scalar::from_count(rt),
        None => T::zero(),
    };
    Ok(SysAr {
        value,
        recovery_time,
    })
}

/// Argumentative coherence: the fraction of observed turns with at least
/// three valid keywords.
pub fn ar_co<T: Real>(transcript: &[Turn], valid: &KeywordSet, injection_turn: usize) -> Result<T> {
    let window = observation_window(transcript, injection_turn)?;
    let coherent = window
        .iter()
        .filter(|t| valid.count_hits(&t.text) >= COHERENCE_HITS)
        .count();
    Ok(scalar::ratio(coherent, window.len()))
}

fn scored_turns(
    transcript: &[Turn],
    window: MetricWindow,
    injection_turn: Option<usize>,
) -> impl Iterator<Item = &Turn> {
    speaker_turns(transcript).filter(move |t| match (window, injection_turn) {
        (MetricWindow::Post, Some(inj)) => t.debate_turn_index.is_some_and(|d| d > inj),
        _ => true,
    })
}

/// Per-agent (qualifying, total) turn tallies, seeded with every roster agent.
fn tally<F>(
    transcript: &[Turn],
    roster: &Roster,
    window: MetricWindow,
    injection_turn: Option<usize>,
    mut qualifies: F,
) -> Result<BTreeMap<String, (usize, usize)>>
where
    F: FnMut(&str, &Turn) -> Result<bool>,
{
    let mut counts: BTreeMap<String, (usize, usize)> =
        roster.agents.keys().map(|a| (a.clone(), (0, 0))).collect();
    for turn in scored_turns(transcript, window, injection_turn) {
        let agent = turn.speaker.agent_id().expect("speaker turn");
        let hit = qualifies(agent, turn)?;
        let slot = counts
            .get_mut(agent)
            .ok_or_else(|| CoreError::UnknownSpeaker(agent.to_string()))?;
        slot.1 += 1;
        if hit {
            slot.0 += 1;
        }
    }
    Ok(counts)
}

fn per_agent<T: Real>(counts: &BTreeMap<String, (usize, usize)>) -> BTreeMap<String, Option<T>> {
    counts
        .iter()
        .map(|(a, &(hit, total))| (a.clone(), (total > 0).then(|| scalar::ratio(hit, total))))
        .collect()
}

/// Doctrinal accuracy: per agent, the fraction of its turns with at least two
/// keywords of its own school's framework; the mean is unweighted over agents
/// that spoke.
pub fn doctrinal_accuracy<T: Real>(
    transcript: &[Turn],
    lexicon: &Lexicon,
    roster: &Roster,
    window: MetricWindow,
    injection_turn: Option<usize>,
) -> Result<AgentScores<T>> {
    let counts = tally(transcript, roster, window, injection_turn, |agent, turn| {
        let school = roster.entry(agent)?.school;
        Ok(lexicon.framework(school)?.count_hits(&turn.text) >= DOCTRINAL_HITS)
    })?;
    let per_agent = per_agent::<T>(&counts);
    let mean = scalar::mean(per_agent.values().flatten().copied());
    Ok(AgentScores { per_agent, mean })
}

/// Cross-referencing: per agent, the fraction of its turns naming at least
/// `min_hits` keywords of some opposing-team school. The system value is the
/// ratio of referencing turns over all scored turns.
pub fn cross_referencing<T: Real>(
    transcript: &[Turn],
    lexicon: &Lexicon,
    roster: &Roster,
    window: MetricWindow,
    injection_turn: Option<usize>,
    min_hits: usize,
) -> Result<AgentScores<T>> {
    let counts = tally(transcript, roster, window, injection_turn, |agent, turn| {
        for school in roster.opposing_schools(agent)? {
            if lexicon.framework(school)?.count_hits(&turn.text) >= min_hits {
                return Ok(true);
            }
        }
        Ok(false)
    })?;
    let (hits, total) = counts
        .values()
        .fold((0, 0), |(h, n), &(a, b)| (h + a, n + b));
    Ok(AgentScores {
        per_agent: per_agent::<T>(&counts),
        mean: (total > 0).then(|| scalar::ratio(hits, total)),
    })
}

/// Compute every transcript metric. Resilience is present only when an
/// injection turn is given.
pub fn evaluate<T: Real>(
    transcript: &[Turn],
    lexicon: &Lexicon,
    roster: &Roster,
    injection_turn: Option<usize>,
    options: MetricOptions,
) -> Result<MetricReport<T>> {
    let resilience = match injection_turn {
        Some(inj) => {
            let observation_turns = observation_window(transcript, inj)?
                .iter()
                .filter_map(|t| t.debate_turn_index)
                .collect();
            let sar = sys_ar::<T>(transcript, &lexicon.base, inj)?;
            Some(Resilience {
                injection_turn: inj,
                observation_turns,
                sys_ar: sar.value,
                recovery_time: sar.recovery_time,
                ar_co: ar_co(transcript, &lexicon.valid, inj)?,
            })
        }
        None => None,
    };
    Ok(MetricReport {
        resilience,
        doctrinal_accuracy: doctrinal_accuracy(
            transcript,
            lexicon,
            roster,
            options.window,
            injection_turn,
        )?,
        cross_referencing: cross_referencing(
            transcript,
            lexicon,
            roster,
            options.window,
            injection_turn,
            options.cross_reference_hits,
        )?,
        window: options.window,
    })
}

/// Record keyword hits on each turn under `BASE`, `VALID` and the speaker's
/// own framework (`FRAMEWORK`).
pub fn annotate(transcript: &mut [Turn], lexicon: &Lexicon, roster: &Roster) {
    for turn in transcript.iter_mut() {
        let mut notes = BTreeMap::new();
        let own = |set: &KeywordSet| set.hits(&turn.text).into_iter().map(str::to_string).collect();
        notes.insert("BASE".to_string(), own(&lexicon.base));
        notes.insert("VALID".to_string(), own(&lexicon.valid));
        if let Some(fw) = turn
            .speaker
            .agent_id()
            .and_then(|a| roster.agents.get(a))
            .and_then(|e| lexicon.frameworks.get(&e.school))
        {
            notes.insert("FRAMEWORK".to_string(), own(fw));
        }
        turn.annotations = notes;
    }
}
