use std::collections::BTreeMap;

use hde_core::{Phase, Turn};
use hde_identity::MemoryEntry;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{RunConfig, TeamConfig};
use crate::error::{OrchestratorError, Result};
use crate::perturbation::PerturbationSpec;

/// Everything a run has produced so far.
#[derive(Debug, Clone, Serialize)]
pub struct DebateState {
    pub phase: Phase,
    /// Turns recorded so far; the next turn gets this index.
    pub turn_index: usize,
    /// Debate-phase speaker turns completed so far.
    pub debate_turn_index: usize,
    pub transcript: Vec<Turn>,
    pub teams: Vec<TeamConfig>,
    pub dilemma: String,
    /// Perturbations keyed by the speaker turn they follow.
    pub perturbation_schedule: BTreeMap<usize, PerturbationSpec>,
    /// Deliberation statements per team.
    pub shared_memory_log: BTreeMap<String, Vec<MemoryEntry>>,
    /// Logical clock in milliseconds, advanced by each turn.
    pub clock_ms: u64,
}

impl DebateState {
    pub fn new(config: &RunConfig) -> Result<Self> {
        let mut schedule = BTreeMap::new();
        for p in &config.perturbations {
            schedule.insert(p.turn, p.spec()?);
        }
        let teams = config.effective_teams();
        Ok(DebateState {
            phase: Phase::Deliberation,
            turn_index: 0,
            debate_turn_index: 0,
            transcript: Vec::new(),
            shared_memory_log: teams.iter().map(|t| (t.team_id.clone(), Vec::new())).collect(),
            teams,
            dilemma: config.dilemma.clone(),
            perturbation_schedule: schedule,
            clock_ms: 0,
        })
    }

    pub(crate) fn expect_phase(&self, phase: Phase) -> Result<()> {
        if self.phase == phase {
            Ok(())
        } else {
            Err(OrchestratorError::WrongPhase {
                phase,
                actual: self.phase,
            })
        }
    }

    /// Move to the next phase. Phases never go back.
    pub(crate) fn advance(&mut self) {
        self.phase = self.phase.next();
    }

    pub(crate) fn record(&mut self, mut turn: Turn, elapsed_ms: u64) {
        self.clock_ms += elapsed_ms.max(1);
        turn.turn_index = self.turn_index;
        turn.ts_ms = self.clock_ms;
        self.turn_index += 1;
        self.transcript.push(turn);
    }

    /// SHA-256 of the transcript's JSONL encoding.
    pub fn transcript_hash(&self) -> String {
        transcript_hash(&self.transcript)
    }
}

pub fn transcript_hash(turns: &[Turn]) -> String {
    hex::encode(Sha256::digest(hde_core::transcript::to_jsonl_string(turns).as_bytes()))
}
