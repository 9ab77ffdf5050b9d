use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use hde_backend::{assemble_prompt, AuditLog, AuditRecord, Backend, GenerationRequest};
use hde_core::{Phase, Roster, School, Speaker, Turn};
use hde_identity::{filter_and_merge, violates, IdentityGraph, MemoryEntry, MemorySource, WorkingMemory};
use hde_retrieval::{build_query, RetrievalIndex};
use hde_tom::select_hints;
use thiserror::Error;

use crate::cast::Cast;
use crate::config::{Modules, RunConfig};
use crate::error::{OrchestratorError, Result};
use crate::state::DebateState;

/// Stage names recorded in the audit log.
pub mod stage {
    pub const RETRIEVE: &str = "retrieve";
    pub const FILTER_AND_MERGE: &str = "filter_and_merge";
    pub const SELECT_HINTS: &str = "select_hints";
    pub const ASSEMBLE_PROMPT: &str = "assemble_prompt";
    pub const GENERATE: &str = "generate";
}

/// What an agent is answering, if anyone.
struct Opponent {
    text: String,
    school: Option<School>,
}

/// Runs the phases of one debate. Holds each agent's working memory
/// between turns.
pub struct Engine<'a> {
    config: &'a RunConfig,
    cast: &'a Cast,
    backend: &'a dyn Backend,
    audit: &'a AuditLog,
    modules: Modules,
    cycle: Vec<String>,
    memory: BTreeMap<String, WorkingMemory>,
}

impl<'a> Engine<'a> {
    pub fn new(config: &'a RunConfig, cast: &'a Cast, backend: &'a dyn Backend, audit: &'a AuditLog) -> Result<Self> {
        config.validate()?;
        let memory = cast
            .participants
            .keys()
            .map(|a| Ok((a.clone(), WorkingMemory::new(config.memory_capacity)?)))
            .collect::<Result<_>>()?;
        Ok(Engine {
            config,
            cast,
            backend,
            audit,
            modules: config.modules(),
            cycle: config.speaker_cycle(),
            memory,
        })
    }

    pub fn working_memory(&self, agent_id: &str) -> Option<&WorkingMemory> {
        self.memory.get(agent_id)
    }

    fn solo(&self) -> bool {
        self.config.effective_solo().is_some()
    }

    /// Phase 1: every agent of every team makes a statement, then a
    /// synthesis, reading only its own team's exchange.
    pub fn run_deliberation(&mut self, state: &mut DebateState) -> Result<()> {
        state.expect_phase(Phase::Deliberation)?;
        if !self.solo() {
            for team in state.teams.clone() {
                let scope_team: Vec<String> = team
                    .agent_ids
                    .iter()
                    .flat_map(|a| self.cast.participant(a).corpora.clone())
                    .collect();
                for round in 1..=self.config.deliberation_rounds {
                    for agent in &team.agent_ids {
                        let ask = if round == 1 {
                            "State your position on the dilemma to your teammates."
                        } else {
                            "Synthesize a common position for your team from the shared log."
                        };
                        let instruction = format!("[deliberation r{round} {agent}] {ask}");
                        let scope = if self.config.share_team_corpora {
                            scope_team.clone()
                        } else {
                            self.cast.participant(agent).corpora.clone()
                        };
                        let context: Vec<Turn> = state
                            .transcript
                            .iter()
                            .filter(|t| t.phase == Phase::Deliberation && t.team_id.as_deref() == Some(team.team_id.as_str()))
                            .cloned()
                            .collect();
                        let window = context.len().max(1);
                        let (text, elapsed) =
                            self.agent_speaks(state, agent, &instruction, None, &scope, &context, window)?;
                        let entry = MemoryEntry::new(MemorySource::Transcript, text.clone(), Some(agent.clone()))?;
                        state.shared_memory_log.entry(team.team_id.clone()).or_default().push(entry);
                        self.record_agent(state, agent, Phase::Deliberation, None, text, elapsed);
                    }
                }
            }
        }
        state.advance();
        Ok(())
    }

    /// Phase 2: the moderator asks each agent one question and the agent answers.
    pub fn run_interrogation(&mut self, state: &mut DebateState) -> Result<()> {
        state.expect_phase(Phase::Interrogation)?;
        if !self.solo() {
            for agent in self.cycle.clone() {
                let name = self.cast.participant(&agent).identity.display_name().to_string();
                let context = self.public_context(state, &agent);
                let wm = WorkingMemory::new(self.config.memory_capacity)?;
                let mut request =
                    assemble_prompt(&self.cast.moderator, &wm, &[], &state.dilemma, &context, self.config.window);
                self.finish_request(
                    &mut request,
                    format!("[question {agent}] Ask {name} one elenctic question that exposes a gap in their position."),
                );
                let result = self.generate(state, Phase::Interrogation, &request)?;
                let text = format!("Question for {name}: {}", result.text);
                let mut record = AuditRecord::new(None, request, result.clone());
                record.stages = vec![stage::ASSEMBLE_PROMPT.into(), stage::GENERATE.into()];
                self.audit.push(record);
                state.record(moderator_turn(Phase::Interrogation, None, text), result.latency_ms);

                let instruction = format!("[answer {agent}] Answer the moderator's question.");
                let scope = self.cast.participant(&agent).corpora.clone();
                let context = self.public_context(state, &agent);
                let (answer, elapsed) =
                    self.agent_speaks(state, &agent, &instruction, None, &scope, &context, self.config.window)?;
                self.record_agent(state, &agent, Phase::Interrogation, None, answer, elapsed);
            }
        }
        state.advance();
        Ok(())
    }

    /// Phase 3: `debate_length` speaker turns in cycle order, with scheduled
    /// perturbations injected right after their speaker turn.
    pub fn run_debate(&mut self, state: &mut DebateState) -> Result<()> {
        state.expect_phase(Phase::Debate)?;
        for slot in 1..=self.config.debate_length {
            let agent = self.cycle[(slot - 1) % self.cycle.len()].clone();
            let instruction = format!(
                "[debate t{slot:02} {agent}] Make your next argument, answering the other side and staying within your own framework."
            );
            let opponent = self.last_opponent_turn(state, &agent);
            let scope = self.cast.participant(&agent).corpora.clone();
            let context = self.public_context(state, &agent);
            let (text, elapsed) =
                self.agent_speaks(state, &agent, &instruction, opponent, &scope, &context, self.config.window)?;
            state.debate_turn_index = slot;
            self.record_agent(state, &agent, Phase::Debate, Some(slot), text, elapsed);
            if let Some(p) = state.perturbation_schedule.get(&slot).cloned() {
                state.record(moderator_turn(Phase::Debate, Some(slot), p.text), 0);
            }
        }
        state.advance();
        Ok(())
    }

    /// All three phases in order.
    pub fn run(&mut self, state: &mut DebateState) -> Result<()> {
        self.run_deliberation(state)?;
        self.run_interrogation(state)?;
        self.run_debate(state)
    }

    fn record_agent(&self, state: &mut DebateState, agent: &str, phase: Phase, slot: Option<usize>, text: String, elapsed: u64) {
        let turn = Turn {
            turn_index: 0,
            phase,
            debate_turn_index: slot,
            speaker: Speaker::Agent(agent.to_string()),
            team_id: self.cast.participant(agent).team_id.clone(),
            text,
            ts_ms: 0,
            annotations: Default::default(),
        };
        state.record(turn, elapsed);
    }

    /// Turns an agent may see: everything except other teams' deliberation.
    fn public_context(&self, state: &DebateState, agent: &str) -> Vec<Turn> {
        let team = self.cast.participant(agent).team_id.as_deref();
        state
            .transcript
            .iter()
            .filter(|t| t.phase != Phase::Deliberation || t.team_id.as_deref() == team)
            .cloned()
            .collect()
    }

    fn last_opponent_turn(&self, state: &DebateState, agent: &str) -> Option<Opponent> {
        let team = self.cast.participant(agent).team_id.clone();
        state
            .transcript
            .iter()
            .rev()
            .filter(|t| t.is_debate_speaker_turn())
            .find(|t| t.speaker.agent_id() != Some(agent) && (team.is_none() || t.team_id != team))
            .map(|t| Opponent {
                text: t.text.clone(),
                school: t
                    .speaker
                    .agent_id()
                    .and_then(|a| self.cast.participants.get(a))
                    .map(|p| p.identity.school()),
            })
    }

    fn prompt_identity(&self, agent: &str) -> IdentityGraph {
        let identity = &self.cast.participant(agent).identity;
        if !self.modules.persona {
            IdentityGraph::empty(agent, identity.school()).with_display_name("a helpful assistant")
        } else if !self.modules.id_rag {
            IdentityGraph::new(agent, identity.school(), identity.persona_summary(), vec![], vec![], vec![])
                .expect("persona-only identity is valid")
                .with_display_name(identity.display_name())
        } else {
            identity.clone()
        }
    }

    fn finish_request(&self, request: &mut GenerationRequest, instruction: String) {
        request.instruction = instruction;
        request.temperature = self.config.temperature;
        request.max_output_tokens = self.config.max_output_tokens;
    }

    fn generate(&self, state: &DebateState, phase: Phase, request: &GenerationRequest) -> Result<hde_backend::GenerationResult> {
        let abort = |e: OrchestratorError| OrchestratorError::Aborted {
            phase,
            turn_index: state.turn_index,
            source: Box::new(e),
        };
        let result = self.backend.generate(request).map_err(|e| abort(e.into()))?;
        if result.text.trim().is_empty() {
            return Err(abort(hde_backend::BackendError::EmptyResponse.into()));
        }
        Ok(result)
    }

    /// One agent turn: retrieve, filter into working memory, pick hints,
    /// assemble the prompt and generate. Returns the text and its latency.
    #[allow(clippy::too_many_arguments)]
    fn agent_speaks(
        &mut self,
        state: &DebateState,
        agent: &str,
        instruction: &str,
        opponent: Option<Opponent>,
        own_scope: &[String],
        context: &[Turn],
        window: usize,
    ) -> Result<(String, u64)> {
        let participant = self.cast.participant(agent);
        let mut stages = Vec::new();
        let mut retrieved_ids = Vec::new();
        let mut dropped = Vec::new();

        let mut facts = Vec::new();
        if let (true, Some(index)) = (self.modules.retrieval, &self.cast.index) {
            let scope: Vec<String> = if self.modules.id_rag && !self.solo() {
                own_scope.to_vec()
            } else {
                index.corpora().iter().cloned().collect()
            };
            if !scope.is_empty() {
                let query = build_query(&state.dilemma, opponent.as_ref().map(|o| o.text.as_str()));
                let hits = index.retrieve(&query, self.config.k, &scope).map_err(|e| OrchestratorError::Aborted {
                    phase: state.phase,
                    turn_index: state.turn_index,
                    source: Box::new(e.into()),
                })?;
                for hit in hits {
                    retrieved_ids.push(hit.chunk.chunk_id.clone());
                    facts.push(MemoryEntry::retrieved(hit.chunk.text.clone(), hit.chunk.chunk_id.clone())?);
                }
                stages.push(stage::RETRIEVE.to_string());
            }
        }

        let wm = self.memory.get_mut(agent).expect("every participant has memory");
        if self.modules.id_rag {
            let constraints = participant.identity.constraints();
            dropped = facts
                .iter()
                .filter(|f| constraints.iter().any(|n| violates(f, n)))
                .filter_map(|f| f.origin_ref().map(str::to_string))
                .collect();
            *wm = filter_and_merge(wm, &facts, constraints);
            stages.push(stage::FILTER_AND_MERGE.to_string());
        } else {
            for fact in facts {
                wm.push(fact)?;
            }
        }

        let hints = match (&opponent, self.modules.tom) {
            (Some(Opponent { text, school: Some(school) }), true) => {
                stages.push(stage::SELECT_HINTS.to_string());
                select_hints(&participant.weakness, text, *school, self.config.max_hints)
            }
            _ => Vec::new(),
        };

        let identity = self.prompt_identity(agent);
        let wm = &self.memory[agent];
        let mut request = assemble_prompt(&identity, wm, &hints, &state.dilemma, context, window);
        stages.push(stage::ASSEMBLE_PROMPT.to_string());
        self.finish_request(&mut request, instruction.to_string());
        let result = self.generate(state, state.phase, &request)?;
        stages.push(stage::GENERATE.to_string());

        let text = result.text.clone();
        let latency = result.latency_ms;
        let mut record = AuditRecord::new(Some(agent), request, result);
        record.stages = stages;
        record.retrieved = retrieved_ids;
        record.dropped = dropped;
        record.hints = hints.iter().map(|h| h.counter_hint.clone()).collect();
        self.audit.push(record);
        Ok((text, latency))
    }
}

fn moderator_turn(phase: Phase, slot: Option<usize>, text: String) -> Turn {
    Turn {
        turn_index: 0,
        phase,
        debate_turn_index: slot,
        speaker: Speaker::Moderator,
        team_id: None,
        text,
        ts_ms: 0,
        annotations: Default::default(),
    }
}

/// A finished run.
#[derive(Debug)]
pub struct RunOutcome {
    pub state: DebateState,
    pub audit: AuditLog,
    pub roster: Roster,
}

/// A run that stopped early, with whatever it produced.
#[derive(Debug, Error)]
#[error("{error}")]
pub struct RunFailure {
    #[source]
    pub error: OrchestratorError,
    pub state: Option<Box<DebateState>>,
    pub audit: AuditLog,
}

impl From<OrchestratorError> for RunFailure {
    fn from(error: OrchestratorError) -> Self {
        RunFailure {
            error,
            state: None,
            audit: AuditLog::new(),
        }
    }
}

/// Validate `config`, load its cast and run all phases with `backend`.
///
/// If `transcript_out` is given the transcript is written there as JSONL,
/// including when the run aborts part-way.
pub fn run_full_pipeline(
    config: &RunConfig,
    backend: &dyn Backend,
    index: Option<Arc<RetrievalIndex>>,
    transcript_out: Option<&Path>,
) -> std::result::Result<RunOutcome, RunFailure> {
    config.validate()?;
    let cast = Cast::load(config, index)?;
    let mut state = DebateState::new(config)?;
    let audit = AuditLog::new();
    let result = Engine::new(config, &cast, backend, &audit).and_then(|mut engine| engine.run(&mut state));
    if let Some(path) = transcript_out {
        write_transcript(&state.transcript, path)?;
    }
    match result {
        Ok(()) => Ok(RunOutcome {
            state,
            audit,
            roster: cast.roster(),
        }),
        Err(error) => Err(RunFailure {
            error,
            state: Some(Box::new(state)),
            audit,
        }),
    }
}

pub fn write_transcript(turns: &[Turn], path: &Path) -> Result<()> {
    let io = |source| OrchestratorError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, hde_core::transcript::to_jsonl_string(turns)).map_err(io)
}
