//! Turns and the transcript JSONL format.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Phase {
    Deliberation,
    Interrogation,
    Debate,
    Done,
}

impl Phase {
    /// The phase that follows this one; `Done` is terminal.
    pub fn next(self) -> Phase {
        match self {
            Phase::Deliberation => Phase::Interrogation,
            Phase::Interrogation => Phase::Debate,
            Phase::Debate | Phase::Done => Phase::Done,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Phase::Deliberation => "DELIBERATION",
            Phase::Interrogation => "INTERROGATION",
            Phase::Debate => "DEBATE",
            Phase::Done => "DONE",
        };
        f.write_str(s)
    }
}

pub const MODERATOR: &str = "MODERATOR";

/// Who produced a turn. Serialized as the agent id or `"MODERATOR"`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", from = "String")]
pub enum Speaker {
    Agent(String),
    Moderator,
}

impl Speaker {
    pub fn agent_id(&self) -> Option<&str> {
        match self {
            Speaker::Agent(id) => Some(id),
            Speaker::Moderator => None,
        }
    }
}

impl From<Speaker> for String {
    fn from(s: Speaker) -> String {
        match s {
            Speaker::Agent(id) => id,
            Speaker::Moderator => MODERATOR.to_string(),
        }
    }
}

impl From<String> for Speaker {
    fn from(s: String) -> Speaker {
        if s == MODERATOR {
            Speaker::Moderator
        } else {
            Speaker::Agent(s)
        }
    }
}

impl fmt::Display for Speaker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Speaker::Agent(id) => f.write_str(id),
            Speaker::Moderator => f.write_str(MODERATOR),
        }
    }
}

/// One utterance in a debate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub turn_index: usize,
    pub phase: Phase,
    pub debate_turn_index: Option<usize>,
    pub speaker: Speaker,
    pub team_id: Option<String>,
    pub text: String,
    pub ts_ms: u64,
    /// Keyword hits by lexicon name, filled in by metrics.
    #[serde(skip)]
    pub annotations: BTreeMap<String, Vec<String>>,
}

impl Turn {
    /// True for agent turns in the inter-team debate phase.
    pub fn is_debate_speaker_turn(&self) -> bool {
        self.phase == Phase::Debate && matches!(self.speaker, Speaker::Agent(_))
    }
}

pub fn write_jsonl<W: Write>(turns: &[Turn], mut out: W) -> std::io::Result<()> {
    for t in turns {
        serde_json::to_writer(&mut out, t)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn to_jsonl_string(turns: &[Turn]) -> String {
    let mut buf = Vec::new();
    write_jsonl(turns, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("json is utf-8")
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<Turn>> {
    let mut turns = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| CoreError::Transcript {
            line: i + 1,
            reason: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let turn: Turn = serde_json::from_str(&line).map_err(|e| CoreError::Transcript {
            line: i + 1,
            reason: e.to_string(),
        })?;
        if turn.text.trim().is_empty() {
            return Err(CoreError::Transcript {
                line: i + 1,
                reason: "empty text".into(),
            });
        }
        if turn.speaker == Speaker::Moderator && turn.team_id.is_some() {
            return Err(CoreError::Transcript {
                line: i + 1,
                reason: "moderator turn carries a team_id".into(),
            });
        }
        turns.push(turn);
    }
    Ok(turns)
}
