use std::fmt::Write;

use hde_core::Turn;
use hde_identity::{IdentityGraph, MemorySource, WorkingMemory};
use hde_tom::WeaknessEntry;

use crate::request::{GenerationRequest, LabeledTurn};

/// Prior turns shown to an agent unless configured otherwise.
pub const DEFAULT_WINDOW: usize = 6;

/// `kant (team A)`, or `MODERATOR`.
pub fn turn_label(turn: &Turn) -> String {
    match &turn.team_id {
        Some(team) => format!("{} (team {team})", turn.speaker),
        None => turn.speaker.to_string(),
    }
}

/// Build a generation request for `identity`.
///
/// The system prompt holds, in this order: the persona, the dilemma, core
/// beliefs, constraint labels phrased as prohibitions, retrieved facts that
/// survived filtering (as quotes), and opponent-model hints (as strategy
/// notes). Empty sections are left out. The context window is the last
/// `window` turns of `last_turns`. The instruction is a generic reply cue;
/// callers usually replace it.
pub fn assemble_prompt(
    identity: &IdentityGraph,
    wm: &WorkingMemory,
    hints: &[&WeaknessEntry],
    dilemma: &str,
    last_turns: &[Turn],
    window: usize,
) -> GenerationRequest {
    assert!(window >= 1, "context window must be at least one turn");
    let mut p = String::new();
    if identity.persona_summary().is_empty() {
        let _ = writeln!(p, "You are {}.", identity.display_name());
    } else {
        let _ = writeln!(p, "{}", identity.persona_summary());
    }
    if !dilemma.is_empty() {
        let _ = writeln!(p, "\nDilemma: {dilemma}");
    }

    let mut section = |title: &str, lines: Vec<String>| {
        if lines.is_empty() {
            return;
        }
        let _ = writeln!(p, "\n{title}");
        for line in lines {
            let _ = writeln!(p, "{line}");
        }
    };
    section(
        "Core beliefs:",
        identity.core_nodes().map(|n| format!("- {}", n.statement)).collect(),
    );
    section(
        "You must never argue from:",
        identity.constraints().iter().map(|c| format!("- {}", c.label())).collect(),
    );
    section(
        "Grounding quotes:",
        wm.by_source(MemorySource::RetrievedFact)
            .map(|e| match e.origin_ref() {
                Some(r) => format!("> \"{}\" [{r}]", e.text()),
                None => format!("> \"{}\"", e.text()),
            })
            .collect(),
    );
    section(
        "Strategy notes:",
        hints
            .iter()
            .map(|h| format!("- Opponent weakness: {} Counter: {}", h.weakness_text, h.counter_hint))
            .collect(),
    );

    let start = last_turns.len().saturating_sub(window);
    let context_window = last_turns[start..]
        .iter()
        .map(|t| LabeledTurn {
            label: turn_label(t),
            text: t.text.clone(),
        })
        .collect();

    let mut request = GenerationRequest::new(p, format!("Reply as {}.", identity.display_name()));
    request.context_window = context_window;
    request
}
