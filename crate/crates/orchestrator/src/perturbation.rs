use serde::{Deserialize, Serialize};

use crate::error::{OrchestratorError, Result};

pub const P1_TEXT: &str = "Is there a moral difference between pulling a lever and physically pushing someone?";
pub const P2_TEXT: &str =
    "Historical tyrants claimed to act for the greater good. Does utilitarian logic risk justifying atrocities?";
pub const P3_TEXT: &str =
    "Suppose the five are convicted murderers, the one a cancer-curing scientist. Does this change the calculation?";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PerturbationId {
    P1PushVsLever,
    P2TyrantArgument,
    P3ScientistVsKillers,
    Custom,
}

impl PerturbationId {
    pub const NAMED: [PerturbationId; 3] = [
        PerturbationId::P1PushVsLever,
        PerturbationId::P2TyrantArgument,
        PerturbationId::P3ScientistVsKillers,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PerturbationId::P1PushVsLever => "P1_PUSH_VS_LEVER",
            PerturbationId::P2TyrantArgument => "P2_TYRANT_ARGUMENT",
            PerturbationId::P3ScientistVsKillers => "P3_SCIENTIST_VS_KILLERS",
            PerturbationId::Custom => "CUSTOM",
        }
    }

    /// `P1`, `P2`, `P3` or `CUSTOM`.
    pub fn short(self) -> &'static str {
        match self {
            PerturbationId::P1PushVsLever => "P1",
            PerturbationId::P2TyrantArgument => "P2",
            PerturbationId::P3ScientistVsKillers => "P3",
            PerturbationId::Custom => "CUSTOM",
        }
    }

    /// Row label used in result tables.
    pub fn label(self) -> &'static str {
        match self {
            PerturbationId::P1PushVsLever => "Push vs Lever",
            PerturbationId::P2TyrantArgument => "Tyrant Argument",
            PerturbationId::P3ScientistVsKillers => "Scientist vs Killers",
            PerturbationId::Custom => "Custom",
        }
    }

    pub fn text(self) -> Option<&'static str> {
        match self {
            PerturbationId::P1PushVsLever => Some(P1_TEXT),
            PerturbationId::P2TyrantArgument => Some(P2_TEXT),
            PerturbationId::P3ScientistVsKillers => Some(P3_TEXT),
            PerturbationId::Custom => None,
        }
    }
}

impl std::str::FromStr for PerturbationId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let up = s.trim().to_ascii_uppercase();
        PerturbationId::NAMED
            .into_iter()
            .chain([PerturbationId::Custom])
            .find(|p| p.as_str() == up || p.short() == up)
            .ok_or_else(|| format!("unknown perturbation `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub id: PerturbationId,
    pub text: String,
}

impl PerturbationSpec {
    pub fn named(id: PerturbationId) -> Self {
        PerturbationSpec {
            id,
            text: id.text().expect("named perturbation").to_string(),
        }
    }
}

/// A perturbation injected as a moderator turn right after speaker turn
/// `turn` of the debate phase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduledPerturbation {
    pub turn: usize,
    pub id: PerturbationId,
    /// Required for `CUSTOM`; must be absent or verbatim for named ids.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

impl ScheduledPerturbation {
    pub fn named(turn: usize, id: PerturbationId) -> Self {
        ScheduledPerturbation { turn, id, text: None }
    }

    pub fn spec(&self) -> Result<PerturbationSpec> {
        match (self.id.text(), &self.text) {
            (Some(t), None) => Ok(PerturbationSpec {
                id: self.id,
                text: t.to_string(),
            }),
            (Some(t), Some(given)) if given == t => Ok(PerturbationSpec::named(self.id)),
            (Some(_), Some(_)) => Err(OrchestratorError::Config(format!(
                "{} has a fixed text; drop the `text` field or use CUSTOM",
                self.id.as_str()
            ))),
            (None, Some(given)) if !given.trim().is_empty() => Ok(PerturbationSpec {
                id: self.id,
                text: given.clone(),
            }),
            (None, _) => Err(OrchestratorError::Config("CUSTOM perturbation needs non-empty text".into())),
        }
    }
}
