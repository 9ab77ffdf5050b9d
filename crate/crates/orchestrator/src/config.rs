use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use hde_backend::{Backend, RemoteBackend, RemoteConfig, ScriptedBackend, DEFAULT_MAX_OUTPUT_TOKENS, DEFAULT_TEMPERATURE, DEFAULT_WINDOW};
use hde_identity::DEFAULT_CAPACITY;
use hde_retrieval::DEFAULT_K;
use hde_tom::DEFAULT_MAX_HINTS;
use serde::{Deserialize, Serialize};

use crate::error::{OrchestratorError, Result};
use crate::perturbation::ScheduledPerturbation;

pub const DEFAULT_DILEMMA: &str = "A runaway trolley is heading toward five people tied to the track. \
You stand next to a lever that would switch it onto a side track, where it would kill one person instead. \
Should you pull the lever?";

pub const DEFAULT_DEBATE_LENGTH: usize = 10;
/// One statement round and one synthesis round.
pub const DEFAULT_DELIBERATION_ROUNDS: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TeamConfig {
    pub team_id: String,
    pub agent_ids: Vec<String>,
    #[serde(default)]
    pub stance_label: String,
}

impl TeamConfig {
    pub fn new(team_id: &str, agent_ids: &[&str], stance_label: &str) -> Self {
        TeamConfig {
            team_id: team_id.into(),
            agent_ids: agent_ids.iter().map(|a| a.to_string()).collect(),
            stance_label: stance_label.into(),
        }
    }
}

/// Per-agent file overrides. Unset fields fall back to
/// `<identities_dir>/<agent>.json`, `<weakness_dir>/<agent>.json` and the
/// manifest's ownership lists.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentBinding {
    #[serde(default)]
    pub identity: Option<PathBuf>,
    #[serde(default)]
    pub weakness_map: Option<PathBuf>,
    #[serde(default)]
    pub corpora: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Scripted,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendConfig {
    #[serde(default)]
    pub kind: BackendKind,
    #[serde(default)]
    pub script_path: Option<PathBuf>,
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_timeout_s")]
    pub timeout_s: u64,
    #[serde(default)]
    pub rpm_cap: Option<u32>,
}

fn default_timeout_s() -> u64 {
    60
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: BackendKind::Scripted,
            script_path: None,
            endpoint: None,
            model: None,
            api_key_env: None,
            timeout_s: default_timeout_s(),
            rpm_cap: None,
        }
    }
}

impl BackendConfig {
    pub fn scripted(path: impl Into<PathBuf>) -> Self {
        BackendConfig {
            script_path: Some(path.into()),
            ..Self::default()
        }
    }

    pub fn build(&self) -> Result<Box<dyn Backend>> {
        match self.kind {
            BackendKind::Scripted => {
                let path = self
                    .script_path
                    .as_ref()
                    .ok_or_else(|| OrchestratorError::Config("scripted backend needs script_path".into()))?;
                Ok(Box::new(ScriptedBackend::load(path)?))
            }
            BackendKind::Remote => {
                let (Some(endpoint), Some(model)) = (&self.endpoint, &self.model) else {
                    return Err(OrchestratorError::Config("remote backend needs endpoint and model".into()));
                };
                let mut remote = RemoteConfig::new(endpoint.clone(), model.clone());
                remote.api_key_env = self.api_key_env.clone();
                remote.timeout_s = self.timeout_s;
                remote.rpm_cap = self.rpm_cap;
                Ok(Box::new(RemoteBackend::new(remote)?))
            }
        }
    }
}

/// Named system configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Preset {
    BChat,
    BSingleRag,
    Homo,
    HeteroResilience,
    HeteroPedagogy,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::BChat,
        Preset::BSingleRag,
        Preset::Homo,
        Preset::HeteroResilience,
        Preset::HeteroPedagogy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Preset::BChat => "B_CHAT",
            Preset::BSingleRag => "B_SINGLE_RAG",
            Preset::Homo => "HOMO",
            Preset::HeteroResilience => "HETERO_RESILIENCE",
            Preset::HeteroPedagogy => "HETERO_PEDAGOGY",
        }
    }

    /// Teams for debate presets; empty for the single-agent baselines.
    pub fn teams(self) -> Vec<TeamConfig> {
        match self {
            Preset::BChat | Preset::BSingleRag => Vec::new(),
            Preset::Homo => vec![
                TeamConfig::new("A", &["aristotle", "plato"], "Ancient virtue ethics"),
                TeamConfig::new("B", &["aquinas", "augustine"], "Christian virtue ethics and natural law"),
            ],
            Preset::HeteroResilience => vec![
                TeamConfig::new("A", &["aristotle", "aquinas"], "Virtue ethics and natural law"),
                TeamConfig::new("B", &["mill", "bentham"], "Utilitarianism"),
            ],
            Preset::HeteroPedagogy => vec![
                TeamConfig::new("A", &["kant", "aquinas"], "Deontology and natural law"),
                TeamConfig::new("B", &["mill", "bentham"], "Utilitarianism"),
            ],
        }
    }

    pub fn solo(self) -> Option<&'static str> {
        matches!(self, Preset::BChat | Preset::BSingleRag).then_some("tutor")
    }

    fn modules(self) -> Modules {
        match self {
            Preset::BChat => Modules {
                id_rag: false,
                tom: false,
                retrieval: false,
                persona: false,
            },
            Preset::BSingleRag => Modules {
                id_rag: false,
                tom: false,
                retrieval: true,
                persona: true,
            },
            _ => Modules::default(),
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let up = s.trim().to_ascii_uppercase().replace('-', "_");
        Preset::ALL
            .into_iter()
            .find(|p| p.as_str() == up)
            .ok_or_else(|| format!("unknown preset `{s}`"))
    }
}

/// Which pipeline stages run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Modules {
    /// Own-corpus retrieval scope, constraint filtering, core beliefs and
    /// constraints in the prompt.
    pub id_rag: bool,
    /// Opponent weakness hints.
    pub tom: bool,
    pub retrieval: bool,
    pub persona: bool,
}

impl Default for Modules {
    fn default() -> Self {
        Modules {
            id_rag: true,
            tom: true,
            retrieval: true,
            persona: true,
        }
    }
}

/// A debate run as written in a TOML config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_dilemma")]
    pub dilemma: String,
    /// Supplies teams (or the single agent) when `teams` and `solo` are unset,
    /// and default module toggles.
    #[serde(default)]
    pub preset: Option<Preset>,
    #[serde(default)]
    pub teams: Vec<TeamConfig>,
    /// Single-agent mode: no deliberation, no interrogation, a monologue.
    #[serde(default)]
    pub solo: Option<String>,
    #[serde(default)]
    pub agents: BTreeMap<String, AgentBinding>,
    #[serde(default)]
    pub identities_dir: Option<PathBuf>,
    #[serde(default)]
    pub weakness_dir: Option<PathBuf>,
    #[serde(default)]
    pub corpus_manifest: Option<PathBuf>,
    /// Moderator identity; defaults to `<identities_dir>/moderator.json`.
    #[serde(default)]
    pub moderator: Option<PathBuf>,
    #[serde(default)]
    pub backend: BackendConfig,
    #[serde(default = "default_debate_length")]
    pub debate_length: usize,
    #[serde(default)]
    pub perturbations: Vec<ScheduledPerturbation>,
    #[serde(default)]
    pub id_rag_enabled: Option<bool>,
    #[serde(default)]
    pub tom_enabled: Option<bool>,
    #[serde(default)]
    pub retrieval_enabled: Option<bool>,
    #[serde(default)]
    pub persona_enabled: Option<bool>,
    /// Let teammates retrieve from each other's corpora during deliberation.
    #[serde(default)]
    pub share_team_corpora: bool,
    #[serde(default = "default_deliberation_rounds")]
    pub deliberation_rounds: usize,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_max_hints")]
    pub max_hints: usize,
    #[serde(default = "default_capacity")]
    pub memory_capacity: usize,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_max_output_tokens")]
    pub max_output_tokens: u32,
    /// Agent ids in speaking order for the debate phase; cycled.
    #[serde(default)]
    pub seed_order: Option<Vec<String>>,
}

fn default_dilemma() -> String {
    DEFAULT_DILEMMA.to_string()
}
fn default_debate_length() -> usize {
    DEFAULT_DEBATE_LENGTH
}
fn default_deliberation_rounds() -> usize {
    DEFAULT_DELIBERATION_ROUNDS
}
fn default_window() -> usize {
    DEFAULT_WINDOW
}
fn default_k() -> usize {
    DEFAULT_K
}
fn default_max_hints() -> usize {
    DEFAULT_MAX_HINTS
}
fn default_capacity() -> usize {
    DEFAULT_CAPACITY
}
fn default_temperature() -> f64 {
    DEFAULT_TEMPERATURE
}
fn default_max_output_tokens() -> u32 {
    DEFAULT_MAX_OUTPUT_TOKENS
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config takes defaults")
    }
}

impl RunConfig {
    pub fn from_preset(preset: Preset) -> Self {
        RunConfig {
            preset: Some(preset),
            ..Self::default()
        }
    }

    pub fn parse(source: &str, origin: &Path) -> Result<Self> {
        toml::from_str(source).map_err(|e| OrchestratorError::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Read a config file, resolving relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let source = std::fs::read_to_string(path).map_err(|source| OrchestratorError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::parse(&source, path)?;
        config.resolve_paths(path.parent().unwrap_or(Path::new("")));
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [
            &mut self.identities_dir,
            &mut self.weakness_dir,
            &mut self.corpus_manifest,
            &mut self.moderator,
            &mut self.backend.script_path,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        for binding in self.agents.values_mut() {
            for p in [&mut binding.identity, &mut binding.weakness_map].into_iter().flatten() {
                fix(p);
            }
        }
    }

    /// Teams after applying the preset.
    pub fn effective_teams(&self) -> Vec<TeamConfig> {
        if self.teams.is_empty() && self.solo.is_none() {
            self.preset.map(Preset::teams).unwrap_or_default()
        } else {
            self.teams.clone()
        }
    }

    /// The single agent, if this is a single-agent run.
    pub fn effective_solo(&self) -> Option<String> {
        if self.teams.is_empty() {
            self.solo
                .clone()
                .or_else(|| self.preset.and_then(Preset::solo).map(str::to_string))
        } else {
            None
        }
    }

    pub fn modules(&self) -> Modules {
        let base = self.preset.map(Preset::modules).unwrap_or_default();
        Modules {
            id_rag: self.id_rag_enabled.unwrap_or(base.id_rag),
            tom: self.tom_enabled.unwrap_or(base.tom),
            retrieval: self.retrieval_enabled.unwrap_or(base.retrieval),
            persona: self.persona_enabled.unwrap_or(base.persona),
        }
    }

    /// Every participating agent, teams in order.
    pub fn agent_ids(&self) -> Vec<String> {
        match self.effective_solo() {
            Some(solo) => vec![solo],
            None => self.effective_teams().into_iter().flat_map(|t| t.agent_ids).collect(),
        }
    }

    pub fn team_of(&self, agent_id: &str) -> Option<String> {
        self.effective_teams()
            .into_iter()
            .find(|t| t.agent_ids.iter().any(|a| a == agent_id))
            .map(|t| t.team_id)
    }

    /// Debate-phase speaking order for one cycle.
    ///
    /// Without an explicit seed order: team 1 agent 1, team 2 agent 1, ...,
    /// then each team's second agent, and so on, skipping teams that have
    /// run out of agents.
    pub fn speaker_cycle(&self) -> Vec<String> {
        if let Some(order) = &self.seed_order {
            return order.clone();
        }
        let teams = self.effective_teams();
        if teams.is_empty() {
            return self.effective_solo().into_iter().collect();
        }
        let longest = teams.iter().map(|t| t.agent_ids.len()).max().unwrap_or(0);
        (0..longest)
            .flat_map(|i| teams.iter().filter_map(move |t| t.agent_ids.get(i).cloned()))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(OrchestratorError::Config(m));
        if self.dilemma.trim().is_empty() {
            return bad("dilemma is empty".into());
        }
        if !self.teams.is_empty() && self.solo.is_some() {
            return bad("set either `teams` or `solo`, not both".into());
        }
        let teams = self.effective_teams();
        let solo = self.effective_solo();
        if teams.is_empty() && solo.is_none() {
            return bad("no agents configured".into());
        }
        let mut team_ids = BTreeSet::new();
        let mut agents = BTreeSet::new();
        for team in &teams {
            if team.team_id.trim().is_empty() {
                return bad("empty team_id".into());
            }
            if !team_ids.insert(team.team_id.as_str()) {
                return bad(format!("duplicate team `{}`", team.team_id));
            }
            if team.agent_ids.is_empty() {
                return bad(format!("team `{}` has no agents", team.team_id));
            }
            for agent in &team.agent_ids {
                if agent.trim().is_empty() {
                    return bad(format!("team `{}` has an empty agent id", team.team_id));
                }
                if !agents.insert(agent.as_str()) {
                    return bad(format!("agent `{agent}` appears more than once across teams"));
                }
            }
        }
        if let Some(solo) = &solo {
            if solo.trim().is_empty() {
                return bad("solo agent id is empty".into());
            }
        }
        if let Some(unknown) = self.agents.keys().find(|a| !self.agent_ids().contains(a)) {
            return bad(format!("binding for `{unknown}`, who is not in any team"));
        }
        if self.debate_length == 0 {
            return bad("debate_length must be at least 1".into());
        }
        for (name, value) in [("window", self.window), ("k", self.k), ("memory_capacity", self.memory_capacity)] {
            if value == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        if self.max_output_tokens == 0 {
            return bad("max_output_tokens must be at least 1".into());
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return bad(format!("temperature {} is not a non-negative number", self.temperature));
        }
        let mut slots = BTreeSet::new();
        for p in &self.perturbations {
            p.spec()?;
            if p.turn == 0 || p.turn >= self.debate_length {
                return bad(format!(
                    "perturbation after turn {} leaves no speaker turn to observe (debate_length {})",
                    p.turn, self.debate_length
                ));
            }
            if !slots.insert(p.turn) {
                return bad(format!("two perturbations after turn {}", p.turn));
            }
        }
        if let Some(order) = &self.seed_order {
            let listed: BTreeSet<&str> = order.iter().map(String::as_str).collect();
            let all: BTreeSet<String> = self.agent_ids().into_iter().collect();
            let all: BTreeSet<&str> = all.iter().map(String::as_str).collect();
            if listed != all || order.len() != all.len() {
                return bad("seed_order must list every agent exactly once".into());
            }
            if teams.len() > 1 {
                let team = |a: &str| self.team_of(a);
                let clash = (0..order.len()).any(|i| team(&order[i]) == team(&order[(i + 1) % order.len()]));
                if clash {
                    return bad("seed_order must alternate teams".into());
                }
            }
        }
        if teams.len() > 1 {
            // round-robin must alternate; uneven team sizes can break it
            let cycle = self.speaker_cycle();
            let n = cycle.len();
            if (0..n).any(|i| self.team_of(&cycle[i]) == self.team_of(&cycle[(i + 1) % n])) {
                return bad("teams of these sizes cannot alternate; set seed_order".into());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturbation::PerturbationId;

    fn hetero() -> RunConfig {
        RunConfig::from_preset(Preset::HeteroResilience)
    }

    #[test]
    fn preset_defaults() {
        let c = hetero();
        c.validate().unwrap();
        assert_eq!(c.debate_length, 10);
        assert_eq!(c.speaker_cycle(), ["aristotle", "mill", "aquinas", "bentham"]);
        assert_eq!(c.modules(), Modules::default());
        let chat = RunConfig::from_preset(Preset::BChat);
        assert_eq!(chat.effective_solo().as_deref(), Some("tutor"));
        assert!(!chat.modules().retrieval && !chat.modules().persona);
        chat.validate().unwrap();
    }

    #[test]
    fn preset_rosters() {
        let ids = |p| RunConfig::from_preset(p).agent_ids();
        assert_eq!(ids(Preset::Homo), ["aristotle", "plato", "aquinas", "augustine"]);
        assert_eq!(ids(Preset::HeteroPedagogy), ["kant", "aquinas", "mill", "bentham"]);
        assert_eq!(ids(Preset::BSingleRag), ["tutor"]);
    }

    #[test]
    fn rejects_bad_participants() {
        let mut c = RunConfig::default();
        assert!(c.validate().unwrap_err().to_string().contains("no agents"));
        c.teams = vec![TeamConfig::new("A", &["kant", "mill"], ""), TeamConfig::new("B", &["mill"], "")];
        assert!(c.validate().unwrap_err().to_string().contains("more than once"));
        c.teams = vec![TeamConfig::new("A", &[], "")];
        assert!(c.validate().is_err());
    }

    #[test]
    fn rejects_bad_schedule() {
        let mut c = hetero();
        c.perturbations = vec![ScheduledPerturbation::named(10, PerturbationId::P1PushVsLever)];
        assert!(c.validate().is_err());
        c.perturbations = vec![ScheduledPerturbation {
            turn: 4,
            id: PerturbationId::P1PushVsLever,
            text: Some("something else".into()),
        }];
        assert!(c.validate().is_err());
        c.perturbations = vec![ScheduledPerturbation {
            turn: 4,
            id: PerturbationId::Custom,
            text: None,
        }];
        assert!(c.validate().is_err());
    }

    #[test]
    fn seed_order_must_alternate() {
        let mut c = hetero();
        c.seed_order = Some(vec!["mill".into(), "aquinas".into(), "bentham".into(), "aristotle".into()]);
        c.validate().unwrap();
        assert_eq!(c.speaker_cycle()[0], "mill");
        c.seed_order = Some(vec!["mill".into(), "bentham".into(), "aquinas".into(), "aristotle".into()]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn parses_toml_with_overrides() {
        let src = r#"
preset = "HETERO_PEDAGOGY"
id_rag_enabled = false
debate_length = 6

[backend]
kind = "scripted"
script_path = "s.json"

[[perturbations]]
turn = 4
id = "P3_SCIENTIST_VS_KILLERS"
"#;
        let mut c = RunConfig::parse(src, Path::new("c.toml")).unwrap();
        c.resolve_paths(Path::new("/base"));
        c.validate().unwrap();
        assert!(!c.modules().id_rag && c.modules().tom);
        assert_eq!(c.backend.script_path.as_deref(), Some(Path::new("/base/s.json")));
        assert!(RunConfig::parse("bogus = 1", Path::new("c.toml")).is_err());
    }
}
