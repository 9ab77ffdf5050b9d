use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use hde_core::{Roster, School};
use hde_identity::{load_identity, IdentityGraph};
use hde_retrieval::{CorpusCache, CorpusManifest, RetrievalIndex};
use hde_tom::WeaknessMap;

use crate::config::RunConfig;
use crate::error::{OrchestratorError, Result};

/// One agent with everything it needs to speak.
#[derive(Debug, Clone)]
pub struct Participant {
    pub agent_id: String,
    pub team_id: Option<String>,
    pub identity: IdentityGraph,
    pub weakness: WeaknessMap,
    /// Corpora this agent owns.
    pub corpora: Vec<String>,
}

/// The loaded participants, moderator and retrieval index of a run.
#[derive(Debug, Clone)]
pub struct Cast {
    pub participants: BTreeMap<String, Participant>,
    pub moderator: IdentityGraph,
    pub index: Option<Arc<RetrievalIndex>>,
}

/// Build the retrieval index for a manifest file.
pub fn load_index(manifest: &std::path::Path) -> Result<RetrievalIndex> {
    let manifest = CorpusManifest::load(manifest)?;
    Ok(CorpusCache::build(&manifest)?.index())
}

impl Cast {
    /// Load identities, weakness maps and the index named by `config`.
    /// A prebuilt `index` is used instead of reading the manifest's sources.
    pub fn load(config: &RunConfig, index: Option<Arc<RetrievalIndex>>) -> Result<Self> {
        config.validate()?;
        let modules = config.modules();
        let manifest = match &config.corpus_manifest {
            Some(path) => Some(CorpusManifest::load(path)?),
            None => None,
        };
        let index = if modules.retrieval {
            match (index, &manifest) {
                (Some(index), _) => Some(index),
                (None, Some(m)) => Some(Arc::new(CorpusCache::build(m)?.index())),
                (None, None) => {
                    return Err(OrchestratorError::Config(
                        "retrieval is enabled but no corpus_manifest is set".into(),
                    ))
                }
            }
        } else {
            None
        };

        let two_sided = config.effective_teams().len() > 1;
        let mut participants = BTreeMap::new();
        for agent_id in config.agent_ids() {
            let binding = config.agents.get(&agent_id).cloned().unwrap_or_default();
            let identity_path = match binding.identity {
                Some(p) => p,
                None => default_path(config.identities_dir.as_ref(), &agent_id, "identities_dir")?,
            };
            let identity = load_identity(&identity_path)?;
            if identity.agent_id() != agent_id {
                return Err(OrchestratorError::Config(format!(
                    "{} holds identity `{}`, expected `{agent_id}`",
                    identity_path.display(),
                    identity.agent_id()
                )));
            }
            let weakness = if modules.tom && two_sided {
                let path = match binding.weakness_map {
                    Some(p) => p,
                    None => default_path(config.weakness_dir.as_ref(), &agent_id, "weakness_dir")?,
                };
                WeaknessMap::load(&path, identity.school())?
            } else {
                WeaknessMap::empty(agent_id.clone())
            };
            let corpora = match (binding.corpora, &manifest) {
                (Some(c), _) => c,
                (None, Some(m)) => m.owned_by(&agent_id),
                (None, None) => Vec::new(),
            };
            if let Some(index) = &index {
                if let Some(unknown) = corpora.iter().find(|c| !index.corpora().contains(*c)) {
                    return Err(OrchestratorError::Config(format!(
                        "agent `{agent_id}` is bound to unknown corpus `{unknown}`"
                    )));
                }
            }
            participants.insert(
                agent_id.clone(),
                Participant {
                    team_id: config.team_of(&agent_id),
                    agent_id,
                    identity,
                    weakness,
                    corpora,
                },
            );
        }

        let moderator = if config.effective_solo().is_some() {
            IdentityGraph::empty("moderator", School::Neutral).with_display_name("Moderator")
        } else {
            let path = match &config.moderator {
                Some(p) => p.clone(),
                None => default_path(config.identities_dir.as_ref(), "moderator", "identities_dir")?,
            };
            load_identity(&path)?
        };

        Ok(Cast {
            participants,
            moderator,
            index,
        })
    }

    pub fn participant(&self, agent_id: &str) -> &Participant {
        &self.participants[agent_id]
    }

    /// School and team of every participant, for metrics.
    pub fn roster(&self) -> Roster {
        let mut roster = Roster::default();
        for p in self.participants.values() {
            roster.insert(p.agent_id.clone(), p.identity.school(), p.team_id.clone());
        }
        roster
    }
}

fn default_path(dir: Option<&PathBuf>, agent_id: &str, field: &str) -> Result<PathBuf> {
    dir.map(|d| d.join(format!("{agent_id}.json")))
        .ok_or_else(|| OrchestratorError::Config(format!("no file bound for `{agent_id}` and `{field}` is not set")))
}
