//! Experiment plans: a named list of runs, each a base config plus overrides.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context};
use hde_orchestrator::{Modules, PerturbationId, Preset, RunConfig, ScheduledPerturbation};
use serde::Deserialize;

use crate::run::{IndexCache, RunOverrides};

/// Slot after which plan perturbations are injected unless a run says otherwise.
pub const DEFAULT_INJECTION_TURN: usize = 4;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub name: String,
    /// Output root; the plan's runs go to `<out>/<name>/<run_id>`.
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(rename = "run", default)]
    pub runs: Vec<PlanRun>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanRun {
    pub run_id: String,
    pub config: PathBuf,
    /// `P1`, `P2_TYRANT_ARGUMENT`, ... Replaces the config's schedule.
    #[serde(default)]
    pub perturbation: Option<String>,
    #[serde(default)]
    pub turn: Option<usize>,
    /// Script for the scripted backend, replacing the config's.
    #[serde(default)]
    pub script: Option<PathBuf>,
    /// Row label in the resilience table; derived from the preset if unset.
    #[serde(default)]
    pub system: Option<String>,
    #[serde(default)]
    pub id_rag_enabled: Option<bool>,
    #[serde(default)]
    pub tom_enabled: Option<bool>,
}

/// A plan run with its config fully resolved.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub run_id: String,
    pub system: String,
    pub perturbation: Option<PerturbationId>,
    pub config: RunConfig,
}

impl RunSpec {
    pub fn modules(&self) -> Modules {
        self.config.modules()
    }

    /// Scheduled slot of the first perturbation, used for resilience metrics.
    pub fn injection_turn(&self) -> Option<usize> {
        injection_turn(&self.config)
    }
}

pub fn injection_turn(config: &RunConfig) -> Option<usize> {
    config.perturbations.iter().map(|p| p.turn).min()
}

/// Table label for a system preset.
pub fn system_label(config: &RunConfig) -> String {
    match config.preset {
        Some(Preset::Homo) => "Homo",
        Some(Preset::HeteroResilience | Preset::HeteroPedagogy) => "Hetero",
        Some(Preset::BSingleRag) => "B_SingleRAG",
        Some(Preset::BChat) => "B_Chat",
        None => "Custom",
    }
    .to_string()
}

/// Table label for an ablation variant.
pub fn variant_label(modules: Modules) -> &'static str {
    match (modules.id_rag, modules.tom) {
        (false, false) => "Vanilla RAG Only",
        (true, false) => "Vanilla + ID-RAG",
        (false, true) => "Vanilla + ToM",
        (true, true) => "Full System",
    }
}

impl ExperimentPlan {
    pub fn parse(source: &str, origin: &Path) -> anyhow::Result<Self> {
        toml::from_str(source).with_context(|| format!("plan {} is not valid", origin.display()))
    }

    /// Read a plan, resolving its paths against the plan's directory.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let source =
            std::fs::read_to_string(path).with_context(|| format!("cannot read plan {}", path.display()))?;
        let mut plan = Self::parse(&source, path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for run in &mut plan.runs {
            fix(&mut run.config);
            if let Some(s) = run.script.as_mut() {
                fix(s);
            }
        }
        if let Some(o) = plan.out.as_mut() {
            fix(o);
        }
        Ok(plan)
    }

    /// Resolve every run and check that everything it references exists.
    pub fn resolve(&self, overrides: &RunOverrides, indexes: &IndexCache) -> anyhow::Result<Vec<RunSpec>> {
        ensure!(!self.runs.is_empty(), "plan `{}` has no runs", self.name);
        let mut seen = BTreeSet::new();
        for run in &self.runs {
            ensure!(!run.run_id.trim().is_empty(), "plan `{}` has a run with an empty run_id", self.name);
            ensure!(
                !run.run_id.contains(['/', '\\']) && run.run_id != "." && run.run_id != "..",
                "run_id `{}` is not a valid directory name",
                run.run_id
            );
            ensure!(seen.insert(run.run_id.as_str()), "duplicate run_id `{}`", run.run_id);
        }
        self.runs
            .iter()
            .map(|run| {
                let spec = run.resolve(overrides)?;
                indexes
                    .check(&spec.config)
                    .with_context(|| format!("run `{}`", run.run_id))?;
                Ok(spec)
            })
            .collect()
    }
}

impl PlanRun {
    fn resolve(&self, overrides: &RunOverrides) -> anyhow::Result<RunSpec> {
        let ctx = || format!("run `{}`", self.run_id);
        let mut config = RunConfig::load(&self.config).with_context(ctx)?;
        if let Some(p) = &self.perturbation {
            let id: PerturbationId = p
                .parse()
                .map_err(|e: String| anyhow::anyhow!(e))
                .with_context(ctx)?;
            if id == PerturbationId::Custom {
                bail!("run `{}`: custom perturbations belong in the run config", self.run_id);
            }
            config.perturbations = vec![ScheduledPerturbation::named(
                self.turn.unwrap_or(DEFAULT_INJECTION_TURN),
                id,
            )];
        } else if self.turn.is_some() {
            bail!("run `{}`: `turn` needs a `perturbation`", self.run_id);
        }
        if let Some(script) = &self.script {
            config.backend.script_path = Some(script.clone());
        }
        if self.id_rag_enabled.is_some() {
            config.id_rag_enabled = self.id_rag_enabled;
        }
        if self.tom_enabled.is_some() {
            config.tom_enabled = self.tom_enabled;
        }
        overrides.apply(&mut config);
        config.validate().with_context(ctx)?;
        let perturbation = config
            .perturbations
            .iter()
            .min_by_key(|p| p.turn)
            .map(|p| p.id);
        Ok(RunSpec {
            run_id: self.run_id.clone(),
            system: self.system.clone().unwrap_or_else(|| system_label(&config)),
            perturbation,
            config,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_parses_runs() {
        let plan = ExperimentPlan::parse(
            r#"
name = "t"
[[run]]
run_id = "a"
config = "c.toml"
perturbation = "P2"
"#,
            Path::new("p.toml"),
        )
        .unwrap();
        assert_eq!(plan.runs.len(), 1);
        assert_eq!(plan.runs[0].perturbation.as_deref(), Some("P2"));
    }

    #[test]
    fn unknown_plan_keys_are_rejected() {
        assert!(ExperimentPlan::parse("name = \"t\"\nbogus = 1\n", Path::new("p.toml")).is_err());
    }

    #[test]
    fn variant_labels_follow_toggles() {
        let m = |id_rag, tom| Modules {
            id_rag,
            tom,
            retrieval: true,
            persona: true,
        };
        assert_eq!(variant_label(m(false, false)), "Vanilla RAG Only");
        assert_eq!(variant_label(m(true, true)), "Full System");
    }
}
