//! Executing one configured run and writing its artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use anyhow::Context;
use hde_backend::{AuditLog, Backend, RecordingBackend};
use hde_core::metrics::{self, MetricOptions};
use hde_core::{Lexicon, MetricReport, MetricWindow, Roster, Turn};
use hde_orchestrator::{
    load_index, run_full_pipeline, transcript_hash, BackendKind, Cast, Modules, RunConfig, RunFailure,
};
use hde_retrieval::RetrievalIndex;
use serde::Serialize;

use crate::error::{Classify, Result};
use crate::plan::{injection_turn, RunSpec};

pub const TRANSCRIPT_FILE: &str = "transcript.jsonl";
pub const AUDIT_FILE: &str = "audit.jsonl";
pub const METRICS_FILE: &str = "metrics.json";

/// Command-line settings that override every run config.
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub backend: Option<BackendKind>,
    pub seed_order: Option<Vec<String>>,
}

impl RunOverrides {
    pub fn apply(&self, config: &mut RunConfig) {
        if let Some(kind) = self.backend {
            config.backend.kind = kind;
        }
        if let Some(order) = &self.seed_order {
            config.seed_order = Some(order.clone());
        }
    }
}

/// Retrieval indices shared across runs, one per corpus manifest.
#[derive(Debug, Default)]
pub struct IndexCache {
    indices: Mutex<BTreeMap<PathBuf, Arc<RetrievalIndex>>>,
}

impl IndexCache {
    pub fn get(&self, config: &RunConfig) -> anyhow::Result<Option<Arc<RetrievalIndex>>> {
        let Some(manifest) = &config.corpus_manifest else {
            return Ok(None);
        };
        let mut indices = self.indices.lock().expect("index cache poisoned");
        if let Some(index) = indices.get(manifest) {
            return Ok(Some(Arc::clone(index)));
        }
        let index = Arc::new(
            load_index(manifest).with_context(|| format!("cannot index corpora of {}", manifest.display()))?,
        );
        indices.insert(manifest.clone(), Arc::clone(&index));
        Ok(Some(index))
    }

    /// Load everything a run refers to without generating anything.
    pub fn check(&self, config: &RunConfig) -> anyhow::Result<()> {
        if config.backend.kind == BackendKind::Scripted {
            let script = config
                .backend
                .script_path
                .as_ref()
                .context("scripted backend needs script_path")?;
            anyhow::ensure!(script.is_file(), "script {} does not exist", script.display());
        }
        Cast::load(config, self.get(config)?)?;
        Ok(())
    }
}

/// Per-turn keyword counts stored alongside the metrics.
#[derive(Debug, Clone, Serialize)]
pub struct TurnHits {
    pub debate_turn_index: usize,
    pub speaker: String,
    pub base: usize,
    pub valid: usize,
    pub framework: usize,
}

/// Contents of `metrics.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub run_id: String,
    pub system: String,
    pub perturbation: Option<String>,
    pub injection_turn: Option<usize>,
    pub modules: Modules,
    pub roster: Roster,
    pub turns: usize,
    pub transcript_sha256: String,
    pub lexicon_sha256: String,
    pub report: MetricReport,
    pub debate_turns: Vec<TurnHits>,
}

/// Everything needed to evaluate a run.
#[derive(Debug)]
pub struct Evaluator {
    pub lexicon: Lexicon,
    pub window: MetricWindow,
}

impl Evaluator {
    pub fn report(&self, transcript: &[Turn], roster: &Roster, injection: Option<usize>) -> anyhow::Result<MetricReport> {
        let options = MetricOptions {
            window: self.window,
            ..MetricOptions::default()
        };
        Ok(metrics::evaluate(transcript, &self.lexicon, roster, injection, options)?)
    }

    fn hits(&self, transcript: &[Turn], roster: &Roster) -> Vec<TurnHits> {
        let mut turns: Vec<Turn> = transcript.iter().filter(|t| t.is_debate_speaker_turn()).cloned().collect();
        metrics::annotate(&mut turns, &self.lexicon, roster);
        turns
            .iter()
            .map(|t| {
                let n = |k: &str| t.annotations.get(k).map_or(0, Vec::len);
                TurnHits {
                    debate_turn_index: t.debate_turn_index.unwrap_or_default(),
                    speaker: t.speaker.to_string(),
                    base: n("BASE"),
                    valid: n("VALID"),
                    framework: n("FRAMEWORK"),
                }
            })
            .collect()
    }
}

fn write_audit(audit: &AuditLog, path: &Path) -> anyhow::Result<()> {
    let mut buf = Vec::new();
    audit.write_jsonl(&mut buf)?;
    fs::write(path, buf).with_context(|| format!("cannot write {}", path.display()))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Run one debate into `dir`, writing the transcript, audit log and metrics.
/// A failed run still leaves its partial transcript and audit log behind.
pub fn execute(
    spec: &RunSpec,
    indexes: &IndexCache,
    evaluator: &Evaluator,
    dir: &Path,
    record_script: Option<&Path>,
) -> Result<RunSummary> {
    let index = indexes.get(&spec.config).usage()?;
    let backend = spec
        .config
        .backend
        .build()
        .with_context(|| format!("run `{}`", spec.run_id))
        .usage()?;
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create {}", dir.display()))
        .runtime()?;
    let transcript_path = dir.join(TRANSCRIPT_FILE);
    tracing::info!(run_id = %spec.run_id, dir = %dir.display(), "starting run");

    let (recorder, plain) = match record_script {
        Some(_) => (Some(RecordingBackend::new(backend)), None),
        None => (None, Some(backend)),
    };
    let active: &dyn Backend = match (&recorder, &plain) {
        (Some(r), _) => r,
        (None, Some(b)) => b.as_ref(),
        (None, None) => unreachable!("one backend is always set"),
    };
    let outcome = run_full_pipeline(&spec.config, active, index, Some(&transcript_path));
    if let (Some(r), Some(path)) = (&recorder, record_script) {
        r.script().save(path).runtime()?;
    }
    let outcome = match outcome {
        Ok(o) => o,
        Err(RunFailure { error, audit, .. }) => {
            write_audit(&audit, &dir.join(AUDIT_FILE)).runtime()?;
            return Err(anyhow::Error::new(error))
                .with_context(|| format!("run `{}` failed", spec.run_id))
                .runtime();
        }
    };
    write_audit(&outcome.audit, &dir.join(AUDIT_FILE)).runtime()?;

    let transcript = &outcome.state.transcript;
    let injection = injection_turn(&spec.config);
    let report = evaluator
        .report(transcript, &outcome.roster, injection)
        .with_context(|| format!("run `{}`", spec.run_id))
        .runtime()?;
    let summary = RunSummary {
        run_id: spec.run_id.clone(),
        system: spec.system.clone(),
        perturbation: spec.perturbation.map(|p| p.short().to_string()),
        injection_turn: injection,
        modules: spec.modules(),
        turns: transcript.len(),
        transcript_sha256: transcript_hash(transcript),
        lexicon_sha256: evaluator.lexicon.content_hash(),
        debate_turns: evaluator.hits(transcript, &outcome.roster),
        roster: outcome.roster,
        report,
    };
    write_json(&summary, &dir.join(METRICS_FILE)).runtime()?;
    tracing::info!(run_id = %spec.run_id, turns = summary.turns, "run scored");
    Ok(summary)
}
