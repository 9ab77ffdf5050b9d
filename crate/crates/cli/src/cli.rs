//! Argument parsing and command dispatch.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use hde_core::acs::{acs_aggregate, read_csv};
use hde_core::{Lexicon, MetricWindow, Roster, Turn};
use hde_orchestrator::{BackendKind, RunConfig};
use hde_retrieval::{CacheStatus, CorpusCache, CorpusManifest, CACHE_FILE};
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Classify, CliError, Result};
use crate::plan::{system_label, ExperimentPlan, RunSpec};
use crate::run::{self, Evaluator, IndexCache, RunOverrides, RunSummary, METRICS_FILE, TRANSCRIPT_FILE};
use crate::tables::{ablation_runs, ablation_table, acs_table, resilience_table, Table};

#[derive(Debug, Parser)]
#[command(name = "hde", version, about = "Run and evaluate heterogeneous philosophical debates")]
pub struct Cli {
    /// Run config for `debate`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override the backend named in every run config.
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendChoice>,
    /// Plan runs executed concurrently.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Debate speaking order, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub seed_order: Option<Vec<String>>,
    /// Directory with base.txt, valid.txt and per-school keyword lists.
    #[arg(long, global = true)]
    pub keywords_dir: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Debate turns that doctrinal accuracy and cross-referencing cover.
    #[arg(long, global = true, value_enum, default_value_t = WindowChoice::All)]
    pub window: WindowChoice,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Chunk the corpora of a manifest into the index cache.
    Ingest { manifest: PathBuf },
    /// Run one debate from `--config`.
    Debate {
        /// Clear the perturbation schedule.
        #[arg(long)]
        no_perturbation: bool,
        /// Save every generation as a keyed script for later replay.
        #[arg(long)]
        record_script: Option<PathBuf>,
    },
    /// Run a system × perturbation plan and write the resilience table.
    Factorial { plan: PathBuf },
    /// Run a module-toggle plan and write the ablation table.
    Ablation { plan: PathBuf },
    /// Aggregate participant records into the learning-outcome table.
    Acs { records: PathBuf },
    /// Re-evaluate a finished run directory.
    Report { run_dir: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendChoice {
    Scripted,
    Remote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WindowChoice {
    All,
    Post,
}

impl Cli {
    fn overrides(&self) -> RunOverrides {
        RunOverrides {
            backend: self.backend.map(|b| match b {
                BackendChoice::Scripted => BackendKind::Scripted,
                BackendChoice::Remote => BackendKind::Remote,
            }),
            seed_order: self.seed_order.clone(),
        }
    }

    fn evaluator(&self) -> Result<Evaluator> {
        let lexicon = match &self.keywords_dir {
            Some(dir) => Lexicon::load_dir(dir)
                .with_context(|| format!("cannot load keywords from {}", dir.display()))
                .usage()?,
            None => Lexicon::defaults(),
        };
        let window = match self.window {
            WindowChoice::All => MetricWindow::All,
            WindowChoice::Post => MetricWindow::Post,
        };
        Ok(Evaluator { lexicon, window })
    }
}

/// Run a parsed command line, writing human output to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Ingest { manifest } => ingest(cli, manifest, out),
        Command::Debate {
            no_perturbation,
            record_script,
        } => debate(cli, *no_perturbation, record_script.as_deref(), out),
        Command::Factorial { plan } => {
            let (runs, dir) = run_plan(cli, plan)?;
            let table = resilience_table(&runs).runtime()?;
            emit(&table, &dir.join("table.csv"), out)
        }
        Command::Ablation { plan } => {
            let (runs, dir) = run_plan(cli, plan)?;
            let table = ablation_table(&runs).runtime()?;
            write_file(&dir.join("runs.csv"), ablation_runs(&runs).to_csv().as_bytes())?;
            emit(&table, &dir.join("table.csv"), out)
        }
        Command::Acs { records } => acs(cli, records, out),
        Command::Report { run_dir } => report(cli, run_dir, out),
    }
}

fn say(out: &mut dyn Write, line: std::fmt::Arguments<'_>) -> Result<()> {
    writeln!(out, "{line}").runtime()
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .with_context(|| format!("cannot create {}", dir.display()))
            .runtime()?;
    }
    fs::write(path, bytes)
        .with_context(|| format!("cannot write {}", path.display()))
        .runtime()
}

fn emit(table: &Table, path: &Path, out: &mut dyn Write) -> Result<()> {
    let csv = table.to_csv();
    write_file(path, csv.as_bytes())?;
    out.write_all(csv.as_bytes()).runtime()
}

fn ingest(cli: &Cli, manifest_path: &Path, out: &mut dyn Write) -> Result<()> {
    let manifest = CorpusManifest::load(manifest_path).usage()?;
    let cache_path = match &cli.out {
        Some(dir) => dir.join(CACHE_FILE),
        None => manifest_path.parent().unwrap_or(Path::new("")).join(CACHE_FILE),
    };
    let (cache, status) = CorpusCache::sync(&manifest, &cache_path).usage()?;
    let chunks: usize = cache.corpus_ids().filter_map(|c| cache.chunk_count(c)).sum();
    let status = match status {
        CacheStatus::Hit => "cache hit",
        CacheStatus::Rebuilt => "rebuilt",
    };
    say(
        out,
        format_args!(
            "{status}: {} corpora, {chunks} chunks in {}",
            manifest.corpora.len(),
            cache_path.display()
        ),
    )
}

fn debate(cli: &Cli, no_perturbation: bool, record_script: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Usage(anyhow!("`debate` needs --config")))?;
    let mut config = RunConfig::load(path).usage()?;
    cli.overrides().apply(&mut config);
    if no_perturbation {
        config.perturbations.clear();
    }
    config.validate().usage()?;
    let run_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "debate".into());
    let perturbation = config.perturbations.iter().min_by_key(|p| p.turn).map(|p| p.id);
    let spec = RunSpec {
        system: system_label(&config),
        run_id: run_id.clone(),
        perturbation,
        config,
    };
    let indexes = IndexCache::default();
    indexes.check(&spec.config).usage()?;
    let dir = cli.out.clone().unwrap_or_else(|| Path::new("runs").join(&run_id));
    let summary = run::execute(&spec, &indexes, &cli.evaluator()?, &dir, record_script)?;
    print_summary(&summary, out)?;
    say(out, format_args!("wrote {}", dir.display()))
}

fn print_summary(s: &RunSummary, out: &mut dyn Write) -> Result<()> {
    let f = |x: Option<f64>| x.map_or_else(|| "---".to_string(), hde_core::scalar::fmt2);
    say(out, format_args!("run {} ({}), {} turns", s.run_id, s.system, s.turns))?;
    if let Some(r) = &s.report.resilience {
        say(
            out,
            format_args!(
                "SysAR {}  ArCo {}  (injection after slot {}, observed {:?})",
                f(Some(r.sys_ar)),
                f(Some(r.ar_co)),
                r.injection_turn,
                r.observation_turns
            ),
        )?;
    }
    say(
        out,
        format_args!(
            "DA {}  CR {}",
            f(s.report.doctrinal_accuracy.mean),
            f(s.report.cross_referencing.mean)
        ),
    )
}

/// Resolve, run and collect a plan. Returns summaries in plan order and the
/// plan's output directory.
fn run_plan(cli: &Cli, plan_path: &Path) -> Result<(Vec<RunSummary>, PathBuf)> {
    let plan = ExperimentPlan::load(plan_path).usage()?;
    let indexes = IndexCache::default();
    let specs = plan.resolve(&cli.overrides(), &indexes).usage()?;
    let evaluator = cli.evaluator()?;
    let root = cli
        .out
        .clone()
        .or_else(|| plan.out.clone())
        .unwrap_or_else(|| PathBuf::from("runs"));
    let dir = root.join(&plan.name);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.max(1))
        .build()
        .runtime()?;
    let results: Vec<Result<RunSummary>> = pool.install(|| {
        specs
            .par_iter()
            .map(|spec| run::execute(spec, &indexes, &evaluator, &dir.join(&spec.run_id), None))
            .collect()
    });
    let runs = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((runs, dir))
}

fn acs(cli: &Cli, records: &Path, out: &mut dyn Write) -> Result<()> {
    let file = fs::File::open(records)
        .with_context(|| format!("cannot read {}", records.display()))
        .usage()?;
    let recs = read_csv::<f64, _>(file).usage()?;
    let summary = acs_aggregate(&recs).usage()?;
    let table = acs_table(&summary);
    match &cli.out {
        Some(dir) => emit(&table, &dir.join("table.csv"), out),
        None => out.write_all(table.to_csv().as_bytes()).runtime(),
    }
}

#[derive(Deserialize)]
struct StoredSummary {
    run_id: String,
    injection_turn: Option<usize>,
    roster: Roster,
    transcript_sha256: String,
    report: serde_json::Value,
}

fn report(cli: &Cli, run_dir: &Path, out: &mut dyn Write) -> Result<()> {
    let read = |name: &str| {
        let path = run_dir.join(name);
        fs::read_to_string(&path)
            .with_context(|| format!("cannot read {}", path.display()))
            .usage()
    };
    let stored: StoredSummary = serde_json::from_str(&read(METRICS_FILE)?)
        .context("metrics.json is not a run summary")
        .usage()?;
    let transcript: Vec<Turn> = hde_core::transcript::read_jsonl(read(TRANSCRIPT_FILE)?.as_bytes()).usage()?;
    let hash = hde_orchestrator::transcript_hash(&transcript);
    if hash != stored.transcript_sha256 {
        return Err(CliError::Runtime(anyhow!(
            "transcript of run `{}` changed since it was scored",
            stored.run_id
        )));
    }
    let evaluator = cli.evaluator()?;
    let report = evaluator
        .report(&transcript, &stored.roster, stored.injection_turn)
        .runtime()?;
    let fresh = serde_json::to_value(&report).runtime()?;
    let f = |x: Option<f64>| x.map_or_else(|| "---".to_string(), hde_core::scalar::fmt2);
    say(out, format_args!("run {}: {} turns, transcript {}", stored.run_id, transcript.len(), &hash[..12]))?;
    if let Some(r) = &report.resilience {
        say(out, format_args!("SysAR {}  ArCo {}", f(Some(r.sys_ar)), f(Some(r.ar_co))))?;
    }
    for (agent, da) in &report.doctrinal_accuracy.per_agent {
        let cr = report.cross_referencing.per_agent.get(agent).copied().flatten();
        say(out, format_args!("  {agent:<10} DA {}  CR {}", f(*da), f(cr)))?;
    }
    say(
        out,
        format_args!(
            "DA {}  CR {}",
            f(report.doctrinal_accuracy.mean),
            f(report.cross_referencing.mean)
        ),
    )?;
    if fresh != stored.report {
        say(out, format_args!("note: stored metrics differ from a fresh evaluation with these keywords"))?;
    }
    Ok(())
}
