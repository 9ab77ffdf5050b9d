//! Table-shaped CSV reports.
//!
//! Mean rows average the per-run values as they appear in the table, that
//! is after rounding to two decimals, and differences are taken between
//! displayed means.

use anyhow::{bail, Context};
use hde_core::acs::Condition;
use hde_core::scalar::{fmt2, fmt2_signed, mean, round_half_up};
use hde_core::AcsSummary;

use crate::plan::variant_label;
use crate::run::RunSummary;

const ABSENT: &str = "---";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }

    /// Cell of the first row whose first column is `label`.
    pub fn cell(&self, label: &str, column: &str) -> Option<&str> {
        let col = self.header.iter().position(|h| h == column)?;
        self.rows
            .iter()
            .find(|r| r.first().is_some_and(|c| c == label))
            .map(|r| r[col].as_str())
    }
}

fn shown(x: f64) -> f64 {
    round_half_up(x, 2)
}

/// Mean of the displayed values; `None` when any value is absent.
fn mean_shown(values: &[Option<f64>]) -> Option<f64> {
    let vals: Option<Vec<f64>> = values.iter().copied().collect();
    mean(vals?.into_iter().map(shown))
}

fn cell(x: Option<f64>) -> String {
    x.map_or_else(|| ABSENT.to_string(), fmt2)
}

/// Signed percentage-point difference between two displayed values.
fn points(a: Option<f64>, b: Option<f64>) -> String {
    match (a, b) {
        (Some(a), Some(b)) => {
            let pp = ((shown(a) - shown(b)) * 100.0).round() as i64;
            format!("{pp:+}")
        }
        _ => ABSENT.to_string(),
    }
}

/// Groups in order of first appearance.
fn groups<K: PartialEq>(runs: &[RunSummary], key: impl Fn(&RunSummary) -> K) -> Vec<(K, Vec<&RunSummary>)> {
    let mut out: Vec<(K, Vec<&RunSummary>)> = Vec::new();
    for r in runs {
        let k = key(r);
        match out.iter_mut().find(|(g, _)| *g == k) {
            Some((_, v)) => v.push(r),
            None => out.push((k, vec![r])),
        }
    }
    out
}

/// SysAR and ArCo per run, then one mean row per system.
pub fn resilience_table(runs: &[RunSummary]) -> anyhow::Result<Table> {
    let mut t = Table::new(&["System", "Pert.", "SysAR", "ArCo"]);
    let mut values = Vec::new();
    for r in runs {
        let res = r
            .report
            .resilience
            .as_ref()
            .with_context(|| format!("run `{}` has no perturbation to recover from", r.run_id))?;
        values.push((res.sys_ar, res.ar_co));
        t.rows.push(vec![
            r.system.clone(),
            r.perturbation.clone().unwrap_or_default(),
            fmt2(res.sys_ar),
            fmt2(res.ar_co),
        ]);
    }
    for (system, members) in groups(runs, |r| r.system.clone()) {
        let pick = |f: fn(&RunSummary) -> f64| mean_shown(&members.iter().map(|r| Some(f(r))).collect::<Vec<_>>());
        let sys_ar = pick(|r| r.report.resilience.as_ref().map_or(0.0, |x| x.sys_ar));
        let ar_co = pick(|r| r.report.resilience.as_ref().map_or(0.0, |x| x.ar_co));
        let short: String = system.chars().take(3).collect();
        t.rows.push(vec![format!("Mean ({short})"), String::new(), cell(sys_ar), cell(ar_co)]);
    }
    Ok(t)
}

fn da(r: &RunSummary) -> Option<f64> {
    r.report.doctrinal_accuracy.mean
}

fn cr(r: &RunSummary) -> Option<f64> {
    r.report.cross_referencing.mean
}

fn ar_co(r: &RunSummary) -> Option<f64> {
    r.report.resilience.as_ref().map(|x| x.ar_co)
}

const VARIANTS: [&str; 4] = ["Vanilla RAG Only", "Vanilla + ID-RAG", "Vanilla + ToM", "Full System"];

/// Per-variant means of DA, CR and ArCo plus module deltas over the
/// vanilla variant, in percentage points.
pub fn ablation_table(runs: &[RunSummary]) -> anyhow::Result<Table> {
    if runs.is_empty() {
        bail!("no runs to tabulate");
    }
    let mut t = Table::new(&["Condition", "DA", "CR", "ArCo"]);
    let mut means = Vec::new();
    for variant in VARIANTS {
        let members: Vec<&RunSummary> = runs.iter().filter(|r| variant_label(r.modules) == variant).collect();
        if members.is_empty() {
            continue;
        }
        let m = |f: fn(&RunSummary) -> Option<f64>| mean_shown(&members.iter().map(|r| f(r)).collect::<Vec<_>>());
        let row = (m(da), m(cr), m(ar_co));
        t.rows.push(vec![variant.to_string(), cell(row.0), cell(row.1), cell(row.2)]);
        means.push((variant, row));
    }
    let find = |v: &str| means.iter().find(|(n, _)| *n == v).map(|(_, m)| *m);
    if let Some(base) = find(VARIANTS[0]) {
        for (variant, module) in [(VARIANTS[1], "ID-RAG"), (VARIANTS[2], "ToM")] {
            if let Some(m) = find(variant) {
                t.rows.push(vec![
                    format!("Δ pp ({module})"),
                    points(m.0, base.0),
                    points(m.1, base.1),
                    ABSENT.to_string(),
                ]);
            }
        }
    }
    Ok(t)
}

/// One row per ablation run with its displayed values.
pub fn ablation_runs(runs: &[RunSummary]) -> Table {
    let mut t = Table::new(&["run_id", "Condition", "Pert.", "DA", "CR", "ArCo"]);
    for r in runs {
        t.rows.push(vec![
            r.run_id.clone(),
            variant_label(r.modules).to_string(),
            r.perturbation.clone().unwrap_or_default(),
            cell(da(r)),
            cell(cr(r)),
            cell(ar_co(r)),
        ]);
    }
    t
}

/// Learning outcomes by condition and the Hetero effect size.
pub fn acs_table(summary: &AcsSummary) -> Table {
    let mut t = Table::new(&["Condition", "N", "ΔACS", "Quiz", "Shift"]);
    for c in Condition::ALL {
        if let Some(s) = summary.conditions.get(&c) {
            t.rows.push(vec![
                c.label().to_string(),
                s.n.to_string(),
                fmt2_signed(s.delta_acs),
                fmt2(s.quiz),
                fmt2(s.stance_shift),
            ]);
        }
    }
    t.rows.push(vec![
        "Cohen's d (Hetero vs baselines)".to_string(),
        String::new(),
        cell(summary.cohens_d),
        String::new(),
        String::new(),
    ]);
    t
}
