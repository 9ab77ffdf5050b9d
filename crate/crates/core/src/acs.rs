//! Argument Complexity Score records and learning-outcome aggregation.
//!
//! Scores are assigned by human raters; this module only stores and
//! aggregates them.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::scalar::{self, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Condition {
    BChat,
    BSingleRag,
    Homo,
    Hetero,
}

impl Condition {
    pub const ALL: [Condition; 4] = [Condition::BChat, Condition::BSingleRag, Condition::Homo, Condition::Hetero];

    /// Conditions pooled as the comparison group for the effect size.
    pub const BASELINES: [Condition; 2] = [Condition::BChat, Condition::BSingleRag];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::BChat => "B_CHAT",
            Condition::BSingleRag => "B_SINGLE_RAG",
            Condition::Homo => "HOMO",
            Condition::Hetero => "HETERO",
        }
    }

    /// Row label used in the learning-outcomes table.
    pub fn label(self) -> &'static str {
        match self {
            Condition::BChat => "B_Chat",
            Condition::BSingleRag => "B_SingleRAG",
            Condition::Homo => "Homo",
            Condition::Hetero => "Hetero",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let up = s.trim().to_ascii_uppercase().replace('-', "_");
        Condition::ALL
            .into_iter()
            .find(|c| c.as_str() == up || c.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown condition `{s}`"))
    }
}

/// A rubric score: three dimensions, each 0–2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcsScore {
    perspective_range: u8,
    conceptual_sophistication: u8,
    argumentative_structuring: u8,
}

impl AcsScore {
    pub fn new(perspective_range: u8, conceptual_sophistication: u8, argumentative_structuring: u8) -> Result<Self> {
        for (name, v) in [
            ("perspective_range", perspective_range),
            ("conceptual_sophistication", conceptual_sophistication),
            ("argumentative_structuring", argumentative_structuring),
        ] {
            if v > 2 {
                return Err(CoreError::Acs(format!("{name} = {v} is outside 0..=2")));
            }
        }
        Ok(AcsScore {
            perspective_range,
            conceptual_sophistication,
            argumentative_structuring,
        })
    }

    pub fn perspective_range(&self) -> u8 {
        self.perspective_range
    }

    pub fn conceptual_sophistication(&self) -> u8 {
        self.conceptual_sophistication
    }

    pub fn argumentative_structuring(&self) -> u8 {
        self.argumentative_structuring
    }

    pub fn total(&self) -> u8 {
        self.perspective_range + self.conceptual_sophistication + self.argumentative_structuring
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcsRecord<T> {
    pub participant_id: String,
    pub condition: Condition,
    pub pre: AcsScore,
    pub post: AcsScore,
    pub quiz: T,
    pub stance_shift: T,
}

impl<T: Real> AcsRecord<T> {
    pub fn gain(&self) -> T {
        T::from_i32(i32::from(self.post.total()) - i32::from(self.pre.total())).expect("small integer")
    }
}

#[derive(Deserialize)]
struct CsvRow {
    participant_id: String,
    condition: String,
    pre_perspective_range: u8,
    pre_conceptual_sophistication: u8,
    pre_argumentative_structuring: u8,
    post_perspective_range: u8,
    post_conceptual_sophistication: u8,
    post_argumentative_structuring: u8,
    quiz: f64,
    stance_shift: f64,
}

/// CSV header expected by [`read_csv`].
pub const CSV_HEADER: &str = "participant_id,condition,pre_perspective_range,pre_conceptual_sophistication,pre_argumentative_structuring,post_perspective_range,post_conceptual_sophistication,post_argumentative_structuring,quiz,stance_shift";

/// Read participant records from CSV with a [`CSV_HEADER`] header row.
pub fn read_csv<T: Real, R: Read>(input: R) -> Result<Vec<AcsRecord<T>>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<CsvRow>().enumerate() {
        let row = row.map_err(|e| CoreError::Acs(format!("row {}: {e}", i + 1)))?;
        let condition = row
            .condition
            .parse()
            .map_err(|e| CoreError::Acs(format!("row {}: {e}", i + 1)))?;
        let real = |v: f64| T::from_f64(v).ok_or_else(|| CoreError::Acs(format!("row {}: bad number", i + 1)));
        out.push(AcsRecord {
            participant_id: row.participant_id,
            condition,
            pre: AcsScore::new(
                row.pre_perspective_range,
                row.pre_conceptual_sophistication,
                row.pre_argumentative_structuring,
            )?,
            post: AcsScore::new(
                row.post_perspective_range,
                row.post_conceptual_sophistication,
                row.post_argumentative_structuring,
            )?,
            quiz: real(row.quiz)?,
            stance_shift: real(row.stance_shift)?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionSummary<T> {
    pub n: usize,
    pub delta_acs: T,
    pub quiz: T,
    pub stance_shift: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcsSummary<T> {
    pub conditions: BTreeMap<Condition, ConditionSummary<T>>,
    /// Hetero gains against the pooled baseline gains; absent when either
    /// group has fewer than two records or the pooled SD is zero.
    pub cohens_d: Option<T>,
}

/// Cohen's d of `a` over `b` using the pooled standard deviation.
pub fn cohens_d<T: Real>(a: &[T], b: &[T]) -> Option<T> {
    let (na, nb) = (a.len(), b.len());
    let sa = scalar::sample_sd(a)?;
    let sb = scalar::sample_sd(b)?;
    let dof = scalar::from_count::<T>(na + nb - 2);
    let pooled = (((scalar::from_count::<T>(na - 1)) * sa * sa + scalar::from_count::<T>(nb - 1) * sb * sb) / dof).sqrt();
    if pooled == T::zero() {
        return None;
    }
    let diff = scalar::mean(a.iter().copied())? - scalar::mean(b.iter().copied())?;
    Some(diff / pooled)
}

/// Per-condition means of ΔACS, quiz and stance shift plus the Hetero effect size.
pub fn acs_aggregate<T: Real>(records: &[AcsRecord<T>]) -> Result<AcsSummary<T>> {
    if records.is_empty() {
        return Err(CoreError::Acs("no records".into()));
    }
    let mut by_condition: BTreeMap<Condition, Vec<&AcsRecord<T>>> = BTreeMap::new();
    for r in records {
        by_condition.entry(r.condition).or_default().push(r);
    }
    let conditions = by_condition
        .iter()
        .map(|(c, rs)| {
            let m = |f: fn(&AcsRecord<T>) -> T| scalar::mean(rs.iter().map(|r| f(r))).expect("non-empty");
            (
                *c,
                ConditionSummary {
                    n: rs.len(),
                    delta_acs: m(AcsRecord::gain),
                    quiz: m(|r| r.quiz),
                    stance_shift: m(|r| r.stance_shift),
                },
            )
        })
        .collect();
    let gains = |cs: &[Condition]| -> Vec<T> {
        records
            .iter()
            .filter(|r| cs.contains(&r.condition))
            .map(AcsRecord::gain)
            .collect()
    };
    let cohens_d = cohens_d(&gains(&[Condition::Hetero]), &gains(&Condition::BASELINES));
    Ok(AcsSummary { conditions, cohens_d })
}
