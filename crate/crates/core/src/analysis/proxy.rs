//! How closely a nonprotected variable's conditional distributions track a
//! protected partition versus the outcome partition.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::distance::distribution_distance;
use super::violin::{violin_summary, Bandwidth, ViolinSummary};
use crate::dataset::{Record, RecordTable};
use crate::{Error, Result};

/// Numeric record fields available to the proxy analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    Age,
    PriorsCount,
    JuvFelCount,
    JuvMisdCount,
    JuvOtherCount,
    #[serde(rename = "days_b_screening_arrest")]
    DaysBScreeningArrest,
    DecileScore,
    #[serde(rename = "two_year_recid")]
    Outcome,
}

impl Variable {
    pub const ALL: [Variable; 8] = [
        Variable::Age,
        Variable::PriorsCount,
        Variable::JuvFelCount,
        Variable::JuvMisdCount,
        Variable::JuvOtherCount,
        Variable::DaysBScreeningArrest,
        Variable::DecileScore,
        Variable::Outcome,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variable::Age => "age",
            Variable::PriorsCount => "priors_count",
            Variable::JuvFelCount => "juv_fel_count",
            Variable::JuvMisdCount => "juv_misd_count",
            Variable::JuvOtherCount => "juv_other_count",
            Variable::DaysBScreeningArrest => "days_b_screening_arrest",
            Variable::DecileScore => "decile_score",
            Variable::Outcome => "two_year_recid",
        }
    }

    pub fn value(self, r: &Record) -> Option<f64> {
        match self {
            Variable::Age => Some(r.age as f64),
            Variable::PriorsCount => Some(r.priors_count as f64),
            Variable::JuvFelCount => Some(r.juv_fel_count as f64),
            Variable::JuvMisdCount => Some(r.juv_misd_count as f64),
            Variable::JuvOtherCount => Some(r.juv_other_count as f64),
            Variable::DaysBScreeningArrest => r.days_b_screening_arrest.map(|d| d as f64),
            Variable::DecileScore => r.decile_score.map(f64::from),
            Variable::Outcome => Some(f64::from(r.outcome)),
        }
    }
}

impl FromStr for Variable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(v) = Variable::ALL.into_iter().find(|v| v.name() == s) {
            return Ok(v);
        }
        match s {
            "sex" | "race" | "c_charge_degree" | "id" => Err(Error::NonNumeric(s.into())),
            _ => Err(Error::UnknownVariable(s.into())),
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "attribute", rename_all = "snake_case")]
pub enum PartitionAttribute {
    /// Side 0 is `first`, side 1 is `second`; other races are excluded.
    Race { first: String, second: String },
    /// Side 0 recidivated, side 1 did not.
    Outcome,
    /// Side 0 male, side 1 female.
    Sex,
}

/// A named two-sided split of the records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub name: String,
    #[serde(flatten)]
    pub attribute: PartitionAttribute,
}

impl Partition {
    pub fn race(first: &str, second: &str) -> Self {
        Self {
            name: "race".into(),
            attribute: PartitionAttribute::Race {
                first: first.into(),
                second: second.into(),
            },
        }
    }

    pub fn outcome() -> Self {
        Self {
            name: "two_year_recid".into(),
            attribute: PartitionAttribute::Outcome,
        }
    }

    pub fn sex() -> Self {
        Self {
            name: "sex".into(),
            attribute: PartitionAttribute::Sex,
        }
    }

    /// Race (African-American vs Caucasian) and two-year recidivism.
    pub fn defaults() -> Vec<Partition> {
        vec![Self::race("African-American", "Caucasian"), Self::outcome()]
    }

    pub fn side_names(&self) -> [String; 2] {
        match &self.attribute {
            PartitionAttribute::Race { first, second } => [first.clone(), second.clone()],
            PartitionAttribute::Outcome => ["recidivated".into(), "not_recidivated".into()],
            PartitionAttribute::Sex => ["Male".into(), "Female".into()],
        }
    }

    fn side(&self, r: &Record) -> Option<usize> {
        match &self.attribute {
            PartitionAttribute::Race { first, second } => {
                if &r.race == first {
                    Some(0)
                } else if &r.race == second {
                    Some(1)
                } else {
                    None
                }
            }
            PartitionAttribute::Outcome => Some(if r.outcome == 1 { 0 } else { 1 }),
            PartitionAttribute::Sex => Some(match r.sex {
                crate::dataset::Sex::Male => 0,
                crate::dataset::Sex::Female => 1,
            }),
        }
    }

    fn membership(&self, table: &RecordTable) -> BinaryPartition {
        BinaryPartition {
            name: self.name.clone(),
            sides: self.side_names(),
            membership: table.records.iter().map(|r| self.side(r)).collect(),
        }
    }
}

/// A numeric column; `None` marks a missing value.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericColumn {
    pub name: String,
    pub values: Vec<Option<f64>>,
}

/// Row membership in side 0 or 1, or `None` when the row belongs to neither.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryPartition {
    pub name: String,
    pub sides: [String; 2],
    pub membership: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxyEntry {
    pub variable: String,
    pub partition: String,
    /// Wasserstein-1 distance between the variable on side 0 and on side 1.
    pub distance: f64,
    pub violins: [ViolinSummary; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxyScore {
    pub variable: String,
    pub partition_a: String,
    pub partition_b: String,
    /// `|distance under a − distance under b|`; 0 when the variable separates
    /// both partitions equally.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxyReport {
    pub entries: Vec<ProxyEntry>,
    pub scores: Vec<ProxyScore>,
}

impl ProxyReport {
    pub fn entry(&self, variable: &str, partition: &str) -> Option<&ProxyEntry> {
        self.entries
            .iter()
            .find(|e| e.variable == variable && e.partition == partition)
    }

    pub fn score(&self, variable: &str) -> Option<f64> {
        self.scores
            .iter()
            .find(|s| s.variable == variable)
            .map(|s| s.score)
    }
}

/// Conditional distances and violins for every (column, partition), plus a
/// score for every column and pair of partitions.
pub fn proxy_matrix(
    columns: &[NumericColumn],
    partitions: &[BinaryPartition],
    grid_points: usize,
) -> Result<ProxyReport> {
    let mut entries = Vec::new();
    let mut scores = Vec::new();
    for column in columns {
        let mut distances = Vec::with_capacity(partitions.len());
        for partition in partitions {
            if partition.membership.len() != column.values.len() {
                return Err(Error::Dimension(format!(
                    "partition {} has {} rows, column {} has {}",
                    partition.name,
                    partition.membership.len(),
                    column.name,
                    column.values.len()
                )));
            }
            let mut sides: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
            for (v, side) in column.values.iter().zip(&partition.membership) {
                if let (Some(v), Some(side)) = (v, side) {
                    sides[*side].push(*v);
                }
            }
            if let Some(empty) = sides.iter().position(Vec::is_empty) {
                return Err(Error::DegenerateGroups(format!(
                    "side {:?} of partition {} has no {} values",
                    partition.sides[empty], partition.name, column.name
                )));
            }
            let distance = distribution_distance(&sides[0], &sides[1])?;
            let violin = |i: usize| -> Result<ViolinSummary> {
                Ok(violin_summary(&sides[i], grid_points, Bandwidth::Auto)?
                    .labeled(&column.name, &partition.sides[i]))
            };
            entries.push(ProxyEntry {
                variable: column.name.clone(),
                partition: partition.name.clone(),
                distance,
                violins: [violin(0)?, violin(1)?],
            });
            distances.push(distance);
        }
        for a in 0..partitions.len() {
            for b in a + 1..partitions.len() {
                scores.push(ProxyScore {
                    variable: column.name.clone(),
                    partition_a: partitions[a].name.clone(),
                    partition_b: partitions[b].name.clone(),
                    score: (distances[a] - distances[b]).abs(),
                });
            }
        }
    }
    Ok(ProxyReport { entries, scores })
}

/// [`proxy_matrix`] over record fields named in `variables`.
pub fn proxy_report(
    table: &RecordTable,
    variables: &[String],
    partitions: &[Partition],
    grid_points: usize,
) -> Result<ProxyReport> {
    let columns = variables
        .iter()
        .map(|name| {
            let v: Variable = name.parse()?;
            Ok(NumericColumn {
                name: v.name().into(),
                values: table.records.iter().map(|r| v.value(r)).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let partitions: Vec<BinaryPartition> = partitions.iter().map(|p| p.membership(table)).collect();
    proxy_matrix(&columns, &partitions, grid_points)
}
