//! COMPAS-style record ingestion, cohort filtering, feature encoding and
//! stratified splitting.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Standard deviations at or below this (relative to the column scale) mark a
/// column as constant.
const CONSTANT_SD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sex {
    Male,
    Female,
}

impl Sex {
    pub fn as_str(self) -> &'static str {
        match self {
            Sex::Male => "Male",
            Sex::Female => "Female",
        }
    }
}

impl FromStr for Sex {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s.trim() {
            "Male" | "male" | "M" => Ok(Sex::Male),
            "Female" | "female" | "F" => Ok(Sex::Female),
            _ => Err(()),
        }
    }
}

/// Degree of the screening charge. `O` is an ordinary traffic offense.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ChargeDegree {
    #[serde(rename = "F")]
    Felony,
    #[serde(rename = "M")]
    Misdemeanor,
    #[serde(rename = "O")]
    OrdinaryTraffic,
}

impl ChargeDegree {
    pub fn as_str(self) -> &'static str {
        match self {
            ChargeDegree::Felony => "F",
            ChargeDegree::Misdemeanor => "M",
            ChargeDegree::OrdinaryTraffic => "O",
        }
    }
}

impl FromStr for ChargeDegree {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        // raw exports sometimes carry the statute class, e.g. "(F3)"
        let s = s.trim().trim_start_matches('(');
        match s.chars().next() {
            Some('F') => Ok(ChargeDegree::Felony),
            Some('M') => Ok(ChargeDegree::Misdemeanor),
            Some('O') => Ok(ChargeDegree::OrdinaryTraffic),
            _ => Err(()),
        }
    }
}

/// One defendant row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub id: String,
    pub age: i64,
    pub sex: Sex,
    pub race: String,
    pub priors_count: u32,
    pub charge_degree: ChargeDegree,
    pub juv_fel_count: u32,
    pub juv_misd_count: u32,
    pub juv_other_count: u32,
    pub days_b_screening_arrest: Option<i64>,
    /// Two-year recidivism, 0 or 1.
    pub outcome: u8,
    /// COMPAS decile score. Reporting only, never a model feature.
    pub decile_score: Option<u8>,
}

impl Record {
    pub fn group_level(&self, attribute: GroupAttribute) -> &str {
        match attribute {
            GroupAttribute::Race => &self.race,
            GroupAttribute::Sex => self.sex.as_str(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecordTable {
    pub records: Vec<Record>,
    /// Data rows dropped at load time because a required field did not parse.
    pub dropped: usize,
}

impl RecordTable {
    pub fn new(records: Vec<Record>) -> Self {
        Self {
            records,
            dropped: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Header names of the input columns. Defaults follow the ProPublica
/// two-year export.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColumnMap {
    pub id: String,
    pub age: String,
    pub sex: String,
    pub race: String,
    pub priors_count: String,
    pub charge_degree: String,
    pub juv_fel_count: String,
    pub juv_misd_count: String,
    pub juv_other_count: String,
    pub days_b_screening_arrest: String,
    pub outcome: String,
    pub decile_score: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            id: "id".into(),
            age: "age".into(),
            sex: "sex".into(),
            race: "race".into(),
            priors_count: "priors_count".into(),
            charge_degree: "c_charge_degree".into(),
            juv_fel_count: "juv_fel_count".into(),
            juv_misd_count: "juv_misd_count".into(),
            juv_other_count: "juv_other_count".into(),
            days_b_screening_arrest: "days_b_screening_arrest".into(),
            outcome: "two_year_recid".into(),
            decile_score: "decile_score".into(),
        }
    }
}

struct ColumnIndex {
    id: Option<usize>,
    age: usize,
    sex: usize,
    race: usize,
    priors_count: usize,
    charge_degree: usize,
    juv: [Option<usize>; 3],
    days: usize,
    outcome: usize,
    decile: usize,
}

impl ColumnIndex {
    fn resolve(headers: &csv::StringRecord, map: &ColumnMap) -> Result<Self> {
        // duplicated headers (the ProPublica file has two `decile_score`s) resolve to the first
        let find = |name: &str| headers.iter().position(|h| h.trim() == name);
        let mut missing = Vec::new();
        let mut required = |name: &str| match find(name) {
            Some(i) => i,
            None => {
                missing.push(name.to_string());
                usize::MAX
            }
        };
        let index = ColumnIndex {
            age: required(&map.age),
            sex: required(&map.sex),
            race: required(&map.race),
            priors_count: required(&map.priors_count),
            charge_degree: required(&map.charge_degree),
            days: required(&map.days_b_screening_arrest),
            outcome: required(&map.outcome),
            decile: required(&map.decile_score),
            id: find(&map.id),
            juv: [
                find(&map.juv_fel_count),
                find(&map.juv_misd_count),
                find(&map.juv_other_count),
            ],
        };
        if missing.is_empty() {
            Ok(index)
        } else {
            Err(Error::Schema(missing))
        }
    }

    fn parse(&self, row: &csv::StringRecord, line: usize) -> Option<Record> {
        let field = |i: usize| row.get(i).map(str::trim);
        let integer = |s: &str| -> Option<i64> {
            s.parse::<i64>().ok().or_else(|| {
                let v = s.parse::<f64>().ok()?;
                (v.fract() == 0.0 && v.abs() < 1e15).then_some(v as i64)
            })
        };
        let count = |s: &str| integer(s).and_then(|v| u32::try_from(v).ok());

        let age = integer(field(self.age)?).filter(|&a| a >= 0)?;
        let sex = field(self.sex)?.parse().ok()?;
        let race = field(self.race)?.to_string();
        if race.is_empty() {
            return None;
        }
        let priors_count = count(field(self.priors_count)?)?;
        let charge_degree = field(self.charge_degree)?.parse().ok()?;
        let mut juv = [0u32; 3];
        for (slot, col) in juv.iter_mut().zip(self.juv) {
            if let Some(col) = col {
                *slot = count(field(col)?)?;
            }
        }
        let days_b_screening_arrest = match field(self.days)? {
            "" | "NA" => None,
            s => Some(integer(s)?),
        };
        let outcome = match field(self.outcome)? {
            "0" => 0,
            "1" => 1,
            _ => return None,
        };
        let decile_score = field(self.decile)
            .and_then(integer)
            .filter(|d| (1..=10).contains(d))
            .map(|d| d as u8);
        let id = match self.id.and_then(field) {
            Some(id) if !id.is_empty() => id.to_string(),
            _ => line.to_string(),
        };
        Some(Record {
            id,
            age,
            sex,
            race,
            priors_count,
            charge_degree,
            juv_fel_count: juv[0],
            juv_misd_count: juv[1],
            juv_other_count: juv[2],
            days_b_screening_arrest,
            outcome,
            decile_score,
        })
    }
}

/// Reads a comma-separated file with a header row using the default column names.
pub fn load_records(path: impl AsRef<Path>) -> Result<RecordTable> {
    load_records_with(path, &ColumnMap::default())
}

pub fn load_records_with(path: impl AsRef<Path>, columns: &ColumnMap) -> Result<RecordTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_records(file, columns)
}

/// Parses records from any reader. Rows whose required fields fail to parse
/// are dropped and counted in [`RecordTable::dropped`].
pub fn read_records<R: std::io::Read>(reader: R, columns: &ColumnMap) -> Result<RecordTable> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = csv.headers()?.clone();
    if headers.is_empty() || headers.iter().all(|h| h.trim().is_empty()) {
        return Err(Error::Format("file is empty (no header row)".into()));
    }
    let index = ColumnIndex::resolve(&headers, columns)?;
    let mut table = RecordTable::default();
    for (i, row) in csv.records().enumerate() {
        let parsed = row.ok().and_then(|row| index.parse(&row, i + 1));
        match parsed {
            Some(record) => table.records.push(record),
            None => table.dropped += 1,
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupAttribute {
    Race,
    Sex,
}

impl GroupAttribute {
    pub fn column_name(self) -> &'static str {
        match self {
            GroupAttribute::Race => "race",
            GroupAttribute::Sex => "sex",
        }
    }
}

impl fmt::Display for GroupAttribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column_name())
    }
}

/// Which records form the analysed cohort.
///
/// The order of `allowed_races` is significant: when race is the group
/// attribute it fixes the group ids (first entry is group 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CohortPolicy {
    pub allowed_races: Vec<String>,
    pub age_min: i64,
    pub age_max: i64,
    pub group_attribute: GroupAttribute,
    /// |days between screening and arrest| <= 30 and no ordinary traffic charges.
    pub apply_screening_window: bool,
}

impl Default for CohortPolicy {
    fn default() -> Self {
        Self {
            allowed_races: vec!["African-American".into(), "Caucasian".into()],
            age_min: 18,
            age_max: 40,
            group_attribute: GroupAttribute::Race,
            apply_screening_window: true,
        }
    }
}

impl CohortPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.age_min > self.age_max {
            return Err(Error::InvalidPolicy(format!(
                "age_min {} exceeds age_max {}",
                self.age_min, self.age_max
            )));
        }
        if self.group_attribute == GroupAttribute::Race && self.allowed_races.is_empty() {
            return Err(Error::InvalidPolicy(
                "allowed_races must be non-empty when race is the group attribute".into(),
            ));
        }
        let unique: BTreeSet<_> = self.allowed_races.iter().collect();
        if unique.len() != self.allowed_races.len() {
            return Err(Error::InvalidPolicy("allowed_races has duplicates".into()));
        }
        Ok(())
    }

    /// Group levels in group-id order.
    pub fn group_levels(&self) -> Vec<String> {
        match self.group_attribute {
            GroupAttribute::Race => self.allowed_races.clone(),
            GroupAttribute::Sex => vec![Sex::Male.as_str().into(), Sex::Female.as_str().into()],
        }
    }

    fn admits_race(&self, record: &Record) -> bool {
        self.group_attribute != GroupAttribute::Race || self.allowed_races.contains(&record.race)
    }

    fn admits_age(&self, record: &Record) -> bool {
        (self.age_min..=self.age_max).contains(&record.age)
    }

    fn admits_screening(&self, record: &Record) -> bool {
        !self.apply_screening_window
            || (record
                .days_b_screening_arrest
                .is_some_and(|d| d.abs() <= 30)
                && record.charge_degree != ChargeDegree::OrdinaryTraffic)
    }
}

/// Row count remaining after one filter stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterStage {
    pub stage: String,
    pub remaining: usize,
}

pub fn filter_cohort(table: &RecordTable, policy: &CohortPolicy) -> Result<RecordTable> {
    filter_cohort_staged(table, policy).map(|(table, _)| table)
}

type RecordFilter = fn(&CohortPolicy, &Record) -> bool;

/// Like [`filter_cohort`], also reporting the count after each stage
/// (`loaded`, `race`, `age`, `screening_window`).
pub fn filter_cohort_staged(
    table: &RecordTable,
    policy: &CohortPolicy,
) -> Result<(RecordTable, Vec<FilterStage>)> {
    policy.validate()?;
    let mut stages = vec![FilterStage {
        stage: "loaded".into(),
        remaining: table.len(),
    }];
    let mut kept: Vec<&Record> = table.records.iter().collect();
    let filters: [(&str, RecordFilter); 3] = [
        ("race", CohortPolicy::admits_race),
        ("age", CohortPolicy::admits_age),
        ("screening_window", CohortPolicy::admits_screening),
    ];
    for (stage, admits) in filters {
        kept.retain(|r| admits(policy, r));
        stages.push(FilterStage {
            stage: stage.into(),
            remaining: kept.len(),
        });
    }
    if kept.is_empty() {
        return Err(Error::EmptyCohort);
    }
    let filtered = RecordTable {
        records: kept.into_iter().cloned().collect(),
        dropped: table.dropped,
    };
    Ok((filtered, stages))
}

/// Record fields usable as model inputs. `decile_score` is deliberately absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Feature {
    #[serde(rename = "age")]
    Age,
    #[serde(rename = "priors_count")]
    PriorsCount,
    #[serde(rename = "juv_fel_count")]
    JuvFelCount,
    #[serde(rename = "juv_misd_count")]
    JuvMisdCount,
    #[serde(rename = "juv_other_count")]
    JuvOtherCount,
    #[serde(rename = "c_charge_degree")]
    ChargeDegree,
    #[serde(rename = "sex")]
    Sex,
    #[serde(rename = "race")]
    Race,
}

impl Feature {
    pub const ALL: [Feature; 8] = [
        Feature::Age,
        Feature::PriorsCount,
        Feature::JuvFelCount,
        Feature::JuvMisdCount,
        Feature::JuvOtherCount,
        Feature::ChargeDegree,
        Feature::Sex,
        Feature::Race,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::Age => "age",
            Feature::PriorsCount => "priors_count",
            Feature::JuvFelCount => "juv_fel_count",
            Feature::JuvMisdCount => "juv_misd_count",
            Feature::JuvOtherCount => "juv_other_count",
            Feature::ChargeDegree => "c_charge_degree",
            Feature::Sex => "sex",
            Feature::Race => "race",
        }
    }

    pub fn is_numeric(self) -> bool {
        !matches!(self, Feature::ChargeDegree | Feature::Sex | Feature::Race)
    }

    fn numeric_value(self, r: &Record) -> f64 {
        match self {
            Feature::Age => r.age as f64,
            Feature::PriorsCount => r.priors_count as f64,
            Feature::JuvFelCount => r.juv_fel_count as f64,
            Feature::JuvMisdCount => r.juv_misd_count as f64,
            Feature::JuvOtherCount => r.juv_other_count as f64,
            _ => unreachable!("{} is categorical", self.name()),
        }
    }

    fn level(self, r: &Record) -> &str {
        match self {
            Feature::ChargeDegree => r.charge_degree.as_str(),
            Feature::Sex => r.sex.as_str(),
            Feature::Race => &r.race,
            _ => unreachable!("{} is numeric", self.name()),
        }
    }

    fn derives_from(self, attribute: GroupAttribute) -> bool {
        matches!(
            (self, attribute),
            (Feature::Race, GroupAttribute::Race) | (Feature::Sex, GroupAttribute::Sex)
        )
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Feature::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownVariable(s.to_string()))
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which record fields become columns, and how groups are assigned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    /// Standardized columns.
    pub numeric: Vec<Feature>,
    /// One-hot columns, one indicator per level.
    pub categorical: Vec<Feature>,
    pub group_attribute: GroupAttribute,
    /// Group levels in id order; record level `group_levels[g]` gets id `g`.
    pub group_levels: Vec<String>,
}

impl FeatureSchema {
    /// Age, priors, juvenile counts, charge degree, plus sex when race is the
    /// group attribute.
    pub fn default_for(policy: &CohortPolicy) -> Self {
        let mut categorical = vec![Feature::ChargeDegree];
        if policy.group_attribute == GroupAttribute::Race {
            categorical.push(Feature::Sex);
        }
        Self {
            numeric: vec![
                Feature::Age,
                Feature::PriorsCount,
                Feature::JuvFelCount,
                Feature::JuvMisdCount,
                Feature::JuvOtherCount,
            ],
            categorical,
            group_attribute: policy.group_attribute,
            group_levels: policy.group_levels(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for &f in self.numeric.iter().chain(&self.categorical) {
            if !seen.insert(f.name()) {
                return Err(Error::InvalidSchema(format!("{f} listed twice")));
            }
            if f.derives_from(self.group_attribute) {
                return Err(Error::InvalidSchema(format!(
                    "{f} is the group attribute and cannot be a feature"
                )));
            }
        }
        if let Some(f) = self.numeric.iter().find(|f| !f.is_numeric()) {
            return Err(Error::InvalidSchema(format!("{f} is categorical")));
        }
        if let Some(f) = self.categorical.iter().find(|f| f.is_numeric()) {
            return Err(Error::InvalidSchema(format!("{f} is numeric")));
        }
        if self.group_levels.is_empty() {
            return Err(Error::InvalidSchema("no group levels".into()));
        }
        let unique: BTreeSet<_> = self.group_levels.iter().collect();
        if unique.len() != self.group_levels.len() {
            return Err(Error::InvalidSchema("duplicate group levels".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericStat {
    pub name: String,
    pub mean: f64,
    /// Population (1/n) standard deviation.
    pub sd: f64,
}

impl NumericStat {
    fn is_constant(&self) -> bool {
        self.sd <= CONSTANT_SD * self.mean.abs().max(1.0)
    }

    pub fn apply(&self, x: f64) -> f64 {
        if self.is_constant() {
            0.0
        } else {
            (x - self.mean) / self.sd
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalLevels {
    pub name: String,
    pub levels: Vec<String>,
}

/// Statistics fitted on the training rows and reused unchanged for test rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingStats {
    pub numeric: Vec<NumericStat>,
    pub categorical: Vec<CategoricalLevels>,
}

impl EncodingStats {
    pub fn fit(table: &RecordTable, schema: &FeatureSchema) -> Self {
        let numeric = schema
            .numeric
            .iter()
            .map(|&f| {
                let column: Vec<f64> = table.records.iter().map(|r| f.numeric_value(r)).collect();
                let (mean, sd) = mean_and_population_sd(&column);
                NumericStat {
                    name: f.name().into(),
                    mean,
                    sd,
                }
            })
            .collect();
        let categorical = schema
            .categorical
            .iter()
            .map(|&f| {
                let levels: BTreeSet<&str> = table.records.iter().map(|r| f.level(r)).collect();
                CategoricalLevels {
                    name: f.name().into(),
                    levels: levels.into_iter().map(String::from).collect(),
                }
            })
            .collect();
        Self {
            numeric,
            categorical,
        }
    }

    fn check_against(&self, schema: &FeatureSchema) -> Result<()> {
        let numeric_match = self.numeric.len() == schema.numeric.len()
            && self
                .numeric
                .iter()
                .zip(&schema.numeric)
                .all(|(s, f)| s.name == f.name());
        let categorical_match = self.categorical.len() == schema.categorical.len()
            && self
                .categorical
                .iter()
                .zip(&schema.categorical)
                .all(|(s, f)| s.name == f.name());
        if numeric_match && categorical_match {
            Ok(())
        } else {
            Err(Error::InvalidSchema(
                "encoding statistics do not match the feature schema".into(),
            ))
        }
    }

    pub fn column_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.numeric.iter().map(|s| s.name.clone()).collect();
        for c in &self.categorical {
            names.extend(c.levels.iter().map(|l| format!("{}={}", c.name, l)));
        }
        names
    }
}

pub(crate) fn mean_and_population_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Dense row-major design matrix with group ids and binary labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
    pub column_names: Vec<String>,
    pub group_ids: Vec<usize>,
    pub labels: Vec<u8>,
    /// `group_names[g]` names group id `g`.
    pub group_names: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(
        values: Vec<f64>,
        cols: usize,
        column_names: Vec<String>,
        group_ids: Vec<usize>,
        labels: Vec<u8>,
        group_names: Vec<String>,
    ) -> Result<Self> {
        let rows = labels.len();
        if group_ids.len() != rows {
            return Err(Error::Dimension(format!(
                "{} group ids for {} labels",
                group_ids.len(),
                rows
            )));
        }
        if values.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} values cannot fill {rows}x{cols}",
                values.len()
            )));
        }
        if column_names.len() != cols {
            return Err(Error::Dimension(format!(
                "{} column names for {cols} columns",
                column_names.len()
            )));
        }
        if let Some(&g) = group_ids.iter().find(|&&g| g >= group_names.len()) {
            return Err(Error::Dimension(format!(
                "group id {g} but only {} group names",
                group_names.len()
            )));
        }
        if labels.iter().any(|&y| y > 1) {
            return Err(Error::InvalidArgument("labels must be 0 or 1".into()));
        }
        Ok(Self {
            rows,
            cols,
            values,
            column_names,
            group_ids,
            labels,
            group_names,
        })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn n_groups(&self) -> usize {
        self.group_names.len()
    }

    /// Copies the given rows, in the given order.
    pub fn select(&self, rows: &[usize]) -> FeatureMatrix {
        let mut values = Vec::with_capacity(rows.len() * self.cols);
        for &i in rows {
            values.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            rows: rows.len(),
            cols: self.cols,
            values,
            column_names: self.column_names.clone(),
            group_ids: rows.iter().map(|&i| self.group_ids[i]).collect(),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            group_names: self.group_names.clone(),
        }
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_groups()];
        for &g in &self.group_ids {
            sizes[g] += 1;
        }
        sizes
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Encoded {
    pub matrix: FeatureMatrix,
    /// The statistics used: freshly fitted, or the ones passed in.
    pub stats: EncodingStats,
    /// Categorical values not seen when the statistics were fitted; they
    /// encode as all-zero indicators.
    pub unseen_levels: usize,
}

/// Encodes records into a [`FeatureMatrix`]. With `stats = None` the
/// statistics are fitted on `table` itself.
pub fn encode_features(
    table: &RecordTable,
    schema: &FeatureSchema,
    stats: Option<&EncodingStats>,
) -> Result<Encoded> {
    schema.validate()?;
    let stats = match stats {
        Some(s) => {
            s.check_against(schema)?;
            s.clone()
        }
        None => EncodingStats::fit(table, schema),
    };
    let column_names = stats.column_names();
    let cols = column_names.len();
    let mut values = Vec::with_capacity(table.len() * cols);
    let mut group_ids = Vec::with_capacity(table.len());
    let mut unseen_levels = 0;
    for r in &table.records {
        let level = r.group_level(schema.group_attribute);
        let g = schema
            .group_levels
            .iter()
            .position(|l| l == level)
            .ok_or_else(|| Error::UnknownGroup(level.to_string()))?;
        group_ids.push(g);
        for (f, stat) in schema.numeric.iter().zip(&stats.numeric) {
            values.push(stat.apply(f.numeric_value(r)));
        }
        for (f, cat) in schema.categorical.iter().zip(&stats.categorical) {
            let level = f.level(r);
            let hit = cat.levels.iter().position(|l| l == level);
            if hit.is_none() {
                unseen_levels += 1;
            }
            values.extend((0..cat.levels.len()).map(|i| if Some(i) == hit { 1.0 } else { 0.0 }));
        }
    }
    let labels = table.records.iter().map(|r| r.outcome).collect();
    let matrix = FeatureMatrix::new(
        values,
        cols,
        column_names,
        group_ids,
        labels,
        schema.group_levels.clone(),
    )?;
    Ok(Encoded {
        matrix,
        stats,
        unseen_levels,
    })
}

/// Row indices `(first, second)` of a split stratified jointly on
/// `(group, label)`; `second` receives `round(fraction * cell size)` rows of
/// every cell, clamped so both sides keep at least one. Both index lists are
/// ascending.
pub fn stratified_partition(
    group_ids: &[usize],
    labels: &[u8],
    fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "split fraction {fraction} is not in (0, 1)"
        )));
    }
    if group_ids.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} group ids for {} labels",
            group_ids.len(),
            labels.len()
        )));
    }
    let mut cells: BTreeMap<(usize, u8), Vec<usize>> = BTreeMap::new();
    for (i, (&g, &y)) in group_ids.iter().zip(labels).enumerate() {
        cells.entry((g, y)).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut first = Vec::new();
    let mut second = Vec::new();
    for ((group, label), mut rows) in cells {
        let count = rows.len();
        if count < 2 {
            return Err(Error::Stratification {
                group,
                label,
                count,
            });
        }
        rows.shuffle(&mut rng);
        let take = ((count as f64 * fraction).round() as usize).clamp(1, count - 1);
        second.extend_from_slice(&rows[..take]);
        first.extend_from_slice(&rows[take..]);
    }
    first.sort_unstable();
    second.sort_unstable();
    Ok((first, second))
}

/// Stratified `(train, test)` split.
pub fn split(
    matrix: &FeatureMatrix,
    test_fraction: f64,
    seed: u64,
) -> Result<(FeatureMatrix, FeatureMatrix)> {
    let (train, test) =
        stratified_partition(&matrix.group_ids, &matrix.labels, test_fraction, seed)?;
    Ok((matrix.select(&train), matrix.select(&test)))
}

/// Counts behind the cohort histograms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSummary {
    pub total: usize,
    pub by_race: BTreeMap<String, usize>,
    pub by_sex: BTreeMap<String, usize>,
    /// Records per year of age.
    pub age_histogram: BTreeMap<i64, usize>,
    pub by_outcome: BTreeMap<String, usize>,
}

impl CohortSummary {
    /// Races ordered by descending count (ties by name).
    pub fn races_by_size(&self) -> Vec<(&str, usize)> {
        let mut races: Vec<_> = self.by_race.iter().map(|(r, &c)| (r.as_str(), c)).collect();
        races.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        races
    }
}

pub fn cohort_summary(table: &RecordTable) -> CohortSummary {
    let mut by_race = BTreeMap::new();
    let mut by_sex: BTreeMap<String, usize> = [Sex::Male, Sex::Female]
        .iter()
        .map(|s| (s.as_str().to_string(), 0))
        .collect();
    let mut by_outcome: BTreeMap<String, usize> = [("0".to_string(), 0), ("1".to_string(), 0)]
        .into_iter()
        .collect();
    let mut age_histogram = BTreeMap::new();
    for r in &table.records {
        *by_race.entry(r.race.clone()).or_insert(0) += 1;
        *by_sex.entry(r.sex.as_str().to_string()).or_insert(0) += 1;
        *by_outcome.entry(r.outcome.to_string()).or_insert(0) += 1;
        *age_histogram.entry(r.age).or_insert(0) += 1;
    }
    CohortSummary {
        total: table.len(),
        by_race,
        by_sex,
        age_histogram,
        by_outcome,
    }
}

/// Writes records as comma-separated text with the default (ProPublica)
/// column names.
pub fn write_records<W: std::io::Write>(table: &RecordTable, writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "id",
        "sex",
        "age",
        "race",
        "juv_fel_count",
        "decile_score",
        "juv_misd_count",
        "juv_other_count",
        "priors_count",
        "days_b_screening_arrest",
        "c_charge_degree",
        "two_year_recid",
    ])?;
    for r in &table.records {
        w.write_record([
            r.id.clone(),
            r.sex.as_str().to_string(),
            r.age.to_string(),
            r.race.clone(),
            r.juv_fel_count.to_string(),
            r.decile_score.map(|d| d.to_string()).unwrap_or_default(),
            r.juv_misd_count.to_string(),
            r.juv_other_count.to_string(),
            r.priors_count.to_string(),
            r.days_b_screening_arrest
                .map(|d| d.to_string())
                .unwrap_or_default(),
            r.charge_degree.as_str().to_string(),
            r.outcome.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, age: i64, sex: Sex, race: &str, outcome: u8) -> Record {
        Record {
            id: id.into(),
            age,
            sex,
            race: race.into(),
            priors_count: 0,
            charge_degree: ChargeDegree::Felony,
            juv_fel_count: 0,
            juv_misd_count: 0,
            juv_other_count: 0,
            days_b_screening_arrest: Some(0),
            outcome,
            decile_score: Some(5),
        }
    }

    const HEADER: &str = "id,age,sex,race,priors_count,c_charge_degree,juv_fel_count,juv_misd_count,juv_other_count,days_b_screening_arrest,two_year_recid,decile_score";

    fn read(text: &str) -> Result<RecordTable> {
        read_records(text.as_bytes(), &ColumnMap::default())
    }

    #[test]
    fn header_only_gives_empty_table() {
        let table = read(&format!("{HEADER}\n")).unwrap();
        assert!(table.is_empty());
        assert_eq!(table.dropped, 0);
    }

    #[test]
    fn empty_file_is_format_error() {
        assert!(matches!(read(""), Err(Error::Format(_))));
    }

    #[test]
    fn missing_columns_are_named() {
        let err = read("id,age,sex\n1,30,Male\n").unwrap_err();
        match err {
            Error::Schema(cols) => {
                assert!(cols.contains(&"race".to_string()));
                assert!(cols.contains(&"two_year_recid".to_string()));
                assert!(!cols.contains(&"age".to_string()));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unparseable_rows_are_dropped_and_counted() {
        let text = format!(
            "{HEADER}\n1,30,Male,Caucasian,2,F,0,0,0,-1,1,4\n2,abc,Male,Caucasian,2,F,0,0,0,-1,1,4\n3,25,Female,Other,0,M,0,0,0,,2,1\n"
        );
        let table = read(&text).unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(table.dropped, 2);
    }

    #[test]
    fn blank_screening_days_is_absent() {
        let text = format!("{HEADER}\n1,30,Male,Caucasian,2,F,0,0,0,,1,4\n");
        let table = read(&text).unwrap();
        assert_eq!(table.records[0].days_b_screening_arrest, None);
    }

    #[test]
    fn duplicate_header_uses_first_occurrence() {
        let text = "id,age,sex,race,priors_count,c_charge_degree,days_b_screening_arrest,decile_score,two_year_recid,decile_score\n\
                    9,22,Female,Caucasian,1,M,0,3,0,8\n";
        let table = read(text).unwrap();
        assert_eq!(table.records[0].decile_score, Some(3));
        // juvenile columns are optional
        assert_eq!(table.records[0].juv_fel_count, 0);
    }

    #[test]
    fn identity_policy_is_noop() {
        let table = RecordTable::new(vec![
            record("a", 17, Sex::Male, "Asian", 1),
            record("b", 50, Sex::Female, "Caucasian", 0),
        ]);
        let policy = CohortPolicy {
            allowed_races: vec!["Asian".into(), "Caucasian".into()],
            age_min: 0,
            age_max: 200,
            group_attribute: GroupAttribute::Race,
            apply_screening_window: false,
        };
        assert_eq!(filter_cohort(&table, &policy).unwrap(), table);
    }

    #[test]
    fn age_bounds_are_inclusive() {
        let table = RecordTable::new(
            [17, 18, 40, 41]
                .iter()
                .map(|&a| record(&a.to_string(), a, Sex::Male, "Caucasian", 0))
                .collect(),
        );
        let policy = CohortPolicy {
            apply_screening_window: false,
            ..CohortPolicy::default()
        };
        let out = filter_cohort(&table, &policy).unwrap();
        let ages: Vec<i64> = out.records.iter().map(|r| r.age).collect();
        assert_eq!(ages, vec![18, 40]);
    }

    #[test]
    fn screening_window_drops_far_dates_and_traffic() {
        let mut far = record("far", 30, Sex::Male, "Caucasian", 0);
        far.days_b_screening_arrest = Some(31);
        let mut missing = record("missing", 30, Sex::Male, "Caucasian", 0);
        missing.days_b_screening_arrest = None;
        let mut traffic = record("traffic", 30, Sex::Male, "Caucasian", 0);
        traffic.charge_degree = ChargeDegree::OrdinaryTraffic;
        let mut edge = record("edge", 30, Sex::Male, "Caucasian", 0);
        edge.days_b_screening_arrest = Some(-30);
        let table = RecordTable::new(vec![far, missing, traffic, edge]);
        let (out, stages) = filter_cohort_staged(&table, &CohortPolicy::default()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].id, "edge");
        assert_eq!(stages.last().unwrap().remaining, 1);
        assert_eq!(stages[0].remaining, 4);
    }

    #[test]
    fn filtering_everything_is_an_error() {
        let table = RecordTable::new(vec![record("a", 70, Sex::Male, "Caucasian", 0)]);
        assert!(matches!(
            filter_cohort(&table, &CohortPolicy::default()),
            Err(Error::EmptyCohort)
        ));
    }

    #[test]
    fn invalid_policies_are_rejected() {
        let inverted = CohortPolicy {
            age_min: 50,
            age_max: 10,
            ..CohortPolicy::default()
        };
        assert!(matches!(inverted.validate(), Err(Error::InvalidPolicy(_))));
        let no_races = CohortPolicy {
            allowed_races: vec![],
            ..CohortPolicy::default()
        };
        assert!(no_races.validate().is_err());
        let sex_no_races = CohortPolicy {
            group_attribute: GroupAttribute::Sex,
            ..no_races
        };
        assert!(sex_no_races.validate().is_ok());
    }

    #[test]
    fn sex_group_keeps_every_race() {
        let table = RecordTable::new(vec![
            record("a", 20, Sex::Male, "Asian", 0),
            record("b", 20, Sex::Female, "Other", 1),
        ]);
        let policy = CohortPolicy {
            group_attribute: GroupAttribute::Sex,
            apply_screening_window: false,
            ..CohortPolicy::default()
        };
        assert_eq!(filter_cohort(&table, &policy).unwrap().len(), 2);
    }

    fn numeric_only(feature: Feature, values: &[i64]) -> (RecordTable, FeatureSchema) {
        let records = values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let mut r = record(&i.to_string(), 30, Sex::Male, "Caucasian", (i % 2) as u8);
                match feature {
                    Feature::Age => r.age = v,
                    Feature::PriorsCount => r.priors_count = v as u32,
                    _ => unreachable!(),
                }
                r
            })
            .collect();
        let schema = FeatureSchema {
            numeric: vec![feature],
            categorical: vec![],
            group_attribute: GroupAttribute::Race,
            group_levels: vec!["Caucasian".into()],
        };
        (RecordTable::new(records), schema)
    }

    #[test]
    fn standardizes_with_population_sd() {
        let (table, schema) = numeric_only(Feature::PriorsCount, &[1, 2, 3]);
        let enc = encode_features(&table, &schema, None).unwrap();
        let expected = 1.0 / (2.0f64 / 3.0).sqrt();
        assert!((enc.matrix.values[0] + expected).abs() < 1e-12);
        assert!(enc.matrix.values[1].abs() < 1e-12);
        assert!((enc.matrix.values[2] - expected).abs() < 1e-12);
        assert!((expected - 1.224744871391589).abs() < 1e-12);
    }

    #[test]
    fn constant_column_encodes_to_zero() {
        let (table, schema) = numeric_only(Feature::Age, &[5, 5, 5]);
        let enc = encode_features(&table, &schema, None).unwrap();
        assert_eq!(enc.matrix.values, vec![0.0; 3]);
    }

    #[test]
    fn one_hot_rows_sum_to_one_and_unseen_levels_are_zero() {
        let mut records: Vec<Record> = (0..4)
            .map(|i| record(&i.to_string(), 30, Sex::Male, "Caucasian", 0))
            .collect();
        records[1].charge_degree = ChargeDegree::Misdemeanor;
        let table = RecordTable::new(records);
        let schema = FeatureSchema {
            numeric: vec![],
            categorical: vec![Feature::ChargeDegree],
            group_attribute: GroupAttribute::Race,
            group_levels: vec!["Caucasian".into()],
        };
        let enc = encode_features(&table, &schema, None).unwrap();
        assert_eq!(
            enc.matrix.column_names,
            vec!["c_charge_degree=F", "c_charge_degree=M"]
        );
        for i in 0..4 {
            assert_eq!(enc.matrix.row(i).iter().sum::<f64>(), 1.0);
        }

        let mut other = record("x", 30, Sex::Male, "Caucasian", 0);
        other.charge_degree = ChargeDegree::OrdinaryTraffic;
        let applied =
            encode_features(&RecordTable::new(vec![other]), &schema, Some(&enc.stats)).unwrap();
        assert_eq!(applied.matrix.values, vec![0.0, 0.0]);
        assert_eq!(applied.unseen_levels, 1);
    }

    #[test]
    fn schema_rejects_group_attribute_and_decile() {
        let mut schema = FeatureSchema::default_for(&CohortPolicy::default());
        schema.categorical.push(Feature::Race);
        assert!(matches!(schema.validate(), Err(Error::InvalidSchema(_))));
        assert!("decile_score".parse::<Feature>().is_err());

        let sex_policy = CohortPolicy {
            group_attribute: GroupAttribute::Sex,
            ..CohortPolicy::default()
        };
        let sex_schema = FeatureSchema::default_for(&sex_policy);
        assert!(!sex_schema.categorical.contains(&Feature::Sex));
        sex_schema.validate().unwrap();
    }

    #[test]
    fn default_schema_has_no_race_columns() {
        let policy = CohortPolicy::default();
        let table = RecordTable::new(vec![
            record("a", 20, Sex::Male, "African-American", 1),
            record("b", 30, Sex::Female, "Caucasian", 0),
        ]);
        let enc = encode_features(&table, &FeatureSchema::default_for(&policy), None).unwrap();
        assert!(enc
            .matrix
            .column_names
            .iter()
            .all(|c| !c.starts_with("race")));
        assert_eq!(enc.matrix.group_ids, vec![0, 1]);
        assert_eq!(
            enc.matrix.group_names,
            vec!["African-American", "Caucasian"]
        );
    }

    #[test]
    fn unknown_group_level_is_an_error() {
        let table = RecordTable::new(vec![record("a", 20, Sex::Male, "Asian", 1)]);
        let schema = FeatureSchema::default_for(&CohortPolicy::default());
        assert!(matches!(
            encode_features(&table, &schema, None),
            Err(Error::UnknownGroup(_))
        ));
    }

    fn cells_matrix(per_cell: usize) -> FeatureMatrix {
        let mut groups = Vec::new();
        let mut labels = Vec::new();
        for g in 0..2 {
            for y in 0..2u8 {
                for _ in 0..per_cell {
                    groups.push(g);
                    labels.push(y);
                }
            }
        }
        let n = labels.len();
        FeatureMatrix::new(
            (0..n).map(|i| i as f64).collect(),
            1,
            vec!["x".into()],
            groups,
            labels,
            vec!["a".into(), "b".into()],
        )
        .unwrap()
    }

    #[test]
    fn split_is_exactly_stratified() {
        let m = cells_matrix(25);
        let (train, test) = split(&m, 0.2, 7).unwrap();
        assert_eq!(test.rows, 20);
        assert_eq!(train.rows, 80);
        for g in 0..2 {
            for y in 0..2u8 {
                let count = (0..test.rows)
                    .filter(|&i| test.group_ids[i] == g && test.labels[i] == y)
                    .count();
                assert_eq!(count, 5);
            }
        }
    }

    #[test]
    fn split_depends_on_seed() {
        let m = cells_matrix(25);
        let (_, a) = split(&m, 0.2, 7).unwrap();
        let (_, b) = split(&m, 0.2, 7).unwrap();
        let (_, c) = split(&m, 0.2, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn tiny_cell_cannot_be_stratified() {
        let m = FeatureMatrix::new(
            vec![0.0; 3],
            1,
            vec!["x".into()],
            vec![0, 0, 0],
            vec![0, 0, 1],
            vec!["a".into()],
        )
        .unwrap();
        assert!(matches!(
            split(&m, 0.5, 1),
            Err(Error::Stratification {
                group: 0,
                label: 1,
                count: 1
            })
        ));
    }

    #[test]
    fn summary_of_empty_table_is_all_zero() {
        let s = cohort_summary(&RecordTable::default());
        assert_eq!(s.total, 0);
        assert!(s.by_race.is_empty());
        assert!(s.by_sex.values().all(|&c| c == 0));
        assert!(s.age_histogram.is_empty());
    }

    #[test]
    fn summary_orders_races_by_size() {
        let table = RecordTable::new(vec![
            record("a", 20, Sex::Male, "Caucasian", 0),
            record("b", 20, Sex::Male, "African-American", 0),
            record("c", 21, Sex::Female, "African-American", 1),
            record("d", 22, Sex::Female, "Asian", 1),
        ]);
        let s = cohort_summary(&table);
        let races = s.races_by_size();
        assert_eq!(races[0], ("African-American", 2));
        assert_eq!(races[1].0, "Asian");
        assert_eq!(s.age_histogram[&20], 2);
    }
}
