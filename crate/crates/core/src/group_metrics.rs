//! Per-group confusion counts and the sixteen two-group fairness notions.
//!
//! Subscript 0 in every formula is group id 0 (the protected group), subscript
//! 1 is group id 1 (the reference group). Ratio notions put group 0 in the
//! numerator; difference notions subtract group 1 from group 0.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl GroupCounts {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        Self { tp, fp, tn, fn_ }
    }

    pub fn n(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn correct(&self) -> u64 {
        self.tp + self.tn
    }

    /// `None` for an empty group.
    pub fn accuracy(&self) -> Option<f64> {
        rate(self.correct(), self.n())
    }

    fn scaled(&self, k: u64) -> Self {
        Self::new(self.tp * k, self.fp * k, self.tn * k, self.fn_ * k)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupConfusion {
    pub groups: Vec<GroupCounts>,
}

impl GroupConfusion {
    pub fn new(groups: Vec<GroupCounts>) -> Self {
        Self { groups }
    }

    pub fn two(group0: GroupCounts, group1: GroupCounts) -> Self {
        Self::new(vec![group0, group1])
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn total(&self) -> u64 {
        self.groups.iter().map(GroupCounts::n).sum()
    }

    /// `None` when no sample was counted.
    pub fn accuracy(&self) -> Option<f64> {
        rate(
            self.groups.iter().map(GroupCounts::correct).sum(),
            self.total(),
        )
    }

    /// Same counts with the group order reversed.
    pub fn swapped(&self) -> Self {
        Self::new(self.groups.iter().rev().copied().collect())
    }

    /// Every count multiplied by `k`.
    pub fn scaled(&self, k: u64) -> Self {
        Self::new(self.groups.iter().map(|g| g.scaled(k)).collect())
    }

    fn pair(&self) -> Result<(&GroupCounts, &GroupCounts)> {
        match self.groups.as_slice() {
            [g0, g1] => Ok((g0, g1)),
            other => Err(Error::Arity(format!(
                "two-group fairness notions need exactly 2 groups, got {}",
                other.len()
            ))),
        }
    }
}

fn check_binary(name: &str, v: &[u8]) -> Result<()> {
    match v.iter().find(|&&x| x > 1) {
        Some(x) => Err(Error::InvalidArgument(format!(
            "{name} must be 0/1, found {x}"
        ))),
        None => Ok(()),
    }
}

/// Counts TP/FP/TN/FN per group. The group count is `max(groups) + 1` and
/// every id below it must occur.
pub fn confusion_by_group(
    predicted: &[u8],
    actual: &[u8],
    groups: &[usize],
) -> Result<GroupConfusion> {
    if predicted.len() != actual.len() || predicted.len() != groups.len() {
        return Err(Error::Dimension(format!(
            "predicted {}, actual {}, groups {}",
            predicted.len(),
            actual.len(),
            groups.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::Dimension("no samples".into()));
    }
    check_binary("predicted", predicted)?;
    check_binary("actual", actual)?;
    let n_groups = groups.iter().max().map_or(0, |&g| g + 1);
    let mut counts = vec![GroupCounts::default(); n_groups];
    for ((&p, &a), &g) in predicted.iter().zip(actual).zip(groups) {
        let c = &mut counts[g];
        match (p, a) {
            (1, 1) => c.tp += 1,
            (1, 0) => c.fp += 1,
            (0, 0) => c.tn += 1,
            _ => c.fn_ += 1,
        }
    }
    if let Some(g) = counts.iter().position(|c| c.n() == 0) {
        return Err(Error::EmptyGroup(g));
    }
    Ok(GroupConfusion::new(counts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NotionKind {
    Difference,
    Ratio,
}

impl NotionKind {
    pub fn ideal(self) -> f64 {
        match self {
            NotionKind::Difference => 0.0,
            NotionKind::Ratio => 1.0,
        }
    }
}

/// How a notion value is turned into a non-negative unfairness magnitude.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnfairnessScale {
    /// `|value - ideal|`.
    #[default]
    Absolute,
    /// `|ln value|` for ratio notions (symmetric under reciprocation),
    /// `|value|` for difference notions.
    LogRatio,
}

/// The sixteen notions `f1`..`f16`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FairnessNotion {
    #[serde(rename = "f1")]
    EqualizedOdds,
    #[serde(rename = "f2")]
    ErrorDifference,
    #[serde(rename = "f3")]
    ErrorRatio,
    #[serde(rename = "f4")]
    DiscoveryDifference,
    #[serde(rename = "f5")]
    DiscoveryRatio,
    #[serde(rename = "f6")]
    PredictiveEquality,
    #[serde(rename = "f7")]
    FprRatio,
    #[serde(rename = "f8")]
    ForDifference,
    #[serde(rename = "f9")]
    ForRatio,
    #[serde(rename = "f10")]
    DisparateImpact,
    #[serde(rename = "f11")]
    StatisticalParity,
    #[serde(rename = "f12")]
    EqualOpportunity,
    #[serde(rename = "f13")]
    FnrDifference,
    #[serde(rename = "f14")]
    FnrRatio,
    #[serde(rename = "f15")]
    AverageOddDifference,
    #[serde(rename = "f16")]
    PredictiveParity,
}

impl FairnessNotion {
    pub const ALL: [FairnessNotion; 16] = [
        FairnessNotion::EqualizedOdds,
        FairnessNotion::ErrorDifference,
        FairnessNotion::ErrorRatio,
        FairnessNotion::DiscoveryDifference,
        FairnessNotion::DiscoveryRatio,
        FairnessNotion::PredictiveEquality,
        FairnessNotion::FprRatio,
        FairnessNotion::ForDifference,
        FairnessNotion::ForRatio,
        FairnessNotion::DisparateImpact,
        FairnessNotion::StatisticalParity,
        FairnessNotion::EqualOpportunity,
        FairnessNotion::FnrDifference,
        FairnessNotion::FnrRatio,
        FairnessNotion::AverageOddDifference,
        FairnessNotion::PredictiveParity,
    ];

    /// Position in [`FairnessNotion::ALL`] (label number minus one).
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        const LABELS: [&str; 16] = [
            "f1", "f2", "f3", "f4", "f5", "f6", "f7", "f8", "f9", "f10", "f11", "f12", "f13",
            "f14", "f15", "f16",
        ];
        LABELS[self.index()]
    }

    pub fn name(self) -> &'static str {
        match self {
            FairnessNotion::EqualizedOdds => "Equalized Odds",
            FairnessNotion::ErrorDifference => "Error difference",
            FairnessNotion::ErrorRatio => "Error ratio",
            FairnessNotion::DiscoveryDifference => "Discovery difference",
            FairnessNotion::DiscoveryRatio => "Discovery ratio",
            FairnessNotion::PredictiveEquality => "Predictive Equality",
            FairnessNotion::FprRatio => "FPR ratio",
            FairnessNotion::ForDifference => "FOR difference",
            FairnessNotion::ForRatio => "FOR ratio",
            FairnessNotion::DisparateImpact => "Disparate Impact",
            FairnessNotion::StatisticalParity => "Statistical Parity",
            FairnessNotion::EqualOpportunity => "Equal Opportunity",
            FairnessNotion::FnrDifference => "FNR difference",
            FairnessNotion::FnrRatio => "FNR ratio",
            FairnessNotion::AverageOddDifference => "Average odd difference",
            FairnessNotion::PredictiveParity => "Predictive Parity",
        }
    }

    pub fn kind(self) -> NotionKind {
        use FairnessNotion::*;
        match self {
            ErrorRatio | DiscoveryRatio | FprRatio | ForRatio | DisparateImpact | FnrRatio => {
                NotionKind::Ratio
            }
            _ => NotionKind::Difference,
        }
    }

    pub fn ideal(self) -> f64 {
        self.kind().ideal()
    }

    /// Distance of `value` from this notion's ideal.
    pub fn unfairness(self, value: f64, scale: UnfairnessScale) -> f64 {
        match (scale, self.kind()) {
            (UnfairnessScale::LogRatio, NotionKind::Ratio) => value.ln().abs(),
            _ => (value - self.ideal()).abs(),
        }
    }
}

impl fmt::Display for FairnessNotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for FairnessNotion {
    type Err = Error;

    /// Accepts a label (`f6`) or a name (`Predictive Equality`, case-insensitive).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        FairnessNotion::ALL
            .into_iter()
            .find(|n| n.label().eq_ignore_ascii_case(s) || n.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown fairness notion {s:?}")))
    }
}

fn rate(num: u64, den: u64) -> Option<f64> {
    (den != 0).then(|| num as f64 / den as f64)
}

fn ratio(num: Option<f64>, den: Option<f64>) -> Option<f64> {
    let (num, den) = (num?, den?);
    (den != 0.0).then(|| num / den)
}

fn diff(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some(a? - b?)
}

struct Rates {
    fpr: Option<f64>,
    tpr: Option<f64>,
    fnr: Option<f64>,
    fdr: Option<f64>,
    for_: Option<f64>,
    ppv: Option<f64>,
    positive_rate: Option<f64>,
}

impl Rates {
    fn of(c: &GroupCounts) -> Self {
        Self {
            fpr: rate(c.fp, c.fp + c.tn),
            tpr: rate(c.tp, c.tp + c.fn_),
            fnr: rate(c.fn_, c.fn_ + c.tp),
            fdr: rate(c.fp, c.tp + c.fp),
            for_: rate(c.fn_, c.tn + c.fn_),
            ppv: rate(c.tp, c.tp + c.fp),
            positive_rate: rate(c.tp + c.fp, c.n()),
        }
    }
}

/// Value of one notion; `Ok(None)` when a denominator in its formula is zero.
pub fn fairness_metric(gc: &GroupConfusion, notion: FairnessNotion) -> Result<Option<f64>> {
    let (c0, c1) = gc.pair()?;
    let (r0, r1) = (Rates::of(c0), Rates::of(c1));
    // f2/f3 normalize both groups' errors by the pooled size
    let pooled = c0.n() + c1.n();
    let err0 = rate(c0.fp + c0.fn_, pooled);
    let err1 = rate(c1.fp + c1.fn_, pooled);
    use FairnessNotion::*;
    let value = match notion {
        EqualizedOdds | AverageOddDifference => {
            let fpr = diff(r0.fpr, r1.fpr);
            let tpr = diff(r0.tpr, r1.tpr);
            fpr.zip(tpr).map(|(f, t)| 0.5 * (f + t))
        }
        ErrorDifference => diff(err0, err1),
        ErrorRatio => ratio(err0, err1),
        DiscoveryDifference => diff(r0.fdr, r1.fdr),
        DiscoveryRatio => ratio(r0.fdr, r1.fdr),
        PredictiveEquality => diff(r0.fpr, r1.fpr),
        FprRatio => ratio(r0.fpr, r1.fpr),
        ForDifference => diff(r0.for_, r1.for_),
        ForRatio => ratio(r0.for_, r1.for_),
        DisparateImpact => ratio(r0.positive_rate, r1.positive_rate),
        StatisticalParity => diff(r0.positive_rate, r1.positive_rate),
        EqualOpportunity => diff(r0.tpr, r1.tpr),
        FnrDifference => diff(r0.fnr, r1.fnr),
        FnrRatio => ratio(r0.fnr, r1.fnr),
        PredictiveParity => diff(r0.ppv, r1.ppv),
    };
    Ok(value)
}

/// `½(|ΔFPR| + |ΔTPR|)`, the absolute-value form of equalized odds common in
/// the literature. Not the `f1` formula.
pub fn absolute_equalized_odds(gc: &GroupConfusion) -> Result<Option<f64>> {
    let (c0, c1) = gc.pair()?;
    let (r0, r1) = (Rates::of(c0), Rates::of(c1));
    let fpr = diff(r0.fpr, r1.fpr);
    let tpr = diff(r0.tpr, r1.tpr);
    Ok(fpr.zip(tpr).map(|(f, t)| 0.5 * (f.abs() + t.abs())))
}

/// Error-rate difference with each group normalized by its own size,
/// `(FP₀+FN₀)/N₀ − (FP₁+FN₁)/N₁`. Not the `f2` formula.
pub fn per_group_error_difference(gc: &GroupConfusion) -> Result<Option<f64>> {
    let (c0, c1) = gc.pair()?;
    Ok(diff(
        rate(c0.fp + c0.fn_, c0.n()),
        rate(c1.fp + c1.fn_, c1.n()),
    ))
}

/// Ratio counterpart of [`per_group_error_difference`]. Not the `f3` formula.
pub fn per_group_error_ratio(gc: &GroupConfusion) -> Result<Option<f64>> {
    let (c0, c1) = gc.pair()?;
    Ok(ratio(
        rate(c0.fp + c0.fn_, c0.n()),
        rate(c1.fp + c1.fn_, c1.n()),
    ))
}

/// `acc(group 1) − acc(group 0)`.
pub fn accuracy_difference(gc: &GroupConfusion) -> Result<f64> {
    let (c0, c1) = gc.pair()?;
    diff(c1.accuracy(), c0.accuracy())
        .ok_or_else(|| Error::EmptyGroup(if c0.n() == 0 { 0 } else { 1 }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NotionValue {
    pub label: String,
    pub name: String,
    pub kind: NotionKind,
    /// `null` when undefined.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub group_names: Vec<String>,
    pub accuracy: f64,
    pub group_accuracy: Vec<f64>,
    /// `acc(group 1) − acc(group 0)`.
    pub accuracy_difference: f64,
    /// `f1`..`f16` in order.
    pub notions: Vec<NotionValue>,
    pub confusion: GroupConfusion,
}

impl FairnessReport {
    pub fn from_confusion(confusion: GroupConfusion, group_names: &[String]) -> Result<Self> {
        if group_names.len() != confusion.n_groups() {
            return Err(Error::Dimension(format!(
                "{} group names for {} groups",
                group_names.len(),
                confusion.n_groups()
            )));
        }
        let notions = FairnessNotion::ALL
            .into_iter()
            .map(|n| {
                Ok(NotionValue {
                    label: n.label().into(),
                    name: n.name().into(),
                    kind: n.kind(),
                    value: fairness_metric(&confusion, n)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let accuracy_difference = accuracy_difference(&confusion)?;
        let group_accuracy = confusion
            .groups
            .iter()
            .enumerate()
            .map(|(g, c)| c.accuracy().ok_or(Error::EmptyGroup(g)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            group_names: group_names.to_vec(),
            accuracy: confusion.accuracy().ok_or(Error::EmptyGroup(0))?,
            group_accuracy,
            accuracy_difference,
            notions,
            confusion,
        })
    }

    pub fn value(&self, notion: FairnessNotion) -> Option<f64> {
        self.notions[notion.index()].value
    }

    /// All sixteen values in `f1`..`f16` order.
    pub fn values(&self) -> Vec<Option<f64>> {
        self.notions.iter().map(|n| n.value).collect()
    }
}

/// Confusion counts, the sixteen notions, overall accuracy and AD for a
/// two-group evaluation.
pub fn full_report(
    predicted: &[u8],
    actual: &[u8],
    groups: &[usize],
    group_names: &[String],
) -> Result<FairnessReport> {
    let confusion = confusion_by_group(predicted, actual, groups)?;
    FairnessReport::from_confusion(confusion, group_names)
}
