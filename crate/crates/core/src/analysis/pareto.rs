use serde::{Deserialize, Serialize};

use super::sweep::TradeoffPoint;
use crate::group_metrics::{FairnessNotion, UnfairnessScale};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontPoint {
    pub lambda: f64,
    pub seed: u64,
    pub accuracy: f64,
    pub value: f64,
    pub unfairness: f64,
}

/// Non-dominated points in (lower unfairness, higher accuracy), sorted by
/// unfairness ascending; accuracy strictly increases along the list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    pub notion: FairnessNotion,
    pub notion_name: String,
    pub scale: UnfairnessScale,
    pub points: Vec<FrontPoint>,
}

pub fn pareto_front(points: &[TradeoffPoint], notion: FairnessNotion) -> Result<ParetoFront> {
    pareto_front_scaled(points, notion, UnfairnessScale::Absolute)
}

/// `p` dominates `q` when `u(p) ≤ u(q)` and `acc(p) ≥ acc(q)` with one strict.
/// Points equal on both coordinates collapse to the lowest seed, then the
/// lowest lambda. Points whose notion value is undefined are skipped.
pub fn pareto_front_scaled(
    points: &[TradeoffPoint],
    notion: FairnessNotion,
    scale: UnfairnessScale,
) -> Result<ParetoFront> {
    let mut candidates: Vec<FrontPoint> = points
        .iter()
        .filter_map(|p| {
            let value = p.value(notion)?;
            let unfairness = notion.unfairness(value, scale);
            unfairness.is_finite().then_some(FrontPoint {
                lambda: p.lambda,
                seed: p.seed,
                accuracy: p.accuracy,
                value,
                unfairness,
            })
        })
        .collect();
    if candidates.is_empty() {
        return Err(Error::EmptyFront(notion.label().into()));
    }
    candidates.sort_by(|a, b| {
        a.unfairness
            .total_cmp(&b.unfairness)
            .then(b.accuracy.total_cmp(&a.accuracy))
            .then(a.seed.cmp(&b.seed))
            .then(a.lambda.total_cmp(&b.lambda))
    });
    let mut front: Vec<FrontPoint> = Vec::new();
    for c in candidates {
        if front.last().is_none_or(|best| c.accuracy > best.accuracy) {
            front.push(c);
        }
    }
    Ok(ParetoFront {
        notion,
        notion_name: notion.name().into(),
        scale,
        points: front,
    })
}

/// Accuracy at the front's minimum-unfairness point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub notion: FairnessNotion,
    pub accuracy: f64,
    pub unfairness: f64,
    pub lambda: f64,
    pub seed: u64,
    pub tolerance: f64,
    /// Set when the least-unfair measured point is further than `tolerance`
    /// from perfect fairness; the accuracy is then not a parity measurement.
    pub extrapolated: bool,
}

/// `None` only for an empty front.
pub fn fairness_baseline(front: &ParetoFront, tolerance: f64) -> Option<Baseline> {
    let p = front.points.first()?;
    Some(Baseline {
        notion: front.notion,
        accuracy: p.accuracy,
        unfairness: p.unfairness,
        lambda: p.lambda,
        seed: p.seed,
        tolerance,
        extrapolated: p.unfairness > tolerance,
    })
}
