//! Cross-entropy losses and the group accuracy parity (GAP) loss.
//!
//! All losses are means over samples. Values clamp probabilities into
//! `[EPS, 1 − EPS]` before taking logs; gradients are taken through the
//! unclamped sigmoid.
//!
//! ```text
//! wBCE    = −(1/n) Σ [w1·y·ln p + w0·(1−y)·ln(1−p)]
//! CE_g    = wBCE restricted to group g (same global weights)
//! penalty = Σ_{i≠j} (CE_i − CE_j)²        (ordered pairs)
//! GAP     = OE + λ·penalty,  OE = wBCE of the whole batch
//! ```

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const EPS: f64 = 1e-12;

/// Numerically stable logistic function.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn clamp(p: f64) -> f64 {
    p.clamp(EPS, 1.0 - EPS)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    /// Weight of label 0.
    pub w0: f64,
    /// Weight of label 1.
    pub w1: f64,
}

impl ClassWeights {
    pub const UNIT: ClassWeights = ClassWeights { w0: 1.0, w1: 1.0 };

    pub fn new(w0: f64, w1: f64) -> Result<Self> {
        if w0 > 0.0 && w1 > 0.0 && w0.is_finite() && w1.is_finite() {
            Ok(Self { w0, w1 })
        } else {
            Err(Error::InvalidArgument(format!(
                "class weights must be positive, got ({w0}, {w1})"
            )))
        }
    }

    pub fn of(&self, label: u8) -> f64 {
        if label == 1 {
            self.w1
        } else {
            self.w0
        }
    }
}

impl Default for ClassWeights {
    fn default() -> Self {
        Self::UNIT
    }
}

/// Inverse-frequency weights `w_c = n / (2·n_c)`; their mean over `labels` is 1.
pub fn class_weights(labels: &[u8]) -> Result<ClassWeights> {
    let n = labels.len();
    let n1 = labels.iter().filter(|&&y| y == 1).count();
    let n0 = n - n1;
    if n0 == 0 || n1 == 0 {
        return Err(Error::DegenerateLabels);
    }
    ClassWeights::new(n as f64 / (2 * n0) as f64, n as f64 / (2 * n1) as f64)
}

fn check_batch(probabilities: &[f64], labels: &[u8]) -> Result<()> {
    if probabilities.is_empty() {
        return Err(Error::Arity("empty batch".into()));
    }
    if probabilities.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} probabilities for {} labels",
            probabilities.len(),
            labels.len()
        )));
    }
    if labels.iter().any(|&y| y > 1) {
        return Err(Error::InvalidArgument("labels must be 0 or 1".into()));
    }
    Ok(())
}

/// Per-sample weighted cross-entropy term.
fn sample_loss(p: f64, y: u8, weights: &ClassWeights) -> f64 {
    let p = clamp(p);
    if y == 1 {
        -weights.w1 * p.ln()
    } else {
        -weights.w0 * (1.0 - p).ln()
    }
}

pub fn bce(probabilities: &[f64], labels: &[u8]) -> Result<f64> {
    wbce(probabilities, labels, &ClassWeights::UNIT)
}

pub fn wbce(probabilities: &[f64], labels: &[u8], weights: &ClassWeights) -> Result<f64> {
    check_batch(probabilities, labels)?;
    let sum: f64 = probabilities
        .iter()
        .zip(labels)
        .map(|(&p, &y)| sample_loss(p, y, weights))
        .sum();
    Ok(sum / probabilities.len() as f64)
}

fn check_groups(groups: &[usize], n: usize, n_groups: usize) -> Result<Vec<usize>> {
    if groups.len() != n {
        return Err(Error::Dimension(format!(
            "{} group ids for {n} samples",
            groups.len()
        )));
    }
    let mut sizes = vec![0usize; n_groups];
    for &g in groups {
        if g >= n_groups {
            return Err(Error::Dimension(format!(
                "group id {g} out of range for {n_groups} groups"
            )));
        }
        sizes[g] += 1;
    }
    if let Some(g) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::EmptyGroup(g));
    }
    Ok(sizes)
}

/// Weighted cross-entropy of each group, indexed by group id, using the
/// batch-global `weights`. Every id in `0..n_groups` must occur.
pub fn group_ce(
    probabilities: &[f64],
    labels: &[u8],
    groups: &[usize],
    n_groups: usize,
    weights: &ClassWeights,
) -> Result<Vec<f64>> {
    check_batch(probabilities, labels)?;
    let sizes = check_groups(groups, probabilities.len(), n_groups)?;
    let mut sums = vec![0.0; n_groups];
    for ((&p, &y), &g) in probabilities.iter().zip(labels).zip(groups) {
        sums[g] += sample_loss(p, y, weights);
    }
    Ok(sums
        .into_iter()
        .zip(sizes)
        .map(|(s, n)| s / n as f64)
        .collect())
}

/// Sum of `(CE_i − CE_j)²` over ordered pairs `i ≠ j`.
pub fn pairwise_penalty(per_group_ce: &[f64]) -> f64 {
    let mut total = 0.0;
    for (i, a) in per_group_ce.iter().enumerate() {
        for (j, b) in per_group_ce.iter().enumerate() {
            if i != j {
                total += (a - b).powi(2);
            }
        }
    }
    total
}

/// How the overall-error term of GAP averages samples.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverallError {
    /// wBCE over the whole batch.
    #[default]
    SampleMean,
    /// Unweighted mean of the per-group CEs.
    GroupMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub overall_error: f64,
    pub per_group_ce: Vec<f64>,
    pub penalty: f64,
    pub lambda: f64,
    pub total: f64,
}

/// A configured GAP loss. `lambda = 0` reduces it to weighted BCE, and unit
/// weights on top of that to plain BCE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapLoss {
    pub lambda: f64,
    pub weights: ClassWeights,
    pub overall_error: OverallError,
}

impl GapLoss {
    pub fn new(lambda: f64, weights: ClassWeights) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be a finite non-negative number, got {lambda}"
            )));
        }
        Ok(Self {
            lambda,
            weights,
            overall_error: OverallError::SampleMean,
        })
    }

    pub fn with_overall_error(mut self, mode: OverallError) -> Self {
        self.overall_error = mode;
        self
    }

    pub fn evaluate(
        &self,
        probabilities: &[f64],
        labels: &[u8],
        groups: &[usize],
        n_groups: usize,
    ) -> Result<LossBreakdown> {
        let per_group_ce = group_ce(probabilities, labels, groups, n_groups, &self.weights)?;
        let overall_error = match self.overall_error {
            OverallError::SampleMean => wbce(probabilities, labels, &self.weights)?,
            OverallError::GroupMean => per_group_ce.iter().sum::<f64>() / n_groups as f64,
        };
        let penalty = pairwise_penalty(&per_group_ce);
        Ok(LossBreakdown {
            overall_error,
            total: overall_error + self.lambda * penalty,
            per_group_ce,
            penalty,
            lambda: self.lambda,
        })
    }

    /// Breakdown and `∂total/∂logit_k` for every sample.
    pub fn value_and_gradient(
        &self,
        logits: &[f64],
        labels: &[u8],
        groups: &[usize],
        n_groups: usize,
    ) -> Result<(LossBreakdown, Vec<f64>)> {
        let probabilities: Vec<f64> = logits.iter().map(|&z| sigmoid(z)).collect();
        let breakdown = self.evaluate(&probabilities, labels, groups, n_groups)?;
        let sizes = check_groups(groups, logits.len(), n_groups)?;
        let n = logits.len() as f64;

        // ∂penalty/∂CE_g = 4 Σ_{j≠g} (CE_g − CE_j)
        let ce = &breakdown.per_group_ce;
        let dpenalty: Vec<f64> = (0..n_groups)
            .map(|g| 4.0 * ce.iter().map(|c| ce[g] - c).sum::<f64>())
            .collect();

        let gradient = probabilities
            .iter()
            .zip(labels)
            .zip(groups)
            .map(|((&p, &y), &g)| {
                // ∂ℓ/∂z of the weighted per-sample term through the sigmoid
                let dsample = self.weights.of(y) * (p - f64::from(y));
                let n_g = sizes[g] as f64;
                let doe = match self.overall_error {
                    OverallError::SampleMean => dsample / n,
                    OverallError::GroupMean => dsample / (n_g * n_groups as f64),
                };
                doe + self.lambda * dpenalty[g] * dsample / n_g
            })
            .collect();
        Ok((breakdown, gradient))
    }
}

pub fn gap_loss(
    probabilities: &[f64],
    labels: &[u8],
    groups: &[usize],
    n_groups: usize,
    lambda: f64,
    weights: &ClassWeights,
) -> Result<LossBreakdown> {
    GapLoss::new(lambda, *weights)?.evaluate(probabilities, labels, groups, n_groups)
}

/// `∂GAP/∂logit_k` with probabilities `sigmoid(logits)`.
pub fn gap_gradient(
    logits: &[f64],
    labels: &[u8],
    groups: &[usize],
    n_groups: usize,
    lambda: f64,
    weights: &ClassWeights,
) -> Result<Vec<f64>> {
    GapLoss::new(lambda, *weights)?
        .value_and_gradient(logits, labels, groups, n_groups)
        .map(|(_, g)| g)
}
