//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use rand::Rng;

/// One group's counts as `(tp, fp, tn, fn)`.
pub type Counts = (u64, u64, u64, u64);

fn frac(num: u64, den: u64) -> Option<f64> {
    if den == 0 {
        None
    } else {
        Some(num as f64 / den as f64)
    }
}

fn quot(num: Option<f64>, den: Option<f64>) -> Option<f64> {
    match (num, den) {
        (Some(a), Some(b)) if b != 0.0 => Some(a / b),
        _ => None,
    }
}

fn minus(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some(a? - b?)
}

/// The sixteen two-group notions, written out one formula at a time.
pub fn notions(g0: Counts, g1: Counts) -> [Option<f64>; 16] {
    let (tp0, fp0, tn0, fn0) = g0;
    let (tp1, fp1, tn1, fn1) = g1;
    let n0 = tp0 + fp0 + tn0 + fn0;
    let n1 = tp1 + fp1 + tn1 + fn1;
    let odds = match (
        frac(fp0, fp0 + tn0),
        frac(fp1, fp1 + tn1),
        frac(tp0, tp0 + fn0),
        frac(tp1, tp1 + fn1),
    ) {
        (Some(a), Some(b), Some(c), Some(d)) => Some(0.5 * (a - b + c - d)),
        _ => None,
    };
    [
        odds,
        minus(frac(fp0 + fn0, n1 + n0), frac(fp1 + fn1, n1 + n0)),
        quot(frac(fp0 + fn0, n1 + n0), frac(fp1 + fn1, n1 + n0)),
        minus(frac(fp0, tp0 + fp0), frac(fp1, tp1 + fp1)),
        quot(frac(fp0, tp0 + fp0), frac(fp1, tp1 + fp1)),
        minus(frac(fp0, fp0 + tn0), frac(fp1, fp1 + tn1)),
        quot(frac(fp0, fp0 + tn0), frac(fp1, fp1 + tn1)),
        minus(frac(fn0, tn0 + fn0), frac(fn1, tn1 + fn1)),
        quot(frac(fn0, tn0 + fn0), frac(fn1, tn1 + fn1)),
        quot(frac(tp0 + fp0, n0), frac(tp1 + fp1, n1)),
        minus(frac(tp0 + fp0, n0), frac(tp1 + fp1, n1)),
        minus(frac(tp0, tp0 + fn0), frac(tp1, tp1 + fn1)),
        minus(frac(fn0, fn0 + tp0), frac(fn1, fn1 + tp1)),
        quot(frac(fn0, fn0 + tp0), frac(fn1, fn1 + tp1)),
        odds,
        minus(frac(tp0, tp0 + fp0), frac(tp1, tp1 + fp1)),
    ]
}

/// Counts uniform in `0..=50`, resampled until the group is non-empty.
pub fn random_counts<R: Rng>(rng: &mut R) -> Counts {
    loop {
        let c = (
            rng.random_range(0..=50),
            rng.random_range(0..=50),
            rng.random_range(0..=50),
            rng.random_range(0..=50),
        );
        if c.0 + c.1 + c.2 + c.3 > 0 {
            return c;
        }
    }
}

/// Reference GAP value with the per-sample loss written from scratch.
pub fn gap_value(
    logits: &[f64],
    labels: &[u8],
    groups: &[usize],
    n_groups: usize,
    lambda: f64,
    w: (f64, f64),
) -> f64 {
    let loss = |z: f64, y: u8| {
        let p = (1.0 / (1.0 + (-z).exp())).clamp(1e-12, 1.0 - 1e-12);
        if y == 1 {
            -w.1 * p.ln()
        } else {
            -w.0 * (1.0 - p).ln()
        }
    };
    let n = logits.len() as f64;
    let oe: f64 = logits
        .iter()
        .zip(labels)
        .map(|(&z, &y)| loss(z, y))
        .sum::<f64>()
        / n;
    let mut ce = vec![0.0; n_groups];
    let mut count = vec![0.0; n_groups];
    for ((&z, &y), &g) in logits.iter().zip(labels).zip(groups) {
        ce[g] += loss(z, y);
        count[g] += 1.0;
    }
    for g in 0..n_groups {
        ce[g] /= count[g];
    }
    let mut penalty = 0.0;
    for i in 0..n_groups {
        for j in 0..n_groups {
            if i != j {
                penalty += (ce[i] - ce[j]) * (ce[i] - ce[j]);
            }
        }
    }
    oe + lambda * penalty
}

/// Central finite-difference gradient of `f` at `x` with step `h`.
pub fn central_difference(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `‖analytic − numeric‖₂ / max(‖analytic‖₂, ‖numeric‖₂)`, or 0 when both
/// vectors vanish.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = analytic.iter().zip(numeric).map(|(a, n)| a - n).collect();
    let scale = norm(analytic).max(norm(numeric));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}

/// Indices of points no other point dominates in (low `u`, high `acc`); ties
/// on both coordinates keep the first index in `order`.
pub fn brute_force_front(points: &[(f64, f64)], order: &[usize]) -> Vec<usize> {
    let mut kept = Vec::new();
    for &i in order {
        let (ui, ai) = points[i];
        let dominated = points
            .iter()
            .any(|&(u, a)| u <= ui && a >= ai && (u < ui || a > ai));
        let duplicate = kept.iter().any(|&k: &usize| points[k] == points[i]);
        if !dominated && !duplicate {
            kept.push(i);
        }
    }
    kept
}

/// Wasserstein-1 as `∫ |F_a(x) − F_b(x)| dx` over the merged sorted support.
pub fn wasserstein_cdf(a: &[f64], b: &[f64]) -> f64 {
    let cdf = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
    let mut support: Vec<f64> = a.iter().chain(b).copied().collect();
    support.sort_by(f64::total_cmp);
    support
        .windows(2)
        .map(|w| (cdf(a, w[0]) - cdf(b, w[0])).abs() * (w[1] - w[0]))
        .sum()
}

/// A minimal record with the fields the proxy analysis reads.
pub fn record(race: &str, outcome: u8, age: i64) -> gapfair::dataset::Record {
    use gapfair::dataset::{ChargeDegree, Record, Sex};
    Record {
        id: String::new(),
        age,
        sex: Sex::Male,
        race: race.into(),
        priors_count: 0,
        charge_degree: ChargeDegree::Felony,
        juv_fel_count: 0,
        juv_misd_count: 0,
        juv_other_count: 0,
        days_b_screening_arrest: Some(0),
        outcome,
        decile_score: Some(1),
    }
}

/// Age multisets match across the race split and the outcome split, with
/// different membership.
pub fn equal_conditionals_table() -> gapfair::dataset::RecordTable {
    let mut records = Vec::new();
    for k in 0..5 {
        records.push(record("African-American", 1, 20 + k));
        records.push(record("African-American", 0, 30 + k));
        records.push(record("Caucasian", 1, 30 + k));
        records.push(record("Caucasian", 0, 40 + k));
    }
    gapfair::dataset::RecordTable::new(records)
}
