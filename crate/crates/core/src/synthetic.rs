//! Seeded synthetic data for tests, demos and the acceptance suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::dataset::{ChargeDegree, FeatureMatrix, Record, RecordTable, Sex};

fn two_groups() -> Vec<String> {
    vec!["group0".into(), "group1".into()]
}

/// Two features, label `x1 + x2 > 0`, every point at distance ≥ `margin / 2`
/// from the boundary. Groups alternate row by row, so both groups share one
/// distribution.
pub fn separable(n: usize, margin: f64, seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    let half = margin / 2.0;
    while labels.len() < n {
        let x1: f64 = rng.random_range(-2.0..2.0);
        let x2: f64 = rng.random_range(-2.0..2.0);
        let distance = (x1 + x2) / std::f64::consts::SQRT_2;
        if distance.abs() < half {
            continue;
        }
        values.extend([x1, x2]);
        labels.push(u8::from(distance > 0.0));
    }
    let groups = (0..n).map(|i| i % 2).collect();
    FeatureMatrix::new(
        values,
        2,
        vec!["x1".into(), "x2".into()],
        groups,
        labels,
        two_groups(),
    )
    .expect("consistent shapes")
}

/// Shape of a two-group dataset whose groups follow different labeling rules
/// and carry different label noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasedParams {
    /// Fraction of rows in group 0.
    pub group0_share: f64,
    /// Probability of flipping a label, per group.
    pub label_noise: [f64; 2],
    /// Standard deviation of the noise on the group proxy feature.
    pub proxy_noise: f64,
}

impl Default for BiasedParams {
    fn default() -> Self {
        Self {
            group0_share: 0.3,
            label_noise: [0.10, 0.05],
            proxy_noise: 1.0,
        }
    }
}

/// [`biased_with`] using [`BiasedParams::default`].
pub fn biased(n: usize, seed: u64) -> FeatureMatrix {
    biased_with(n, &BiasedParams::default(), seed)
}

/// Features `x1, x2 ~ N(0, 1)` and a noisy group proxy. Group 1 labels follow
/// `x1 > 0`, group 0 labels follow `x2 > 0`; labels are then flipped with the
/// group's noise rate. A model that ignores group differences fits the
/// majority rule and leaves the minority with lower accuracy.
pub fn biased_with(n: usize, params: &BiasedParams, seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("valid normal");
    let mut values = Vec::with_capacity(3 * n);
    let mut labels = Vec::with_capacity(n);
    let mut groups = Vec::with_capacity(n);
    for _ in 0..n {
        let g = usize::from(rng.random::<f64>() >= params.group0_share);
        let x1: f64 = normal.sample(&mut rng);
        let x2: f64 = normal.sample(&mut rng);
        let centre = if g == 0 { -1.0 } else { 1.0 };
        let proxy = centre + params.proxy_noise * normal.sample(&mut rng);
        let clean = if g == 0 { x2 > 0.0 } else { x1 > 0.0 };
        let flip = rng.random::<f64>() < params.label_noise[g];
        values.extend([x1, x2, proxy]);
        labels.push(u8::from(clean != flip));
        groups.push(g);
    }
    FeatureMatrix::new(
        values,
        3,
        vec!["x1".into(), "x2".into(), "proxy".into()],
        groups,
        labels,
        two_groups(),
    )
    .expect("consistent shapes")
}

/// A COMPAS-shaped table: four races, ages 18–69, race-dependent prior counts
/// and an outcome driven by priors and age.
pub fn compas_like(n: usize, seed: u64) -> RecordTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let races = [
        ("African-American", 0.51),
        ("Caucasian", 0.34),
        ("Hispanic", 0.09),
        ("Other", 0.06),
    ];
    let records = (0..n)
        .map(|i| {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut race = races[races.len() - 1].0;
            for (name, share) in races {
                acc += share;
                if u < acc {
                    race = name;
                    break;
                }
            }
            let age = 18 + (rng.random::<f64>().powf(1.6) * 52.0) as i64;
            let priors_mean = if race == "African-American" { 4.0 } else { 2.2 };
            let priors_count = Poisson::new(priors_mean * (1.0 + (40 - age).max(0) as f64 / 40.0))
                .expect("positive mean")
                .sample(&mut rng) as u32;
            let juv = |rng: &mut ChaCha8Rng, p: f64| u32::from(rng.random::<f64>() < p);
            let score = -0.9 + 0.22 * priors_count as f64 - 0.035 * (age - 35) as f64;
            let p = 1.0 / (1.0 + (-score).exp());
            let days = if rng.random::<f64>() < 0.04 {
                None
            } else if rng.random::<f64>() < 0.12 {
                Some(rng.random_range(31..400))
            } else {
                Some(rng.random_range(-30..=30))
            };
            Record {
                id: (i + 1).to_string(),
                age,
                sex: if rng.random::<f64>() < 0.81 {
                    Sex::Male
                } else {
                    Sex::Female
                },
                race: race.to_string(),
                priors_count,
                charge_degree: if rng.random::<f64>() < 0.64 {
                    ChargeDegree::Felony
                } else {
                    ChargeDegree::Misdemeanor
                },
                juv_fel_count: juv(&mut rng, 0.06),
                juv_misd_count: juv(&mut rng, 0.09),
                juv_other_count: juv(&mut rng, 0.1),
                days_b_screening_arrest: days,
                outcome: u8::from(rng.random::<f64>() < p),
                decile_score: Some((1.0 + 9.0 * p).round().clamp(1.0, 10.0) as u8),
            }
        })
        .collect();
    RecordTable::new(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{read_records, write_records, ColumnMap};

    #[test]
    fn separable_respects_margin() {
        let m = separable(200, 1.0, 3);
        for i in 0..m.rows {
            let r = m.row(i);
            let d = (r[0] + r[1]) / std::f64::consts::SQRT_2;
            assert!(d.abs() >= 0.5);
            assert_eq!(m.labels[i], u8::from(d > 0.0));
        }
    }

    #[test]
    fn compas_like_round_trips_through_csv() {
        let table = compas_like(50, 1);
        let mut buf = Vec::new();
        write_records(&table, &mut buf).unwrap();
        let back = read_records(buf.as_slice(), &ColumnMap::default()).unwrap();
        assert_eq!(back.dropped, 0);
        assert_eq!(back.records, table.records);
    }

    #[test]
    fn biased_is_seeded() {
        assert_eq!(biased(100, 1), biased(100, 1));
        assert_ne!(biased(100, 1), biased(100, 2));
    }
}
