//! Mini-batch training, multi-restart selection and evaluation.
//!
//! Batches are group-stratified for every loss: each batch holds every group,
//! and `gap` with `lambda = 0` follows the same trajectory as `wbce`.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{stratified_partition, FeatureMatrix};
use crate::group_metrics::{full_report, FairnessReport};
use crate::losses::{class_weights, ClassWeights, GapLoss, LossBreakdown, OverallError};
use crate::model::{self, Activation, Architecture, Gradients, ModelParams, DEFAULT_THRESHOLD};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Bce,
    Wbce,
    #[default]
    Gap,
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bce" => Ok(LossKind::Bce),
            "wbce" => Ok(LossKind::Wbce),
            "gap" => Ok(LossKind::Gap),
            other => Err(Error::InvalidArgument(format!(
                "unknown loss {other:?} (expected bce, wbce or gap)"
            ))),
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Bce => "bce",
            LossKind::Wbce => "wbce",
            LossKind::Gap => "gap",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd,
    #[default]
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub loss: LossKind,
    /// Penalty weight; only read when `loss = gap`.
    pub lambda: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    pub restarts: usize,
    pub validation_fraction: f64,
    pub hidden_layers: Vec<usize>,
    pub activation: Activation,
    /// Averaging of the GAP overall-error term.
    pub overall_error: OverallError,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            loss: LossKind::Gap,
            lambda: 1.0,
            learning_rate: 0.01,
            epochs: 200,
            batch_size: 128,
            optimizer: OptimizerKind::Adam,
            seed: 0,
            restarts: 10,
            validation_fraction: 0.2,
            hidden_layers: vec![16],
            activation: Activation::Relu,
            overall_error: OverallError::SampleMean,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate {} must be >= 0", self.learning_rate));
        }
        if self.epochs == 0 || self.batch_size == 0 || self.restarts == 0 {
            return bad("epochs, batch_size and restarts must be positive".into());
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return bad(format!(
                "validation_fraction {} is not in (0, 1)",
                self.validation_fraction
            ));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda {} must be >= 0", self.lambda));
        }
        Ok(())
    }

    /// The loss actually optimized, with class weights fitted on `labels`.
    pub fn objective(&self, labels: &[u8]) -> Result<GapLoss> {
        match self.loss {
            LossKind::Bce => GapLoss::new(0.0, ClassWeights::UNIT),
            LossKind::Wbce => GapLoss::new(0.0, class_weights(labels)?),
            LossKind::Gap => Ok(GapLoss::new(self.lambda, class_weights(labels)?)?
                .with_overall_error(self.overall_error)),
        }
    }
}

enum Optimizer {
    Sgd {
        lr: f64,
    },
    Adam {
        lr: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
        t: i32,
        m: Vec<Vec<f64>>,
        v: Vec<Vec<f64>>,
    },
}

impl Optimizer {
    fn new(kind: OptimizerKind, lr: f64, params: &ModelParams) -> Self {
        match kind {
            OptimizerKind::Sgd => Optimizer::Sgd { lr },
            OptimizerKind::Adam => {
                let zeros: Vec<Vec<f64>> = params
                    .layers
                    .iter()
                    .flat_map(|l| [vec![0.0; l.weights.len()], vec![0.0; l.bias.len()]])
                    .collect();
                Optimizer::Adam {
                    lr,
                    beta1: 0.9,
                    beta2: 0.999,
                    eps: 1e-8,
                    t: 0,
                    m: zeros.clone(),
                    v: zeros,
                }
            }
        }
    }

    fn step(&mut self, params: &mut ModelParams, grads: &Gradients) {
        match self {
            Optimizer::Sgd { lr } => {
                for (p, g) in params.tensors_mut().zip(grads.tensors()) {
                    for (p, g) in p.iter_mut().zip(g) {
                        *p -= *lr * g;
                    }
                }
            }
            Optimizer::Adam {
                lr,
                beta1,
                beta2,
                eps,
                t,
                m,
                v,
            } => {
                *t += 1;
                let c1 = 1.0 - beta1.powi(*t);
                let c2 = 1.0 - beta2.powi(*t);
                let tensors = params
                    .tensors_mut()
                    .zip(grads.tensors())
                    .zip(m.iter_mut().zip(v.iter_mut()));
                for ((p, g), (m, v)) in tensors {
                    for (((p, g), m), v) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut())
                    {
                        *m = *beta1 * *m + (1.0 - *beta1) * g;
                        *v = *beta2 * *v + (1.0 - *beta2) * g * g;
                        let m_hat = *m / c1;
                        let v_hat = *v / c2;
                        *p -= *lr * m_hat / (v_hat.sqrt() + *eps);
                    }
                }
            }
        }
    }
}

/// Splits `0..groups.len()` into `⌈n / batch_size⌉` batches so that each batch
/// holds a proportional share of every group. Each group's rows are shuffled
/// and dealt into near-equal chunks; the leftover rows of successive groups
/// are spread round-robin so batch sizes differ by at most one per group. A
/// group with fewer rows than batches is recycled so every batch still
/// contains it.
pub fn stratified_batches(
    groups: &[usize],
    n_groups: usize,
    batch_size: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<usize>> {
    let n = groups.len();
    if n == 0 || batch_size == 0 {
        return Vec::new();
    }
    let n_batches = n.div_ceil(batch_size);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_groups];
    for (i, &g) in groups.iter().enumerate() {
        members[g].push(i);
    }
    let mut batches: Vec<Vec<usize>> = vec![Vec::new(); n_batches];
    let mut offset = 0;
    for rows in &mut members {
        if rows.is_empty() {
            continue;
        }
        rows.shuffle(rng);
        let n_g = rows.len();
        if n_g < n_batches {
            for (b, batch) in batches.iter_mut().enumerate() {
                batch.push(rows[b % n_g]);
            }
            continue;
        }
        let base = n_g / n_batches;
        let extra = n_g % n_batches;
        let mut sizes = vec![base; n_batches];
        for t in 0..extra {
            sizes[(offset + t) % n_batches] += 1;
        }
        offset = (offset + extra) % n_batches;
        let mut start = 0;
        for (batch, size) in batches.iter_mut().zip(sizes) {
            batch.extend_from_slice(&rows[start..start + size]);
            start += size;
        }
    }
    batches
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train: LossBreakdown,
    pub validation: LossBreakdown,
    pub train_accuracy: f64,
    pub validation_accuracy: f64,
    /// `acc(group 1) − acc(group 0)`; present for two-group data.
    pub train_ad: Option<f64>,
    pub validation_ad: Option<f64>,
    /// Smallest number of distinct groups seen in any batch of this epoch.
    pub min_groups_per_batch: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub seed: u64,
    /// Losses of the freshly initialized model.
    pub initial: EpochRecord,
    pub epochs: Vec<EpochRecord>,
}

impl TrainHistory {
    pub fn last(&self) -> &EpochRecord {
        self.epochs.last().unwrap_or(&self.initial)
    }

    /// One JSON object per epoch, each tagged with the run seed.
    pub fn to_jsonl(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Line<'a> {
            seed: u64,
            #[serde(flatten)]
            record: &'a EpochRecord,
        }
        let mut out = String::new();
        for record in &self.epochs {
            out.push_str(&serde_json::to_string(&Line {
                seed: self.seed,
                record,
            })?);
            out.push('\n');
        }
        Ok(out)
    }
}

struct Split<'a> {
    train: &'a FeatureMatrix,
    validation: &'a FeatureMatrix,
}

fn gather(data: &FeatureMatrix, rows: &[usize]) -> (Vec<f64>, Vec<u8>, Vec<usize>) {
    let mut x = Vec::with_capacity(rows.len() * data.cols);
    for &r in rows {
        x.extend_from_slice(data.row(r));
    }
    let y = rows.iter().map(|&r| data.labels[r]).collect();
    let g = rows.iter().map(|&r| data.group_ids[r]).collect();
    (x, y, g)
}

fn check_training_data(data: &FeatureMatrix, config: &TrainConfig) -> Result<()> {
    if data.rows == 0 {
        return Err(Error::InvalidArgument("no training rows".into()));
    }
    if !data.labels.contains(&0) || !data.labels.contains(&1) {
        return Err(Error::DegenerateLabels);
    }
    if let Some(g) = data.group_sizes().iter().position(|&s| s == 0) {
        return Err(Error::EmptyGroup(g));
    }
    if config.loss == LossKind::Gap && data.n_groups() < 2 {
        return Err(Error::DegenerateGroups(
            "gap loss needs at least two groups".into(),
        ));
    }
    Ok(())
}

fn measure(
    params: &ModelParams,
    data: &FeatureMatrix,
    objective: &GapLoss,
) -> Result<(LossBreakdown, f64, Option<f64>)> {
    let out = model::forward(params, &data.values, data.rows)?;
    let breakdown = objective.evaluate(
        &out.probabilities,
        &data.labels,
        &data.group_ids,
        data.n_groups(),
    )?;
    let predicted = model::predict(&out.probabilities, DEFAULT_THRESHOLD);
    let mut correct = vec![0usize; data.n_groups()];
    for ((&p, &y), &g) in predicted.iter().zip(&data.labels).zip(&data.group_ids) {
        correct[g] += usize::from(p == y);
    }
    let sizes = data.group_sizes();
    let accuracy = correct.iter().sum::<usize>() as f64 / data.rows as f64;
    let ad = (data.n_groups() == 2)
        .then(|| correct[1] as f64 / sizes[1] as f64 - correct[0] as f64 / sizes[0] as f64);
    Ok((breakdown, accuracy, ad))
}

fn record(
    epoch: usize,
    params: &ModelParams,
    split: &Split<'_>,
    objective: &GapLoss,
    min_groups_per_batch: usize,
) -> Result<EpochRecord> {
    let (train, train_accuracy, train_ad) = measure(params, split.train, objective)?;
    let (validation, validation_accuracy, validation_ad) =
        measure(params, split.validation, objective)?;
    Ok(EpochRecord {
        epoch,
        train,
        validation,
        train_accuracy,
        validation_accuracy,
        train_ad,
        validation_ad,
        min_groups_per_batch,
    })
}

fn fit(split: &Split<'_>, config: &TrainConfig, seed: u64) -> Result<(ModelParams, TrainHistory)> {
    let data = split.train;
    let n_groups = data.n_groups();
    let arch = Architecture::new(data.cols, config.hidden_layers.clone(), config.activation)?;
    let mut params = model::init(&arch, seed)?;
    let objective = config.objective(&data.labels)?;
    let mut optimizer = Optimizer::new(config.optimizer, config.learning_rate, &params);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);

    let initial = record(0, &params, split, &objective, n_groups)?;
    let mut epochs = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        let batches = stratified_batches(&data.group_ids, n_groups, config.batch_size, &mut rng);
        let mut min_groups = usize::MAX;
        for batch in &batches {
            let (x, y, g) = gather(data, batch);
            let mut present = vec![false; n_groups];
            for &gi in &g {
                present[gi] = true;
            }
            min_groups = min_groups.min(present.iter().filter(|&&p| p).count());
            let out = model::forward(&params, &x, batch.len())?;
            let (_, dlogits) = objective.value_and_gradient(&out.logits, &y, &g, n_groups)?;
            let grads = model::backward(&params, &out.cache, &dlogits)?;
            optimizer.step(&mut params, &grads);
        }
        epochs.push(record(epoch, &params, split, &objective, min_groups)?);
    }
    Ok((
        params,
        TrainHistory {
            seed,
            initial,
            epochs,
        },
    ))
}

/// Carves a stratified validation split off `data` (seeded by `seed`).
pub fn validation_split(
    data: &FeatureMatrix,
    fraction: f64,
    seed: u64,
) -> Result<(FeatureMatrix, FeatureMatrix)> {
    let (fit_rows, val_rows) = stratified_partition(&data.group_ids, &data.labels, fraction, seed)?;
    Ok((data.select(&fit_rows), data.select(&val_rows)))
}

/// One training run: carve the validation split with `config.seed`, then
/// train from an initialization seeded with `config.seed`.
pub fn train(data: &FeatureMatrix, config: &TrainConfig) -> Result<(ModelParams, TrainHistory)> {
    config.validate()?;
    check_training_data(data, config)?;
    let (fit_part, val_part) = validation_split(data, config.validation_fraction, config.seed)?;
    let split = Split {
        train: &fit_part,
        validation: &val_part,
    };
    fit(&split, config, config.seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub seed: u64,
    pub validation_loss: f64,
    pub validation_ad: Option<f64>,
    pub validation_accuracy: f64,
    pub train_loss: f64,
}

impl Candidate {
    fn from_history(h: &TrainHistory) -> Self {
        let last = h.last();
        Self {
            seed: h.seed,
            validation_loss: last.validation.total,
            validation_ad: last.validation_ad,
            validation_accuracy: last.validation_accuracy,
            train_loss: last.train.total,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub winning_seed: u64,
    pub winning_index: usize,
    pub rule: String,
    pub candidates: Vec<Candidate>,
}

/// Index of the run with the lowest final validation loss; ties go to the
/// lower validation |AD|, then the lower seed. NaN losses rank last.
pub fn select_best(candidates: &[Candidate]) -> Option<usize> {
    let key = |c: &Candidate| {
        let loss = if c.validation_loss.is_nan() {
            f64::INFINITY
        } else {
            c.validation_loss
        };
        let ad = c.validation_ad.map_or(f64::INFINITY, f64::abs);
        (loss, if ad.is_nan() { f64::INFINITY } else { ad }, c.seed)
    };
    (0..candidates.len()).min_by(|&a, &b| {
        let (ka, kb) = (key(&candidates[a]), key(&candidates[b]));
        ka.0.total_cmp(&kb.0)
            .then(ka.1.total_cmp(&kb.1))
            .then(ka.2.cmp(&kb.2))
    })
}

#[derive(Debug, Clone)]
pub struct RestartOutcome {
    pub best: ModelParams,
    /// In seed order.
    pub histories: Vec<TrainHistory>,
    pub selection: SelectionRecord,
}

/// `config.restarts` runs seeded `seed, seed+1, …` on a shared validation
/// split; the winner is chosen by [`select_best`]. Runs execute in parallel
/// and are merged in seed order.
pub fn multi_restart(data: &FeatureMatrix, config: &TrainConfig) -> Result<RestartOutcome> {
    config.validate()?;
    check_training_data(data, config)?;
    let (fit_part, val_part) = validation_split(data, config.validation_fraction, config.seed)?;
    let split = Split {
        train: &fit_part,
        validation: &val_part,
    };
    let runs = (0..config.restarts as u64)
        .into_par_iter()
        .map(|i| fit(&split, config, config.seed.wrapping_add(i)))
        .collect::<Result<Vec<_>>>()?;
    let candidates: Vec<Candidate> = runs
        .iter()
        .map(|(_, h)| Candidate::from_history(h))
        .collect();
    let winner = select_best(&candidates).expect("restarts >= 1");
    let mut best = None;
    let mut histories = Vec::with_capacity(runs.len());
    for (i, (params, history)) in runs.into_iter().enumerate() {
        if i == winner {
            best = Some(params);
        }
        histories.push(history);
    }
    Ok(RestartOutcome {
        best: best.expect("winner index in range"),
        histories,
        selection: SelectionRecord {
            winning_seed: candidates[winner].seed,
            winning_index: winner,
            rule: "min final validation loss, then min |validation AD|, then min seed".into(),
            candidates,
        },
    })
}

/// Thresholds the model at 0.5 on `test` and reports the fairness notions
/// with the raw per-group confusion counts.
pub fn evaluate(params: &ModelParams, test: &FeatureMatrix) -> Result<FairnessReport> {
    let out = model::forward(params, &test.values, test.rows)?;
    let predicted = model::predict(&out.probabilities, DEFAULT_THRESHOLD);
    full_report(&predicted, &test.labels, &test.group_ids, &test.group_names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;

    fn quick(loss: LossKind) -> TrainConfig {
        TrainConfig {
            loss,
            epochs: 5,
            batch_size: 32,
            restarts: 1,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn batches_cover_every_row_once_and_every_group() {
        let groups: Vec<usize> = (0..203).map(|i| usize::from(i % 5 == 0)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let batches = stratified_batches(&groups, 2, 32, &mut rng);
        assert_eq!(batches.len(), 7);
        let mut seen: Vec<usize> = batches.iter().flatten().copied().collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..203).collect::<Vec<_>>());
        let minority_total = groups.iter().filter(|&&g| g == 1).count();
        for b in &batches {
            let minority = b.iter().filter(|&&i| groups[i] == 1).count();
            assert!(minority >= minority_total / 7 && minority <= minority_total / 7 + 1);
            assert!(b.len() <= 32 + 1);
        }
    }

    #[test]
    fn small_group_is_recycled_into_every_batch() {
        let mut groups = vec![0usize; 100];
        groups[7] = 1;
        groups[50] = 1;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let batches = stratified_batches(&groups, 2, 10, &mut rng);
        assert_eq!(batches.len(), 10);
        assert!(batches.iter().all(|b| b.iter().any(|&i| groups[i] == 1)));
    }

    #[test]
    fn separable_data_is_learned() {
        let data = synthetic::separable(200, 1.0, 5);
        let config = TrainConfig {
            loss: LossKind::Bce,
            restarts: 1,
            ..TrainConfig::default()
        };
        let (params, history) = train(&data, &config).unwrap();
        assert_eq!(history.epochs.len(), 200);
        assert!(history.last().train_accuracy >= 0.95);
        assert!(history.last().train.total < history.initial.train.total);
        let report = evaluate(&params, &data).unwrap();
        assert!(report.accuracy >= 0.95, "accuracy {}", report.accuracy);
        assert!(report.accuracy_difference.abs() <= 0.05);
    }

    #[test]
    fn zero_learning_rate_freezes_parameters() {
        let data = synthetic::separable(100, 1.0, 1);
        let config = TrainConfig {
            learning_rate: 0.0,
            ..quick(LossKind::Gap)
        };
        let (params, history) = train(&data, &config).unwrap();
        let arch =
            Architecture::new(data.cols, config.hidden_layers.clone(), config.activation).unwrap();
        assert_eq!(params, model::init(&arch, config.seed).unwrap());
        assert!(history
            .epochs
            .iter()
            .all(|e| e.train == history.initial.train));
    }

    #[test]
    fn training_is_deterministic() {
        let data = synthetic::biased(400, 2);
        let config = quick(LossKind::Gap);
        let a = train(&data, &config).unwrap();
        let b = train(&data, &config).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn gap_batches_hold_every_group() {
        let data = synthetic::biased(400, 4);
        let (_, history) = train(&data, &quick(LossKind::Gap)).unwrap();
        assert!(history.epochs.iter().all(|e| e.min_groups_per_batch == 2));
    }

    #[test]
    fn gap_with_one_group_is_rejected() {
        let mut data = synthetic::separable(100, 1.0, 1);
        data.group_ids = vec![0; data.rows];
        data.group_names.truncate(1);
        assert!(matches!(
            train(&data, &quick(LossKind::Gap)),
            Err(Error::DegenerateGroups(_))
        ));
        assert!(train(&data, &quick(LossKind::Bce)).is_ok());
    }

    #[test]
    fn gap_lambda_zero_matches_wbce() {
        let data = synthetic::biased(300, 9);
        let gap = TrainConfig {
            lambda: 0.0,
            ..quick(LossKind::Gap)
        };
        let (a, _) = train(&data, &gap).unwrap();
        let (b, _) = train(&data, &quick(LossKind::Wbce)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_restart_equals_train() {
        let data = synthetic::biased(300, 1);
        let config = quick(LossKind::Gap);
        let (params, history) = train(&data, &config).unwrap();
        let outcome = multi_restart(&data, &config).unwrap();
        assert_eq!(outcome.best, params);
        assert_eq!(outcome.histories, vec![history]);
        assert_eq!(outcome.selection.winning_seed, config.seed);
    }

    #[test]
    fn restarts_use_distinct_consecutive_seeds() {
        let data = synthetic::biased(300, 1);
        let config = TrainConfig {
            restarts: 3,
            seed: 40,
            ..quick(LossKind::Gap)
        };
        let outcome = multi_restart(&data, &config).unwrap();
        let seeds: Vec<u64> = outcome.histories.iter().map(|h| h.seed).collect();
        assert_eq!(seeds, vec![40, 41, 42]);
        let winner = &outcome.selection.candidates[outcome.selection.winning_index];
        assert!(outcome
            .selection
            .candidates
            .iter()
            .all(|c| c.validation_loss >= winner.validation_loss));
    }

    fn candidate(seed: u64, loss: f64, ad: Option<f64>) -> Candidate {
        Candidate {
            seed,
            validation_loss: loss,
            validation_ad: ad,
            validation_accuracy: 0.5,
            train_loss: loss,
        }
    }

    #[test]
    fn selection_rule() {
        let a = candidate(5, 0.3, Some(0.2));
        let b = candidate(2, 0.4, Some(0.0));
        assert_eq!(select_best(&[a.clone(), b.clone()]), Some(0));
        assert_eq!(select_best(&[b, a]), Some(1));

        // tied loss: smaller |AD| wins, then smaller seed
        let tie = [
            candidate(1, 0.3, Some(-0.2)),
            candidate(2, 0.3, Some(0.1)),
            candidate(0, 0.3, Some(-0.1)),
        ];
        assert_eq!(select_best(&tie), Some(2));
        let nan = [candidate(0, f64::NAN, Some(0.0)), candidate(1, 9.0, None)];
        assert_eq!(select_best(&nan), Some(1));
    }

    #[test]
    fn constant_model_predicts_all_positive() {
        let data = synthetic::biased(200, 3);
        let arch = Architecture::logistic(data.cols);
        let mut params = model::init(&arch, 0).unwrap();
        params
            .set_flat(&vec![0.0; params.parameter_count()])
            .unwrap();
        let report = evaluate(&params, &data).unwrap();
        for c in &report.confusion.groups {
            assert_eq!((c.tn, c.fn_), (0, 0));
        }
        assert_eq!(report, evaluate(&params, &data).unwrap());
    }

    #[test]
    fn history_jsonl_has_one_line_per_epoch() {
        let data = synthetic::biased(200, 3);
        let (_, history) = train(&data, &quick(LossKind::Bce)).unwrap();
        let text = history.to_jsonl().unwrap();
        assert_eq!(text.lines().count(), 5);
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first["epoch"], 1);
        assert_eq!(first["seed"], 0);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        for bad in [
            TrainConfig {
                epochs: 0,
                ..TrainConfig::default()
            },
            TrainConfig {
                validation_fraction: 1.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                lambda: -1.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                learning_rate: f64::NAN,
                ..TrainConfig::default()
            },
        ] {
            assert!(bad.validate().is_err());
        }
        assert_eq!("GAP".parse::<LossKind>().unwrap(), LossKind::Gap);
    }
}
