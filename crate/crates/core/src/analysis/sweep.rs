use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::FeatureMatrix;
use crate::group_metrics::FairnessNotion;
use crate::trainer::{evaluate, train, LossKind, TrainConfig};
use crate::{Error, Result};

pub const DEFAULT_LAMBDAS: [f64; 8] = [0.0, 0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0];

/// Ten consecutive seeds starting at `start`.
pub fn default_seeds(start: u64) -> Vec<u64> {
    (start..start + 10).collect()
}

/// Test-set outcome of one trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub lambda: f64,
    pub seed: u64,
    pub accuracy: f64,
    /// `acc(group 1) − acc(group 0)`.
    pub ad: f64,
    /// `f1`..`f16`; `None` where undefined.
    pub fairness: Vec<Option<f64>>,
}

impl TradeoffPoint {
    pub fn value(&self, notion: FairnessNotion) -> Option<f64> {
        self.fairness.get(notion.index()).copied().flatten()
    }
}

/// Trains one GAP model per `(lambda, seed)` cell on `train` and evaluates it
/// on `test`. Output is lambda-major in the order given. A `lambda = 0` cell
/// is exactly a wBCE run.
pub fn lambda_sweep(
    train_data: &FeatureMatrix,
    test_data: &FeatureMatrix,
    base: &TrainConfig,
    lambdas: &[f64],
    seeds: &[u64],
) -> Result<Vec<TradeoffPoint>> {
    if lambdas.is_empty() || seeds.is_empty() {
        return Err(Error::InvalidArgument(
            "sweep needs at least one lambda and one seed".into(),
        ));
    }
    if let Some(l) = lambdas.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
        return Err(Error::InvalidArgument(format!("lambda {l} must be >= 0")));
    }
    let cells: Vec<(f64, u64)> = lambdas
        .iter()
        .flat_map(|&l| seeds.iter().map(move |&s| (l, s)))
        .collect();
    cells
        .into_par_iter()
        .map(|(lambda, seed)| {
            let config = TrainConfig {
                loss: LossKind::Gap,
                lambda,
                seed,
                restarts: 1,
                ..base.clone()
            };
            let (params, _) = train(train_data, &config)?;
            let report = evaluate(&params, test_data)?;
            Ok(TradeoffPoint {
                lambda,
                seed,
                accuracy: report.accuracy,
                ad: report.accuracy_difference,
                fairness: report.values(),
            })
        })
        .collect()
}

fn header() -> Vec<String> {
    let mut h: Vec<String> = ["lambda", "seed", "accuracy", "ad"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend(FairnessNotion::ALL.iter().map(|n| n.label().to_string()));
    h
}

/// One row per point: `lambda,seed,accuracy,ad,f1..f16`; undefined values
/// are empty fields.
pub fn write_sweep_csv<W: std::io::Write>(points: &[TradeoffPoint], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header())?;
    for p in points {
        let mut row = vec![
            p.lambda.to_string(),
            p.seed.to_string(),
            p.accuracy.to_string(),
            p.ad.to_string(),
        ];
        row.extend(
            p.fairness
                .iter()
                .map(|v| v.map(|x| x.to_string()).unwrap_or_default()),
        );
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn read_sweep_csv<R: std::io::Read>(reader: R) -> Result<Vec<TradeoffPoint>> {
    let mut r = csv::Reader::from_reader(reader);
    let expected = header();
    let found: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if found != expected {
        let missing: Vec<String> = expected
            .into_iter()
            .filter(|c| !found.contains(c))
            .collect();
        return Err(if missing.is_empty() {
            Error::Format("sweep columns are out of order".into())
        } else {
            Error::Schema(missing)
        });
    }
    let number = |field: &str, what: &str| -> Result<f64> {
        field
            .parse::<f64>()
            .map_err(|_| Error::Format(format!("bad {what} value {field:?}")))
    };
    let mut points = Vec::new();
    for row in r.records() {
        let row = row?;
        let fairness = (4..20)
            .map(|i| match &row[i] {
                "" => Ok(None),
                s => number(s, "fairness").map(Some),
            })
            .collect::<Result<Vec<_>>>()?;
        points.push(TradeoffPoint {
            lambda: number(&row[0], "lambda")?,
            seed: row[1]
                .parse()
                .map_err(|_| Error::Format(format!("bad seed {:?}", &row[1])))?,
            accuracy: number(&row[2], "accuracy")?,
            ad: number(&row[3], "ad")?,
            fairness,
        });
    }
    Ok(points)
}
