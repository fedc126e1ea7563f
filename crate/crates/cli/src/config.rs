use std::path::{Path, PathBuf};

use gapfair::analysis::{default_seeds, Partition, DEFAULT_GRID_POINTS, DEFAULT_LAMBDAS};
use gapfair::dataset::{CohortPolicy, ColumnMap, Feature, FeatureSchema};
use gapfair::group_metrics::{FairnessNotion, UnfairnessScale};
use gapfair::trainer::TrainConfig;
use serde::{Deserialize, Serialize};

use crate::Failure;

/// Everything a run needs, read from one TOML document. Missing keys take
/// their defaults; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Input CSV for `ingest`.
    pub data: Option<PathBuf>,
    /// Artifact directory.
    pub out: PathBuf,
    pub columns: ColumnMap,
    pub cohort: CohortPolicy,
    pub features: Option<FeatureList>,
    pub split: SplitConfig,
    pub train: TrainConfig,
    pub sweep: SweepConfig,
    pub pareto: ParetoConfig,
    pub proxy: ProxyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data: None,
            out: PathBuf::from("gapfair-out"),
            columns: ColumnMap::default(),
            cohort: CohortPolicy::default(),
            features: None,
            split: SplitConfig::default(),
            train: TrainConfig::default(),
            sweep: SweepConfig::default(),
            pareto: ParetoConfig::default(),
            proxy: ProxyConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureList {
    pub numeric: Vec<Feature>,
    pub categorical: Vec<Feature>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            test_fraction: 0.2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub lambdas: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            lambdas: DEFAULT_LAMBDAS.to_vec(),
            seeds: default_seeds(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParetoConfig {
    pub notions: Vec<FairnessNotion>,
    /// Largest unfairness still counted as parity by the baseline.
    pub tolerance: f64,
    pub scale: UnfairnessScale,
}

impl Default for ParetoConfig {
    fn default() -> Self {
        Self {
            notions: FairnessNotion::ALL.to_vec(),
            tolerance: 0.02,
            scale: UnfairnessScale::Absolute,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProxyConfig {
    pub variables: Vec<String>,
    pub partitions: Vec<Partition>,
    pub grid_points: usize,
}

impl Default for ProxyConfig {
    fn default() -> Self {
        Self {
            variables: vec!["age".into(), "priors_count".into()],
            partitions: Partition::defaults(),
            grid_points: DEFAULT_GRID_POINTS,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::input(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| Failure::input(format!("invalid config {}: {e}", path.display())))
    }

    pub fn schema(&self) -> FeatureSchema {
        let mut schema = FeatureSchema::default_for(&self.cohort);
        if let Some(list) = &self.features {
            schema.numeric = list.numeric.clone();
            schema.categorical = list.categorical.clone();
        }
        schema
    }
}
