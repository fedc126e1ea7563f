//! `gapfair` command-line pipeline.
//!
//! Every command reads a TOML run configuration (`--config`), applies its own
//! flags on top and works inside one artifact directory (`--out`). Precedence
//! is flags, then the configuration file, then built-in defaults.

mod artifacts;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gapfair::analysis::{
    fairness_baseline, lambda_sweep, pareto_front_scaled, plot, proxy_report, read_sweep_csv,
    write_sweep_csv, Baseline, ParetoFront,
};
use gapfair::dataset::{
    cohort_summary, encode_features, filter_cohort_staged, load_records_with, stratified_partition,
    write_records, ColumnMap, FeatureMatrix, GroupAttribute, RecordTable,
};
use gapfair::group_metrics::{FairnessNotion, UnfairnessScale};
use gapfair::model::{Activation, ModelParams};
use gapfair::trainer::{evaluate, multi_restart, LossKind, OptimizerKind, TrainConfig};
use gapfair::ErrorClass;
use serde_json::json;

use crate::artifacts::{read_json, write_atomic, write_json};
use crate::config::RunConfig;

/// A failed command: message for stderr and the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn other(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<gapfair::Error> for Failure {
    fn from(e: gapfair::Error) -> Self {
        let code = match e.class() {
            ErrorClass::Input => 2,
            ErrorClass::Degenerate => 3,
            ErrorClass::Other => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

#[derive(Parser, Debug)]
#[command(
    name = "gapfair",
    version,
    about = "Group accuracy parity training and fairness trade-off analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load a CSV, filter the cohort, encode features and write the train/test split.
    Ingest(IngestArgs),
    /// Train with restarts and keep the model with the lowest validation loss.
    Train(TrainArgs),
    /// Score the trained model on the test split.
    Evaluate(EvaluateArgs),
    /// Train one GAP model per (lambda, seed) and record test-set fairness.
    Sweep(SweepArgs),
    /// Extract per-notion Pareto fronts and perfect-fairness baselines from a sweep.
    Pareto(ParetoArgs),
    /// Compare conditional distributions of nonprotected variables across partitions.
    Proxy(ProxyArgs),
    /// Bundle every JSON artifact into one document.
    Report(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// TOML run configuration [default: built-in defaults]
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Artifact directory [default: gapfair-out]
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<RunConfig, Failure> {
        let mut config = RunConfig::load(self.config.as_deref())?;
        if let Some(out) = &self.out {
            config.out = out.clone();
        }
        Ok(config)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GroupArg {
    Race,
    Sex,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LossArg {
    Bce,
    Wbce,
    Gap,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OptimizerArg {
    Adam,
    Sgd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ActivationArg {
    Relu,
    Tanh,
}

#[derive(Args, Debug)]
struct IngestArgs {
    #[command(flatten)]
    common: Common,
    /// Input CSV with a header row [default: none, required here or in the config]
    #[arg(long, value_name = "CSV")]
    data: Option<PathBuf>,
    /// Group attribute [default: race]
    #[arg(long, value_enum)]
    group_attribute: Option<GroupArg>,
    /// Youngest age kept, inclusive [default: 18]
    #[arg(long)]
    age_min: Option<i64>,
    /// Oldest age kept, inclusive [default: 40]
    #[arg(long)]
    age_max: Option<i64>,
    /// Keep only |days_b_screening_arrest| <= 30 and drop ordinary-traffic charges [default: true]
    #[arg(long, value_name = "BOOL")]
    screening_window: Option<bool>,
    /// Fraction of rows held out for testing [default: 0.2]
    #[arg(long)]
    test_fraction: Option<f64>,
    /// Seed of the stratified train/test split [default: 0]
    #[arg(long)]
    split_seed: Option<u64>,
}

/// Optimization flags shared by `train` and `sweep`.
#[derive(Args, Debug)]
struct FitArgs {
    /// Passes over the training data [default: 200]
    #[arg(long)]
    epochs: Option<usize>,
    /// Step size [default: 0.01]
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Mini-batch size [default: 128]
    #[arg(long)]
    batch_size: Option<usize>,
    /// Optimizer [default: adam]
    #[arg(long, value_enum)]
    optimizer: Option<OptimizerArg>,
    /// Hidden layer widths, comma-separated; empty for logistic regression [default: 16]
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    hidden: Option<Vec<usize>>,
    /// Hidden activation [default: relu]
    #[arg(long, value_enum)]
    activation: Option<ActivationArg>,
    /// Fraction of training rows used for model selection [default: 0.2]
    #[arg(long)]
    validation_fraction: Option<f64>,
}

impl FitArgs {
    fn apply(&self, c: &mut TrainConfig) {
        if let Some(v) = self.epochs {
            c.epochs = v;
        }
        if let Some(v) = self.learning_rate {
            c.learning_rate = v;
        }
        if let Some(v) = self.batch_size {
            c.batch_size = v;
        }
        if let Some(v) = self.optimizer {
            c.optimizer = match v {
                OptimizerArg::Adam => OptimizerKind::Adam,
                OptimizerArg::Sgd => OptimizerKind::Sgd,
            };
        }
        if let Some(v) = &self.hidden {
            c.hidden_layers = v.clone();
        }
        if let Some(v) = self.activation {
            c.activation = match v {
                ActivationArg::Relu => Activation::Relu,
                ActivationArg::Tanh => Activation::Tanh,
            };
        }
        if let Some(v) = self.validation_fraction {
            c.validation_fraction = v;
        }
    }
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    /// Training loss [default: gap]
    #[arg(long, value_enum)]
    loss: Option<LossArg>,
    /// GAP penalty weight [default: 1]
    #[arg(long)]
    lambda: Option<f64>,
    /// Seed of the first restart; restart i uses seed + i [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Independent restarts [default: 10]
    #[arg(long)]
    restarts: Option<usize>,
    #[command(flatten)]
    fit: FitArgs,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[command(flatten)]
    common: Common,
    /// Model to score [default: <out>/model.json]
    #[arg(long, value_name = "JSON")]
    model: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Penalty weights, comma-separated [default: 0,0.01,0.03,0.1,0.3,1,3,10]
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    /// Training seeds, comma-separated [default: 0,1,...,9]
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[command(flatten)]
    fit: FitArgs,
}

#[derive(Args, Debug)]
struct ParetoArgs {
    #[command(flatten)]
    common: Common,
    /// Sweep table to read [default: <out>/sweep.csv]
    #[arg(long, value_name = "CSV")]
    sweep: Option<PathBuf>,
    /// Notions to analyse, comma-separated labels or names [default: f1,...,f16]
    #[arg(long, value_delimiter = ',')]
    notions: Option<Vec<FairnessNotion>>,
    /// Largest unfairness the baseline still treats as parity [default: 0.02]
    #[arg(long)]
    tolerance: Option<f64>,
    /// Measure ratio notions as |ln value| instead of |value - 1| [default: false]
    #[arg(long)]
    log_ratio: bool,
}

#[derive(Args, Debug)]
struct ProxyArgs {
    #[command(flatten)]
    common: Common,
    /// Numeric variables, comma-separated [default: age,priors_count]
    #[arg(long, value_delimiter = ',')]
    variables: Option<Vec<String>>,
    /// Density grid size per violin [default: 256]
    #[arg(long)]
    grid_points: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Sweep(a) => sweep(a),
        Command::Pareto(a) => pareto(a),
        Command::Proxy(a) => proxy(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn create_out(dir: &Path) -> CmdResult {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::other(format!("cannot create {}: {e}", dir.display())))
}

fn ingest(args: IngestArgs) -> CmdResult {
    let mut cfg = args.common.load()?;
    if let Some(d) = args.data {
        cfg.data = Some(d);
    }
    if let Some(g) = args.group_attribute {
        cfg.cohort.group_attribute = match g {
            GroupArg::Race => GroupAttribute::Race,
            GroupArg::Sex => GroupAttribute::Sex,
        };
    }
    if let Some(v) = args.age_min {
        cfg.cohort.age_min = v;
    }
    if let Some(v) = args.age_max {
        cfg.cohort.age_max = v;
    }
    if let Some(v) = args.screening_window {
        cfg.cohort.apply_screening_window = v;
    }
    if let Some(v) = args.test_fraction {
        cfg.split.test_fraction = v;
    }
    if let Some(v) = args.split_seed {
        cfg.split.seed = v;
    }
    let data = cfg
        .data
        .clone()
        .ok_or_else(|| Failure::input("no input file: pass --data or set `data` in the config"))?;

    let table = load_records_with(&data, &cfg.columns)?;
    println!(
        "loaded {} records ({} rows dropped as unparseable)",
        table.len(),
        table.dropped
    );
    let (cohort, stages) = filter_cohort_staged(&table, &cfg.cohort)?;
    for s in &stages {
        println!("  {:<16} {}", s.stage, s.remaining);
    }

    let schema = cfg.schema();
    let all = encode_features(&cohort, &schema, None)?.matrix;
    let (train_rows, test_rows) = stratified_partition(
        &all.group_ids,
        &all.labels,
        cfg.split.test_fraction,
        cfg.split.seed,
    )?;
    let subset = |rows: &[usize]| {
        RecordTable::new(rows.iter().map(|&i| cohort.records[i].clone()).collect())
    };
    let train_enc = encode_features(&subset(&train_rows), &schema, None)?;
    let test_enc = encode_features(&subset(&test_rows), &schema, Some(&train_enc.stats))?;
    println!(
        "split {} train / {} test rows, {} feature columns",
        train_enc.matrix.rows, test_enc.matrix.rows, train_enc.matrix.cols
    );

    create_out(&cfg.out)?;
    let summary = json!({
        "input": data.display().to_string(),
        "loaded": table.len(),
        "dropped_rows": table.dropped,
        "stages": stages,
        "pre_filter": cohort_summary(&table),
        "cohort": cohort_summary(&cohort),
        "schema": schema,
        "split": {
            "test_fraction": cfg.split.test_fraction,
            "seed": cfg.split.seed,
            "train_rows": train_enc.matrix.rows,
            "test_rows": test_enc.matrix.rows,
            "unseen_levels_in_test": test_enc.unseen_levels,
        },
    });
    write_json(&cfg.out.join("summary.json"), &summary)?;
    write_json(&cfg.out.join("stats.json"), &train_enc.stats)?;
    write_json(&cfg.out.join("train.json"), &train_enc.matrix)?;
    write_json(&cfg.out.join("test.json"), &test_enc.matrix)?;
    let mut csv = Vec::new();
    write_records(&cohort, &mut csv).map_err(gapfair::Error::from)?;
    write_atomic(&cfg.out.join("cohort.csv"), &csv)
}

fn read_matrix(out: &Path, name: &str) -> Result<FeatureMatrix, Failure> {
    read_json(&out.join(name))
}

fn train(args: TrainArgs) -> CmdResult {
    let mut cfg = args.common.load()?;
    let t = &mut cfg.train;
    if let Some(l) = args.loss {
        t.loss = match l {
            LossArg::Bce => LossKind::Bce,
            LossArg::Wbce => LossKind::Wbce,
            LossArg::Gap => LossKind::Gap,
        };
    }
    if let Some(v) = args.lambda {
        t.lambda = v;
    }
    if let Some(v) = args.seed {
        t.seed = v;
    }
    if let Some(v) = args.restarts {
        t.restarts = v;
    }
    args.fit.apply(t);

    let data = read_matrix(&cfg.out, "train.json")?;
    let outcome = multi_restart(&data, &cfg.train)?;
    let winner = &outcome.selection.candidates[outcome.selection.winning_index];
    println!(
        "{} restarts of {} (lambda {}): seed {} selected, validation loss {:.6}",
        cfg.train.restarts, cfg.train.loss, cfg.train.lambda, winner.seed, winner.validation_loss
    );
    let mut history = String::new();
    for h in &outcome.histories {
        history.push_str(&h.to_jsonl()?);
    }
    write_atomic(
        &cfg.out.join("model.json"),
        outcome.best.to_json()?.as_bytes(),
    )?;
    write_json(
        &cfg.out.join("selection.json"),
        &json!({ "config": cfg.train, "selection": outcome.selection }),
    )?;
    write_atomic(&cfg.out.join("history.jsonl"), history.as_bytes())
}

fn evaluate_cmd(args: EvaluateArgs) -> CmdResult {
    let cfg = args.common.load()?;
    let path = args.model.unwrap_or_else(|| cfg.out.join("model.json"));
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let params = ModelParams::from_json(&text)?;
    let test = read_matrix(&cfg.out, "test.json")?;
    let report = evaluate(&params, &test)?;
    println!(
        "accuracy {:.4}, accuracy difference {:+.4}",
        report.accuracy, report.accuracy_difference
    );
    for (name, c) in report.group_names.iter().zip(&report.confusion.groups) {
        println!("  {name}: TP {} FP {} TN {} FN {}", c.tp, c.fp, c.tn, c.fn_);
    }
    write_json(&cfg.out.join("report.json"), &report)
}

fn sweep(args: SweepArgs) -> CmdResult {
    let mut cfg = args.common.load()?;
    if let Some(v) = args.lambdas {
        cfg.sweep.lambdas = v;
    }
    if let Some(v) = args.seeds {
        cfg.sweep.seeds = v;
    }
    args.fit.apply(&mut cfg.train);
    let train_set = read_matrix(&cfg.out, "train.json")?;
    let test_set = read_matrix(&cfg.out, "test.json")?;
    let points = lambda_sweep(
        &train_set,
        &test_set,
        &cfg.train,
        &cfg.sweep.lambdas,
        &cfg.sweep.seeds,
    )?;
    println!(
        "{} lambdas x {} seeds = {} models",
        cfg.sweep.lambdas.len(),
        cfg.sweep.seeds.len(),
        points.len()
    );
    let mut buf = Vec::new();
    write_sweep_csv(&points, &mut buf)?;
    write_atomic(&cfg.out.join("sweep.csv"), &buf)
}

fn pareto(args: ParetoArgs) -> CmdResult {
    let mut cfg = args.common.load()?;
    if let Some(v) = args.notions {
        cfg.pareto.notions = v;
    }
    if let Some(v) = args.tolerance {
        cfg.pareto.tolerance = v;
    }
    if args.log_ratio {
        cfg.pareto.scale = UnfairnessScale::LogRatio;
    }
    let path = args.sweep.unwrap_or_else(|| cfg.out.join("sweep.csv"));
    let file = std::fs::File::open(&path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let points = read_sweep_csv(file)?;

    let mut fronts: Vec<ParetoFront> = Vec::new();
    let mut baselines: Vec<Baseline> = Vec::new();
    for &notion in &cfg.pareto.notions {
        let front = pareto_front_scaled(&points, notion, cfg.pareto.scale).map_err(|e| {
            let mut f = Failure::from(e);
            f.message = format!("{} ({}): {}", notion.label(), notion.name(), f.message);
            f
        })?;
        let baseline = fairness_baseline(&front, cfg.pareto.tolerance).expect("front is non-empty");
        println!(
            "{:<4} {:<24} front {:>3} points, baseline accuracy {:.4}{}",
            notion.label(),
            notion.name(),
            front.points.len(),
            baseline.accuracy,
            if baseline.extrapolated {
                " (extrapolated)"
            } else {
                ""
            }
        );
        fronts.push(front);
        baselines.push(baseline);
    }
    create_out(&cfg.out)?;
    for front in &fronts {
        let svg = plot::front_svg(&points, front);
        write_atomic(
            &cfg.out.join(format!("front_{}.svg", front.notion.label())),
            svg.as_bytes(),
        )?;
    }
    write_json(&cfg.out.join("fronts.json"), &fronts)?;
    write_json(&cfg.out.join("baselines.json"), &baselines)
}

fn file_stem(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect()
}

fn proxy(args: ProxyArgs) -> CmdResult {
    let mut cfg = args.common.load()?;
    if let Some(v) = args.variables {
        cfg.proxy.variables = v;
    }
    if let Some(v) = args.grid_points {
        cfg.proxy.grid_points = v;
    }
    let cohort = load_records_with(cfg.out.join("cohort.csv"), &ColumnMap::default())?;
    let report = proxy_report(
        &cohort,
        &cfg.proxy.variables,
        &cfg.proxy.partitions,
        cfg.proxy.grid_points,
    )?;
    for e in &report.entries {
        println!(
            "{:<16} by {:<16} distance {:.4}",
            e.variable, e.partition, e.distance
        );
    }
    for s in &report.scores {
        println!(
            "{:<16} proxy score |{} - {}| = {:.4}",
            s.variable, s.partition_a, s.partition_b, s.score
        );
    }
    for e in &report.entries {
        for v in &e.violins {
            let name = format!(
                "violin_{}_{}_{}.svg",
                file_stem(&e.variable),
                file_stem(&e.partition),
                file_stem(&v.group)
            );
            let title = format!("{} | {} = {}", e.variable, e.partition, v.group);
            write_atomic(
                &cfg.out.join(name),
                plot::violin_svg(&title, std::slice::from_ref(v)).as_bytes(),
            )?;
        }
    }
    write_json(&cfg.out.join("proxy.json"), &report)
}

fn report(common: Common) -> CmdResult {
    let cfg = common.load()?;
    let entries = std::fs::read_dir(&cfg.out)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", cfg.out.display())))?;
    let mut names: Vec<String> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".json") && n != "bundle.json")
        .collect();
    names.sort();
    let mut artifacts = serde_json::Map::new();
    for name in &names {
        let value: serde_json::Value = read_json(&cfg.out.join(name))?;
        artifacts.insert(name.trim_end_matches(".json").to_string(), value);
    }
    let generated_at = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    println!("bundled {} artifacts", names.len());
    write_json(
        &cfg.out.join("bundle.json"),
        &json!({ "generated_at": generated_at, "artifacts": artifacts }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn degenerate_errors_exit_with_three() {
        let f = Failure::from(gapfair::Error::EmptyFront("f3".into()));
        assert_eq!(f.code, 3);
        let f = Failure::from(gapfair::Error::Schema(vec!["age".into()]));
        assert_eq!(f.code, 2);
    }
}
