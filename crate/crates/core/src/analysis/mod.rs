//! Trade-off analysis: lambda sweeps, Pareto fronts, perfect-fairness
//! baselines, violin summaries and distribution-proxy reports.

mod distance;
mod pareto;
pub mod plot;
mod proxy;
mod sweep;
mod violin;

pub use distance::distribution_distance;
pub use pareto::{
    fairness_baseline, pareto_front, pareto_front_scaled, Baseline, FrontPoint, ParetoFront,
};
pub use proxy::{
    proxy_matrix, proxy_report, BinaryPartition, NumericColumn, Partition, PartitionAttribute,
    ProxyEntry, ProxyReport, ProxyScore, Variable,
};
pub use sweep::{
    default_seeds, lambda_sweep, read_sweep_csv, write_sweep_csv, TradeoffPoint, DEFAULT_LAMBDAS,
};
pub use violin::{
    quantile, silverman_bandwidth, trapezoid, violin_summary, Bandwidth, ViolinSummary,
    DEFAULT_GRID_POINTS,
};
