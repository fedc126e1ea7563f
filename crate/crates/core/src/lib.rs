//! Fairness-aware binary classification.
//!
//! The crate is organised as a pipeline:
//!
//! * [`dataset`] reads COMPAS-style records, filters a cohort, encodes features
//!   and produces stratified splits.
//! * [`group_metrics`] turns predictions into per-group confusion counts and the
//!   sixteen two-group fairness notions plus the accuracy difference (AD).
//! * [`losses`] holds BCE, weighted BCE, per-group cross-entropy and the group
//!   accuracy parity (GAP) loss, each with analytic logit gradients.
//! * [`model`] is a small feed-forward classifier with hand-written backprop.
//! * [`trainer`] runs mini-batch training, multi-restart selection and evaluation.
//! * [`analysis`] covers lambda sweeps, Pareto fronts, perfect-fairness
//!   baselines, violin summaries and distribution-proxy reports.
//!
//! Group orientation is fixed throughout: group 0 is the protected group
//! (African-American in the default cohort) and group 1 the reference group
//! (Caucasian).

pub mod analysis;
pub mod dataset;
mod error;
pub mod group_metrics;
pub mod losses;
pub mod model;
pub mod synthetic;
pub mod trainer;

pub use error::{Error, ErrorClass, Result};
