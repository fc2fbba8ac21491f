//! Regularised second-order gradient tree boosting for dense feature
//! matrices, with stratified evaluation drivers and a command-line harness.
//!
//! The typical pipeline loads CNN features (`data`), trains an additive tree
//! ensemble (`boost`) and scores it with cross-validation or a holdout split
//! (`experiment`, `metrics`).

pub mod boost;
pub mod cli;
pub mod data;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod parallel;

pub use boost::{BoostModel, HyperParams, ObjectiveKind, ObjectiveSpec, Trainer};
pub use data::{Dataset, FeatureMatrix, SplitPlan};
pub use error::{Error, Result};
pub use experiment::{run_cv, run_holdout, CvResult, Evaluator};
pub use metrics::{ConfusionMatrix, MetricsReport};
pub use parallel::Parallelism;
