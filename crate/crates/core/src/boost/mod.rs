//! Second-order gradient tree boosting.
//!
//! Each round fits one regression tree per output group to the first and
//! second derivatives of the loss at the current margins, using exact greedy
//! split search, then adds `eta` times its leaf scores to the margins.

pub mod model;
pub mod objective;
pub mod params;
pub mod persist;
pub mod tree;

pub use model::{argmax_rows, train, BoostModel, Fit, ScoreMatrix, Trainer};
pub use objective::{grad_hess_logistic, grad_hess_softmax};
pub use params::{HyperParams, ObjectiveKind, ObjectiveSpec};
pub use persist::{load_model, save_model};
pub use tree::{build_tree, leaf_weight, split_gain, Node, RegressionTree, SortedColumns};
