//! Canonical JSON model files.
//!
//! Keys appear in a fixed order and reals use shortest round-trip
//! formatting, so save → load → save reproduces the same bytes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::BoostModel;
use super::params::{HyperParams, ObjectiveKind, ObjectiveSpec};
use super::tree::{Node, RegressionTree, LEAF};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format_version: u32,
    objective: ObjectiveRecord,
    params: ParamsRecord,
    base_margin: f64,
    n_features: usize,
    class_names: Vec<String>,
    trees: Vec<Vec<TreeRecord>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectiveRecord {
    kind: ObjectiveKind,
    n_classes: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsRecord {
    num_rounds: usize,
    eta: f64,
    gamma: f64,
    lambda: f64,
    max_depth: usize,
    min_child_weight: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeRecord {
    nodes: Vec<NodeRecord>,
}

/// Leaves carry `feature`, `left` and `right` of -1.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    feature: i64,
    threshold: f64,
    left: i64,
    right: i64,
    weight: f64,
    gain: f64,
}

fn encode_index(i: u32) -> i64 {
    if i == LEAF {
        -1
    } else {
        i64::from(i)
    }
}

fn decode_index(i: i64, what: &str) -> Result<u32> {
    match i {
        -1 => Ok(LEAF),
        i if (0..i64::from(LEAF)).contains(&i) => Ok(i as u32),
        i => Err(Error::format(format!("invalid {what} index {i}"))),
    }
}

impl From<&BoostModel> for ModelFile {
    fn from(m: &BoostModel) -> Self {
        ModelFile {
            format_version: FORMAT_VERSION,
            objective: ObjectiveRecord {
                kind: m.objective.kind,
                n_classes: m.objective.n_classes,
            },
            params: ParamsRecord {
                num_rounds: m.params.num_rounds,
                eta: m.params.eta,
                gamma: m.params.gamma,
                lambda: m.params.lambda,
                max_depth: m.params.max_depth,
                min_child_weight: m.params.min_child_weight,
            },
            base_margin: m.base_margin,
            n_features: m.n_features,
            class_names: m.class_names.clone(),
            trees: m
                .trees
                .iter()
                .map(|round| {
                    round
                        .iter()
                        .map(|t| TreeRecord {
                            nodes: t
                                .nodes
                                .iter()
                                .map(|n| NodeRecord {
                                    feature: encode_index(n.feature),
                                    threshold: n.threshold,
                                    left: encode_index(n.left),
                                    right: encode_index(n.right),
                                    weight: n.weight,
                                    gain: n.gain,
                                })
                                .collect(),
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

impl TryFrom<ModelFile> for BoostModel {
    type Error = Error;

    fn try_from(f: ModelFile) -> Result<Self> {
        if f.format_version != FORMAT_VERSION {
            return Err(Error::format(format!(
                "unsupported model format_version {}",
                f.format_version
            )));
        }
        let objective = ObjectiveSpec::new(f.objective.kind, f.objective.n_classes)
            .map_err(|e| Error::format(e.to_string()))?;
        let params = HyperParams {
            num_rounds: f.params.num_rounds,
            eta: f.params.eta,
            gamma: f.params.gamma,
            lambda: f.params.lambda,
            max_depth: f.params.max_depth,
            min_child_weight: f.params.min_child_weight,
            ..HyperParams::default()
        };
        params
            .validate()
            .map_err(|e| Error::format(e.to_string()))?;
        let mut trees = Vec::with_capacity(f.trees.len());
        for round in f.trees {
            let mut out = Vec::with_capacity(round.len());
            for t in round {
                let mut nodes = Vec::with_capacity(t.nodes.len());
                for n in t.nodes {
                    let feature = decode_index(n.feature, "feature")?;
                    let (left, right) = (
                        decode_index(n.left, "child")?,
                        decode_index(n.right, "child")?,
                    );
                    if (feature == LEAF) != (left == LEAF) || (left == LEAF) != (right == LEAF) {
                        return Err(Error::format(
                            "node must be a leaf with no children or a split with two",
                        ));
                    }
                    nodes.push(Node {
                        feature,
                        threshold: n.threshold,
                        left,
                        right,
                        weight: n.weight,
                        gain: n.gain,
                    });
                }
                out.push(RegressionTree { nodes });
            }
            trees.push(out);
        }
        let model = BoostModel {
            objective,
            params,
            base_margin: f.base_margin,
            n_features: f.n_features,
            class_names: f.class_names,
            trees,
        };
        model.validate().map_err(|e| Error::format(e.to_string()))?;
        Ok(model)
    }
}

pub fn model_to_string(model: &BoostModel) -> String {
    let mut s = serde_json::to_string(&ModelFile::from(model)).expect("model serialises");
    s.push('\n');
    s
}

pub fn model_from_str(text: &str) -> Result<BoostModel> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Format {
        line: Some(e.line() as u64),
        message: e.to_string(),
    })?;
    BoostModel::try_from(file)
}

pub fn save_model(model: &BoostModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_string(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<BoostModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_str(&text)
}
