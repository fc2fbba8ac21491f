use super::objective::{
    grad_hess_logistic, grad_hess_softmax_into, logistic_loss, sigmoid, softmax_into, softmax_loss,
};
use super::params::{HyperParams, ObjectiveKind, ObjectiveSpec};
use super::tree::{build_tree, RegressionTree, SortedColumns};
use crate::data::{Dataset, FeatureMatrix};
use crate::error::{Error, Result};
use crate::parallel::Parallelism;

/// Row-major `f64` matrix of per-row scores (margins or probabilities).
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub values: Vec<f64>,
}

impl ScoreMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.n_cols)
    }
}

/// Additive tree ensemble. `trees[round][group]` holds unscaled leaf
/// weights; `eta` is applied when margins are accumulated.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostModel {
    pub objective: ObjectiveSpec,
    pub params: HyperParams,
    pub base_margin: f64,
    pub n_features: usize,
    pub class_names: Vec<String>,
    pub trees: Vec<Vec<RegressionTree>>,
}

impl BoostModel {
    pub fn group_size(&self) -> usize {
        self.objective.group_size()
    }

    pub fn n_trees(&self) -> usize {
        self.trees.iter().map(Vec::len).sum()
    }

    /// Checks the structural invariants of a model, e.g. after loading.
    pub fn validate(&self) -> Result<()> {
        self.objective.validate()?;
        if self.class_names.len() != self.objective.n_classes {
            return Err(Error::Consistency(format!(
                "{} class names for a {}-class objective",
                self.class_names.len(),
                self.objective.n_classes
            )));
        }
        if self.n_features == 0 {
            return Err(Error::Consistency("model has zero features".into()));
        }
        if !self.base_margin.is_finite() {
            return Err(Error::Consistency("non-finite base margin".into()));
        }
        let group = self.group_size();
        for (r, round) in self.trees.iter().enumerate() {
            if round.len() != group {
                return Err(Error::Consistency(format!(
                    "round {r} has {} trees, expected {group}",
                    round.len()
                )));
            }
            for tree in round {
                tree.validate(self.n_features, self.params.max_depth)?;
            }
        }
        Ok(())
    }

    fn check_shape(&self, features: &FeatureMatrix) -> Result<()> {
        if features.n_cols() != self.n_features {
            return Err(Error::Shape {
                expected: self.n_features,
                actual: features.n_cols(),
            });
        }
        Ok(())
    }

    /// Raw additive scores, `n_rows x group_size`.
    pub fn predict_margin(&self, features: &FeatureMatrix) -> Result<ScoreMatrix> {
        self.predict_margin_with(features, Parallelism::default())
    }

    pub fn predict_margin_with(
        &self,
        features: &FeatureMatrix,
        par: Parallelism,
    ) -> Result<ScoreMatrix> {
        self.check_shape(features)?;
        let group = self.group_size();
        let mut values = vec![self.base_margin; features.n_rows() * group];
        let eta = self.params.eta;
        par.for_each_chunk(&mut values, group, |i, out| {
            let row = features.row(i);
            for round in &self.trees {
                for (m, tree) in out.iter_mut().zip(round) {
                    *m += eta * tree.predict_row(row);
                }
            }
        });
        Ok(ScoreMatrix {
            n_rows: features.n_rows(),
            n_cols: group,
            values,
        })
    }

    /// Class probabilities, `n_rows x n_classes`. For the logistic objective
    /// column 1 is the probability of class index 1.
    pub fn predict_proba(&self, features: &FeatureMatrix) -> Result<ScoreMatrix> {
        let margins = self.predict_margin(features)?;
        Ok(self.link(&margins))
    }

    pub fn link(&self, margins: &ScoreMatrix) -> ScoreMatrix {
        let k = self.objective.n_classes;
        let mut values = vec![0.0; margins.n_rows * k];
        match self.objective.kind {
            ObjectiveKind::BinaryLogistic => {
                for (out, m) in values.chunks_mut(2).zip(margins.rows()) {
                    let p = sigmoid(m[0]);
                    out[0] = 1.0 - p;
                    out[1] = p;
                }
            }
            ObjectiveKind::Softmax => {
                for (out, m) in values.chunks_mut(k).zip(margins.rows()) {
                    softmax_into(m, out);
                }
            }
        }
        ScoreMatrix {
            n_rows: margins.n_rows,
            n_cols: k,
            values,
        }
    }

    /// Most probable class per row. Ties go to the lowest class index, so a
    /// logistic probability of exactly 0.5 predicts class 0.
    pub fn predict_class(&self, features: &FeatureMatrix) -> Result<Vec<u32>> {
        Ok(argmax_rows(&self.predict_proba(features)?))
    }
}

pub fn argmax_rows(scores: &ScoreMatrix) -> Vec<u32> {
    scores
        .rows()
        .map(|row| {
            let mut best = 0;
            for (k, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = k;
                }
            }
            best as u32
        })
        .collect()
}

/// Outcome of a training run.
#[derive(Debug, Clone)]
pub struct Fit {
    pub model: BoostModel,
    /// Regularised training objective before the first round and after each
    /// round (`num_rounds + 1` entries).
    pub objective_trace: Vec<f64>,
    /// Final margins of the training rows, in ascending row order,
    /// `group_size` values per row.
    pub train_margins: Vec<f64>,
    pub train_rows: Vec<usize>,
}

impl Fit {
    pub fn final_objective(&self) -> f64 {
        *self
            .objective_trace
            .last()
            .expect("trace starts with the initial objective")
    }
}

#[derive(Debug, Clone)]
pub struct Trainer {
    pub params: HyperParams,
    pub objective: ObjectiveSpec,
    pub parallelism: Parallelism,
}

impl Trainer {
    pub fn new(params: HyperParams, objective: ObjectiveSpec) -> Self {
        Trainer {
            params,
            objective,
            parallelism: Parallelism::default(),
        }
    }

    pub fn with_parallelism(mut self, par: Parallelism) -> Self {
        self.parallelism = par;
        self
    }

    pub fn fit(&self, dataset: &Dataset) -> Result<Fit> {
        let rows: Vec<usize> = (0..dataset.n_rows()).collect();
        self.fit_rows(dataset, &rows)
    }

    /// Trains on the given subset of rows only.
    pub fn fit_rows(&self, dataset: &Dataset, rows: &[usize]) -> Result<Fit> {
        self.params.validate()?;
        self.objective.validate()?;
        if self.objective.n_classes != dataset.n_classes() {
            return Err(Error::Config(format!(
                "objective expects {} classes, dataset has {}",
                self.objective.n_classes,
                dataset.n_classes()
            )));
        }
        let mut rows = rows.to_vec();
        rows.sort_unstable();
        rows.dedup();
        if rows.is_empty() {
            return Err(Error::Input("no training rows".into()));
        }
        if let Some(&r) = rows.last().filter(|&&r| r >= dataset.n_rows()) {
            return Err(Error::Input(format!("training row {r} out of range")));
        }

        let par = self.parallelism;
        let params = &self.params;
        let features = dataset.features();
        let labels = dataset.labels();
        let n = dataset.n_rows();
        let group = self.objective.group_size();
        let base_margin = 0.0;

        let sorted = SortedColumns::new(features, &rows, par);
        // margins[j * group + k]: class k of the j-th training row.
        let mut margins = vec![base_margin; rows.len() * group];
        let mut grads = vec![vec![0.0; n]; group];
        let mut hess = vec![vec![0.0; n]; group];
        let mut trees: Vec<Vec<RegressionTree>> = Vec::with_capacity(params.num_rounds);
        let mut penalty = 0.0;
        let mut trace = Vec::with_capacity(params.num_rounds + 1);
        trace.push(self.loss(&rows, labels, &margins));

        let mut g_row = vec![0.0; group];
        let mut h_row = vec![0.0; group];
        for _ in 0..params.num_rounds {
            for (j, &r) in rows.iter().enumerate() {
                let m = &margins[j * group..(j + 1) * group];
                match self.objective.kind {
                    ObjectiveKind::BinaryLogistic => {
                        let (g, h) = grad_hess_logistic(labels[r], m[0]);
                        grads[0][r] = g;
                        hess[0][r] = h;
                    }
                    ObjectiveKind::Softmax => {
                        grad_hess_softmax_into(labels[r], m, &mut g_row, &mut h_row);
                        for k in 0..group {
                            grads[k][r] = g_row[k];
                            hess[k][r] = h_row[k];
                        }
                    }
                }
            }

            let round: Vec<RegressionTree> = par.map(group, |k| {
                build_tree(features, &rows, &grads[k], &hess[k], params, &sorted, par)
            });

            for (j, &r) in rows.iter().enumerate() {
                let row = features.row(r);
                for (k, tree) in round.iter().enumerate() {
                    margins[j * group + k] += params.eta * tree.predict_row(row);
                }
            }
            penalty += round.iter().map(|t| tree_penalty(t, params)).sum::<f64>();
            trace.push(self.loss(&rows, labels, &margins) + penalty);
            trees.push(round);
        }

        let model = BoostModel {
            objective: self.objective,
            params: *params,
            base_margin,
            n_features: features.n_cols(),
            class_names: dataset.class_names().to_vec(),
            trees,
        };
        Ok(Fit {
            model,
            objective_trace: trace,
            train_margins: margins,
            train_rows: rows,
        })
    }

    fn loss(&self, rows: &[usize], labels: &[u32], margins: &[f64]) -> f64 {
        let group = self.objective.group_size();
        rows.iter()
            .enumerate()
            .map(|(j, &r)| match self.objective.kind {
                ObjectiveKind::BinaryLogistic => logistic_loss(labels[r], margins[j]),
                ObjectiveKind::Softmax => {
                    softmax_loss(labels[r], &margins[j * group..(j + 1) * group])
                }
            })
            .sum()
    }
}

/// `γT + ½λ‖ηw‖²` for one tree, i.e. the complexity of the function the
/// tree actually adds to the margin.
pub fn tree_penalty(tree: &RegressionTree, params: &HyperParams) -> f64 {
    let sq: f64 = tree
        .leaves()
        .map(|l| {
            let w = params.eta * l.weight;
            w * w
        })
        .sum();
    params.gamma * tree.n_leaves() as f64 + 0.5 * params.lambda * sq
}

/// Trains on every row of `dataset`.
pub fn train(
    dataset: &Dataset,
    params: &HyperParams,
    objective: ObjectiveSpec,
) -> Result<BoostModel> {
    Trainer::new(*params, objective)
        .fit(dataset)
        .map(|f| f.model)
}
