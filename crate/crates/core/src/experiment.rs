//! Cross-validation and holdout drivers.

use serde::Serialize;

use crate::boost::{HyperParams, ObjectiveSpec, Trainer};
use crate::data::{stratified_holdout, stratified_kfold, Dataset, Fold, SplitPlan};
use crate::error::{Error, Result};
use crate::metrics::{binary_metrics, confusion_named, multiclass_metrics, Metric, MetricsReport};
use crate::parallel::Parallelism;

/// Two-class reports treat the first class whose name contains "covid"
/// (case-insensitive) as positive, falling back to class index 1.
pub fn default_positive(class_names: &[String]) -> usize {
    class_names
        .iter()
        .position(|c| c.to_lowercase().contains("covid"))
        .unwrap_or(1)
}

/// Mean of each headline metric over folds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Averages {
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub f1: f64,
    pub accuracy: f64,
}

impl Averages {
    pub fn get(&self, m: Metric) -> f64 {
        match m {
            Metric::Sensitivity => self.sensitivity,
            Metric::Specificity => self.specificity,
            Metric::Precision => self.precision,
            Metric::F1 => self.f1,
            Metric::Accuracy => self.accuracy,
        }
    }

    fn of(reports: &[MetricsReport]) -> Self {
        let mean = |m: Metric| reports.iter().map(|r| r.get(m)).sum::<f64>() / reports.len() as f64;
        Averages {
            sensitivity: mean(Metric::Sensitivity),
            specificity: mean(Metric::Specificity),
            precision: mean(Metric::Precision),
            f1: mean(Metric::F1),
            accuracy: mean(Metric::Accuracy),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvResult {
    pub objective: ObjectiveSpec,
    pub params: HyperParams,
    pub positive: Option<usize>,
    pub per_fold: Vec<MetricsReport>,
    pub averaged: Averages,
    pub plan: SplitPlan,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoldoutResult {
    pub objective: ObjectiveSpec,
    pub params: HyperParams,
    pub report: MetricsReport,
    pub plan: SplitPlan,
}

#[derive(Debug, Clone)]
pub struct Evaluator {
    pub params: HyperParams,
    pub objective: ObjectiveSpec,
    /// Positive class of two-class reports; see [`default_positive`].
    pub positive: Option<usize>,
    pub parallelism: Parallelism,
}

impl Evaluator {
    pub fn new(params: HyperParams, objective: ObjectiveSpec) -> Self {
        Evaluator {
            params,
            objective,
            positive: None,
            parallelism: Parallelism::default(),
        }
    }

    pub fn with_positive(mut self, positive: Option<usize>) -> Self {
        self.positive = positive;
        self
    }

    pub fn with_parallelism(mut self, par: Parallelism) -> Self {
        self.parallelism = par;
        self
    }

    fn positive_for(&self, dataset: &Dataset) -> Result<Option<usize>> {
        if dataset.n_classes() != 2 {
            return Ok(None);
        }
        let p = self
            .positive
            .unwrap_or_else(|| default_positive(dataset.class_names()));
        if p > 1 {
            return Err(Error::Config(format!(
                "positive class index {p} is not 0 or 1"
            )));
        }
        Ok(Some(p))
    }

    /// Trains on `fold.train` and scores `fold.test`.
    pub fn evaluate_fold(&self, dataset: &Dataset, fold: &Fold) -> Result<MetricsReport> {
        let positive = self.positive_for(dataset)?;
        let fit = Trainer::new(self.params, self.objective)
            .with_parallelism(self.parallelism)
            .fit_rows(dataset, &fold.train)?;
        let test = dataset.features().select_rows(&fold.test)?;
        let predicted = fit.model.predict_class(&test)?;
        let truth: Vec<u32> = fold.test.iter().map(|&r| dataset.labels()[r]).collect();
        let cm = confusion_named(&truth, &predicted, dataset.class_names().to_vec())?;
        match positive {
            Some(p) => binary_metrics(&cm, p),
            None => multiclass_metrics(&cm),
        }
    }

    pub fn cv(&self, dataset: &Dataset, k: usize, seed: u64) -> Result<CvResult> {
        let plan = stratified_kfold(dataset, k, seed)?;
        let positive = self.positive_for(dataset)?;
        let per_fold = self
            .parallelism
            .map(plan.folds.len(), |i| {
                self.evaluate_fold(dataset, &plan.folds[i])
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Ok(CvResult {
            objective: self.objective,
            params: self.params,
            positive,
            averaged: Averages::of(&per_fold),
            per_fold,
            plan,
        })
    }

    pub fn holdout(
        &self,
        dataset: &Dataset,
        test_fraction: f64,
        seed: u64,
    ) -> Result<HoldoutResult> {
        let plan = stratified_holdout(dataset, test_fraction, seed)?;
        let report = self.evaluate_fold(dataset, &plan.folds[0])?;
        Ok(HoldoutResult {
            objective: self.objective,
            params: self.params,
            report,
            plan,
        })
    }
}

pub fn run_cv(
    dataset: &Dataset,
    params: &HyperParams,
    objective: ObjectiveSpec,
    k: usize,
    seed: u64,
) -> Result<CvResult> {
    Evaluator::new(*params, objective).cv(dataset, k, seed)
}

pub fn run_holdout(
    dataset: &Dataset,
    params: &HyperParams,
    objective: ObjectiveSpec,
    test_fraction: f64,
    seed: u64,
) -> Result<MetricsReport> {
    Evaluator::new(*params, objective)
        .holdout(dataset, test_fraction, seed)
        .map(|h| h.report)
}
