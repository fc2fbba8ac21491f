//! Confusion matrices and the sensitivity / specificity / precision / F1 /
//! accuracy suite.

use serde::Serialize;

use crate::error::{Error, Result};

/// `counts[true][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub class_names: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes()).map(|i| self.counts[i][i]).sum()
    }

    /// (TP, FN, FP, TN) with `class` as the positive class.
    pub fn one_vs_rest(&self, class: usize) -> (u64, u64, u64, u64) {
        let tp = self.counts[class][class];
        let row: u64 = self.counts[class].iter().sum();
        let col: u64 = self.counts.iter().map(|r| r[class]).sum();
        let (fn_, fp) = (row - tp, col - tp);
        (tp, fn_, fp, self.total() - tp - fn_ - fp)
    }

    /// Element-wise sum, e.g. to pool cross-validation folds.
    pub fn merged(&self, other: &ConfusionMatrix) -> Result<ConfusionMatrix> {
        if self.n_classes() != other.n_classes() {
            return Err(Error::Input(
                "cannot merge confusion matrices of different size".into(),
            ));
        }
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        Ok(ConfusionMatrix {
            class_names: self.class_names.clone(),
            counts,
        })
    }
}

pub fn confusion(y_true: &[u32], y_pred: &[u32], n_classes: usize) -> Result<ConfusionMatrix> {
    let names = (0..n_classes).map(|c| c.to_string()).collect();
    confusion_named(y_true, y_pred, names)
}

pub fn confusion_named(
    y_true: &[u32],
    y_pred: &[u32],
    class_names: Vec<String>,
) -> Result<ConfusionMatrix> {
    let k = class_names.len();
    if k == 0 {
        return Err(Error::Input(
            "confusion matrix needs at least one class".into(),
        ));
    }
    if y_true.len() != y_pred.len() {
        return Err(Error::Input(format!(
            "{} true labels vs {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    let mut counts = vec![vec![0u64; k]; k];
    for (i, (&t, &p)) in y_true.iter().zip(y_pred).enumerate() {
        if t as usize >= k || p as usize >= k {
            return Err(Error::Input(format!(
                "row {i}: class pair ({t}, {p}) outside [0, {k})"
            )));
        }
        counts[t as usize][p as usize] += 1;
    }
    Ok(ConfusionMatrix {
        class_names,
        counts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Sensitivity,
    Specificity,
    Precision,
    F1,
    Accuracy,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Sensitivity,
        Metric::Specificity,
        Metric::Precision,
        Metric::F1,
        Metric::Accuracy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Sensitivity => "sensitivity",
            Metric::Specificity => "specificity",
            Metric::Precision => "precision",
            Metric::F1 => "f1",
            Metric::Accuracy => "accuracy",
        }
    }
}

/// One-vs-rest metrics of a single class. Any 0/0 ratio is reported as 0
/// and listed in `degenerate`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub f1: f64,
    pub degenerate: Vec<Metric>,
}

impl ClassMetrics {
    fn from_counts(tp: u64, fn_: u64, fp: u64, tn: u64) -> Self {
        let mut degenerate = Vec::new();
        let mut ratio = |num: f64, den: f64, m: Metric| {
            if den == 0.0 {
                degenerate.push(m);
                0.0
            } else {
                num / den
            }
        };
        let (tp, fn_, fp, tn) = (tp as f64, fn_ as f64, fp as f64, tn as f64);
        let sensitivity = ratio(tp, tp + fn_, Metric::Sensitivity);
        let specificity = ratio(tn, tn + fp, Metric::Specificity);
        let precision = ratio(tp, tp + fp, Metric::Precision);
        let f1 = ratio(
            2.0 * precision * sensitivity,
            precision + sensitivity,
            Metric::F1,
        );
        ClassMetrics {
            sensitivity,
            specificity,
            precision,
            f1,
            degenerate,
        }
    }

    pub fn get(&self, m: Metric) -> Option<f64> {
        match m {
            Metric::Sensitivity => Some(self.sensitivity),
            Metric::Specificity => Some(self.specificity),
            Metric::Precision => Some(self.precision),
            Metric::F1 => Some(self.f1),
            Metric::Accuracy => None,
        }
    }

    fn mean(items: &[ClassMetrics]) -> ClassMetrics {
        let n = items.len() as f64;
        let avg = |f: fn(&ClassMetrics) -> f64| items.iter().map(f).sum::<f64>() / n;
        let mut degenerate: Vec<Metric> = Vec::new();
        for m in Metric::ALL {
            if items.iter().any(|c| c.degenerate.contains(&m)) {
                degenerate.push(m);
            }
        }
        ClassMetrics {
            sensitivity: avg(|c| c.sensitivity),
            specificity: avg(|c| c.specificity),
            precision: avg(|c| c.precision),
            f1: avg(|c| c.f1),
            degenerate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    /// Headline metrics: the positive class for two-class reports, the macro
    /// average otherwise.
    pub summary: ClassMetrics,
    pub accuracy: f64,
    /// Set for two-class reports.
    pub positive: Option<usize>,
    pub per_class: Vec<ClassMetrics>,
    #[serde(rename = "macro")]
    pub macro_avg: ClassMetrics,
    pub confusion: ConfusionMatrix,
}

impl MetricsReport {
    pub fn get(&self, m: Metric) -> f64 {
        self.summary.get(m).unwrap_or(self.accuracy)
    }
}

fn accuracy(cm: &ConfusionMatrix) -> f64 {
    match cm.total() {
        0 => 0.0,
        total => cm.trace() as f64 / total as f64,
    }
}

fn per_class(cm: &ConfusionMatrix) -> Vec<ClassMetrics> {
    (0..cm.n_classes())
        .map(|c| {
            let (tp, fn_, fp, tn) = cm.one_vs_rest(c);
            ClassMetrics::from_counts(tp, fn_, fp, tn)
        })
        .collect()
}

/// Two-class metrics read relative to `positive`.
pub fn binary_metrics(cm: &ConfusionMatrix, positive: usize) -> Result<MetricsReport> {
    if cm.n_classes() != 2 {
        return Err(Error::Shape {
            expected: 2,
            actual: cm.n_classes(),
        });
    }
    if positive > 1 {
        return Err(Error::Input(format!(
            "positive class {positive} is not 0 or 1"
        )));
    }
    let per_class = per_class(cm);
    Ok(MetricsReport {
        summary: per_class[positive].clone(),
        accuracy: accuracy(cm),
        positive: Some(positive),
        macro_avg: ClassMetrics::mean(&per_class),
        per_class,
        confusion: cm.clone(),
    })
}

/// One-vs-rest metrics for every class plus their unweighted mean.
pub fn multiclass_metrics(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    if cm.n_classes() < 2 || cm.total() == 0 {
        return Err(Error::Input("confusion matrix is empty".into()));
    }
    let per_class = per_class(cm);
    let macro_avg = ClassMetrics::mean(&per_class);
    Ok(MetricsReport {
        summary: macro_avg.clone(),
        accuracy: accuracy(cm),
        positive: None,
        macro_avg,
        per_class,
        confusion: cm.clone(),
    })
}
