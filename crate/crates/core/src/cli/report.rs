//! Text, CSV and JSON renderings of evaluation results and model summaries.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use super::config::ReportFormat;
use crate::boost::{BoostModel, HyperParams, ObjectiveKind};
use crate::experiment::{CvResult, HoldoutResult};
use crate::metrics::{ClassMetrics, ConfusionMatrix, Metric, MetricsReport};

const LABELS: [(Metric, &str); 5] = [
    (Metric::Sensitivity, "Sensitivity"),
    (Metric::Specificity, "Specificity"),
    (Metric::Precision, "Precision"),
    (Metric::F1, "F1-score"),
    (Metric::Accuracy, "Accuracy"),
];

fn pct(v: f64) -> String {
    format!("{:.2}", 100.0 * v)
}

fn params_line(p: &HyperParams) -> String {
    format!(
        "rounds={} eta={} gamma={} lambda={} max_depth={} min_child_weight={}",
        p.num_rounds, p.eta, p.gamma, p.lambda, p.max_depth, p.min_child_weight
    )
}

fn objective_name(kind: ObjectiveKind) -> &'static str {
    match kind {
        ObjectiveKind::BinaryLogistic => "binary-logistic",
        ObjectiveKind::Softmax => "softmax",
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialises");
    s.push('\n');
    s
}

fn confusion_text(out: &mut String, cm: &ConfusionMatrix) {
    let width = cm
        .class_names
        .iter()
        .map(String::len)
        .chain(cm.counts.iter().flatten().map(|c| c.to_string().len()))
        .max()
        .unwrap_or(1)
        .max(6);
    let _ = write!(out, "{:<width$}", "true\\pred");
    for name in &cm.class_names {
        let _ = write!(out, "  {name:>width$}");
    }
    out.push('\n');
    for (name, row) in cm.class_names.iter().zip(&cm.counts) {
        let _ = write!(out, "{name:<width$}");
        for c in row {
            let _ = write!(out, "  {c:>width$}");
        }
        out.push('\n');
    }
}

fn confusion_csv(out: &mut String, cm: &ConfusionMatrix) {
    out.push_str("true\\predicted");
    for name in &cm.class_names {
        let _ = write!(out, ",{name}");
    }
    out.push('\n');
    for (name, row) in cm.class_names.iter().zip(&cm.counts) {
        out.push_str(name);
        for c in row {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
    }
}

fn positive_desc(names: &[String], positive: Option<usize>) -> String {
    match positive {
        Some(p) => format!("positive class {}", names[p]),
        None => "macro-averaged over classes".to_string(),
    }
}

pub fn cv_report(result: &CvResult, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => json(result),
        ReportFormat::Csv => {
            let k = result.per_fold.len();
            let mut out = String::from("metric");
            for i in 1..=k {
                let _ = write!(out, ",fold_{i}");
            }
            out.push_str(",average\n");
            for m in Metric::ALL {
                out.push_str(m.name());
                for r in &result.per_fold {
                    let _ = write!(out, ",{}", r.get(m));
                }
                let _ = writeln!(out, ",{}", result.averaged.get(m));
            }
            out
        }
        ReportFormat::Text => {
            let names = &result.per_fold[0].confusion.class_names;
            let mut out = String::new();
            let _ = writeln!(
                out,
                "{}-fold stratified cross-validation, seed {}, {} objective, {}",
                result.per_fold.len(),
                result.plan.seed,
                objective_name(result.objective.kind),
                positive_desc(names, result.positive)
            );
            let _ = writeln!(out, "params: {}", params_line(&result.params));
            out.push('\n');
            let _ = write!(out, "{:<12}", "Metric (%)");
            for i in 1..=result.per_fold.len() {
                let _ = write!(out, "  {:>7}", format!("Fold {i}"));
            }
            let _ = writeln!(out, "  {:>7}", "Average");
            for (m, label) in LABELS {
                let _ = write!(out, "{label:<12}");
                for r in &result.per_fold {
                    let _ = write!(out, "  {:>7}", pct(r.get(m)));
                }
                let _ = writeln!(out, "  {:>7}", pct(result.averaged.get(m)));
            }
            for (i, r) in result.per_fold.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "\nFold {} confusion matrix ({} test rows)",
                    i + 1,
                    r.confusion.total()
                );
                confusion_text(&mut out, &r.confusion);
            }
            out
        }
    }
}

fn class_row_csv(out: &mut String, scope: &str, c: &ClassMetrics, accuracy: Option<f64>) {
    let _ = writeln!(
        out,
        "{scope},{},{},{},{},{}",
        c.sensitivity,
        c.specificity,
        c.precision,
        c.f1,
        accuracy.map(|a| a.to_string()).unwrap_or_default()
    );
}

pub fn holdout_report(result: &HoldoutResult, format: ReportFormat) -> String {
    let r: &MetricsReport = &result.report;
    match format {
        ReportFormat::Json => json(result),
        ReportFormat::Csv => {
            let mut out = String::from("scope,sensitivity,specificity,precision,f1,accuracy\n");
            class_row_csv(&mut out, "summary", &r.summary, Some(r.accuracy));
            class_row_csv(&mut out, "macro", &r.macro_avg, Some(r.accuracy));
            for (name, c) in r.confusion.class_names.iter().zip(&r.per_class) {
                class_row_csv(&mut out, name, c, None);
            }
            out.push('\n');
            confusion_csv(&mut out, &r.confusion);
            out
        }
        ReportFormat::Text => {
            let fold = &result.plan.folds[0];
            let mut out = String::new();
            let _ = writeln!(
                out,
                "Stratified holdout, test fraction {}, seed {}, {} train / {} test rows, {} objective, {}",
                match result.plan.kind {
                    crate::data::SplitKind::Holdout { test_fraction } => test_fraction,
                    crate::data::SplitKind::KFold { .. } => f64::NAN,
                },
                result.plan.seed,
                fold.train.len(),
                fold.test.len(),
                objective_name(result.objective.kind),
                positive_desc(&r.confusion.class_names, r.positive)
            );
            let _ = writeln!(out, "params: {}", params_line(&result.params));
            out.push('\n');
            for (m, label) in LABELS {
                let _ = writeln!(out, "{label:<12}  {:>7}", pct(r.get(m)));
            }
            out.push('\n');
            let width = r
                .confusion
                .class_names
                .iter()
                .map(String::len)
                .max()
                .unwrap_or(5)
                .max(5);
            let _ = writeln!(
                out,
                "{:<width$}  {:>11}  {:>11}  {:>9}  {:>8}",
                "Class", "Sensitivity", "Specificity", "Precision", "F1-score"
            );
            let rows = r
                .confusion
                .class_names
                .iter()
                .map(String::as_str)
                .zip(&r.per_class)
                .chain(std::iter::once(("macro", &r.macro_avg)));
            for (name, c) in rows {
                let _ = writeln!(
                    out,
                    "{name:<width$}  {:>11}  {:>11}  {:>9}  {:>8}",
                    pct(c.sensitivity),
                    pct(c.specificity),
                    pct(c.precision),
                    pct(c.f1)
                );
            }
            out.push_str("\nConfusion matrix\n");
            confusion_text(&mut out, &r.confusion);
            out
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FeatureGain {
    pub feature: usize,
    pub total_gain: f64,
    pub splits: usize,
}

#[derive(Debug, Serialize)]
pub struct ModelSummary {
    pub objective: String,
    pub n_classes: usize,
    pub class_names: Vec<String>,
    pub params: HyperParams,
    pub n_features: usize,
    pub rounds: usize,
    pub tree_count: usize,
    /// Leaf count -> number of trees with that many leaves.
    pub leaf_histogram: BTreeMap<usize, usize>,
    pub top_features: Vec<FeatureGain>,
}

pub const TOP_FEATURES: usize = 20;

pub fn summarize(model: &BoostModel) -> ModelSummary {
    let mut leaf_histogram = BTreeMap::new();
    let mut gains: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for tree in model.trees.iter().flatten() {
        *leaf_histogram.entry(tree.n_leaves()).or_insert(0) += 1;
        for n in tree.nodes.iter().filter(|n| !n.is_leaf()) {
            let e = gains.entry(n.feature as usize).or_insert((0.0, 0));
            e.0 += n.gain;
            e.1 += 1;
        }
    }
    let mut top: Vec<FeatureGain> = gains
        .into_iter()
        .map(|(feature, (total_gain, splits))| FeatureGain {
            feature,
            total_gain,
            splits,
        })
        .collect();
    top.sort_by(|a, b| {
        b.total_gain
            .total_cmp(&a.total_gain)
            .then(a.feature.cmp(&b.feature))
    });
    top.truncate(TOP_FEATURES);
    ModelSummary {
        objective: objective_name(model.objective.kind).to_string(),
        n_classes: model.objective.n_classes,
        class_names: model.class_names.clone(),
        params: model.params,
        n_features: model.n_features,
        rounds: model.trees.len(),
        tree_count: model.n_trees(),
        leaf_histogram,
        top_features: top,
    }
}

pub fn inspect_report(model: &BoostModel, format: ReportFormat) -> String {
    let s = summarize(model);
    match format {
        ReportFormat::Json => json(&s),
        ReportFormat::Csv => {
            let mut out = String::from("rank,feature,total_gain,splits\n");
            for (i, f) in s.top_features.iter().enumerate() {
                let _ = writeln!(out, "{},{},{},{}", i + 1, f.feature, f.total_gain, f.splits);
            }
            out
        }
        ReportFormat::Text => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "objective: {} ({} classes: {})",
                s.objective,
                s.n_classes,
                s.class_names.join(", ")
            );
            let _ = writeln!(out, "params: {}", params_line(&s.params));
            let _ = writeln!(out, "features: {}", s.n_features);
            let _ = writeln!(out, "rounds: {}", s.rounds);
            let _ = writeln!(out, "tree count: {}", s.tree_count);
            out.push_str("\nleaf-count histogram\n  leaves  trees\n");
            for (leaves, trees) in &s.leaf_histogram {
                let _ = writeln!(out, "  {leaves:>6}  {trees:>5}");
            }
            let _ = writeln!(out, "\ntop {} features by total gain", TOP_FEATURES);
            out.push_str("  rank  feature      total_gain  splits\n");
            for (i, f) in s.top_features.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "  {:>4}  {:>7}  {:>14.6}  {:>6}",
                    i + 1,
                    f.feature,
                    f.total_gain,
                    f.splits
                );
            }
            out
        }
    }
}
