use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::Dataset;
use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SplitKind {
    KFold { k: usize },
    Holdout { test_fraction: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Train/test index partitions. Every index list is strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitPlan {
    pub kind: SplitKind,
    pub seed: u64,
    pub folds: Vec<Fold>,
}

/// Shuffles each class's rows with its own ChaCha stream so one class's size
/// never perturbs another class's permutation.
fn shuffled_classes(dataset: &Dataset, seed: u64) -> Vec<Vec<usize>> {
    let mut by_class = dataset.rows_by_class();
    for (c, rows) in by_class.iter_mut().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        rows.shuffle(&mut rng);
    }
    by_class
}

fn complement(n: usize, test: &[usize]) -> Vec<usize> {
    let mut in_test = vec![false; n];
    for &i in test {
        in_test[i] = true;
    }
    (0..n).filter(|&i| !in_test[i]).collect()
}

/// Stratified k-fold plan: each class is shuffled, then dealt round-robin
/// into folds. The dealing position carries over between classes so that
/// total fold sizes also differ by at most one.
pub fn stratified_kfold(dataset: &Dataset, k: usize, seed: u64) -> Result<SplitPlan> {
    if k < 2 {
        return Err(Error::Config(format!("k-fold needs k >= 2, got {k}")));
    }
    let by_class = shuffled_classes(dataset, seed);
    for (c, rows) in by_class.iter().enumerate() {
        if rows.len() < k {
            return Err(Error::Stratification {
                class: dataset.class_names()[c].clone(),
                count: rows.len(),
                message: format!("fewer than k = {k}"),
            });
        }
    }

    let mut tests = vec![Vec::new(); k];
    let mut next = 0usize;
    for rows in &by_class {
        for &r in rows {
            tests[next].push(r);
            next = (next + 1) % k;
        }
    }
    let n = dataset.n_rows();
    let folds = tests
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            Fold {
                train: complement(n, &test),
                test,
            }
        })
        .collect();
    Ok(SplitPlan {
        kind: SplitKind::KFold { k },
        seed,
        folds,
    })
}

/// Per-class test counts: `round(fraction * class_size)`, nudged by one for
/// the classes with the largest rounding residuals until the total equals
/// `round(fraction * n)`.
fn holdout_counts(sizes: &[usize], fraction: f64) -> Vec<usize> {
    let n: usize = sizes.iter().sum();
    let target = (fraction * n as f64).round() as i64;
    let mut counts: Vec<usize> = sizes
        .iter()
        .map(|&s| (fraction * s as f64).round() as usize)
        .collect();
    let residual = |c: usize, counts: &[usize]| fraction * sizes[c] as f64 - counts[c] as f64;

    let mut diff = target - counts.iter().sum::<usize>() as i64;
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    if diff > 0 {
        order.sort_by(|&a, &b| {
            residual(b, &counts)
                .total_cmp(&residual(a, &counts))
                .then(a.cmp(&b))
        });
        for &c in &order {
            if diff == 0 {
                break;
            }
            if counts[c] + 1 < sizes[c] {
                counts[c] += 1;
                diff -= 1;
            }
        }
    } else if diff < 0 {
        order.sort_by(|&a, &b| {
            residual(a, &counts)
                .total_cmp(&residual(b, &counts))
                .then(a.cmp(&b))
        });
        for &c in &order {
            if diff == 0 {
                break;
            }
            if counts[c] > 1 {
                counts[c] -= 1;
                diff += 1;
            }
        }
    }
    counts
}

/// Single stratified train/test partition holding out `test_fraction` of
/// every class.
pub fn stratified_holdout(dataset: &Dataset, test_fraction: f64, seed: u64) -> Result<SplitPlan> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let by_class = shuffled_classes(dataset, seed);
    let sizes: Vec<usize> = by_class.iter().map(Vec::len).collect();
    let counts = holdout_counts(&sizes, test_fraction);
    for (c, (&t, &s)) in counts.iter().zip(&sizes).enumerate() {
        if t == 0 || t >= s {
            return Err(Error::Stratification {
                class: dataset.class_names()[c].clone(),
                count: s,
                message: format!(
                    "test fraction {test_fraction} leaves {} on one side",
                    if t == 0 {
                        "no test rows"
                    } else {
                        "no training rows"
                    }
                ),
            });
        }
    }

    let mut test: Vec<usize> = by_class
        .iter()
        .zip(&counts)
        .flat_map(|(rows, &t)| rows[..t].iter().copied())
        .collect();
    test.sort_unstable();
    Ok(SplitPlan {
        kind: SplitKind::Holdout { test_fraction },
        seed,
        folds: vec![Fold {
            train: complement(dataset.n_rows(), &test),
            test,
        }],
    })
}
