mod common;

use boostray::boost::tree::LEAF;
use boostray::boost::{
    argmax_rows, BoostModel, HyperParams, ObjectiveSpec, RegressionTree, Trainer,
};
use boostray::data::{
    load_csv, load_fmx, stratified_holdout, stratified_kfold, write_csv, write_fmx,
};
use boostray::data::{Dataset, FeatureMatrix};
use boostray::Parallelism;
use proptest::prelude::*;

/// Datasets with every class present, features drawn from `values`.
fn dataset_strategy(values: impl Strategy<Value = f32> + Clone) -> impl Strategy<Value = Dataset> {
    (1usize..25, 1usize..6, 1usize..4).prop_flat_map(move |(n, d, k)| {
        let k = k.min(n);
        (
            proptest::collection::vec(values.clone(), n * d),
            proptest::collection::vec(0..k as u32, n),
        )
            .prop_map(move |(vals, mut labels)| {
                for (c, l) in labels.iter_mut().enumerate().take(k) {
                    *l = c as u32;
                }
                let names = (0..k).map(|c| format!("c{c}")).collect();
                Dataset::new(FeatureMatrix::new(n, d, vals).unwrap(), labels, names).unwrap()
            })
    })
}

fn finite_f32() -> impl Strategy<Value = f32> + Clone {
    any::<f32>().prop_filter("finite", |v| v.is_finite())
}

fn bits(ds: &Dataset) -> Vec<u32> {
    ds.features().values().iter().map(|v| v.to_bits()).collect()
}

/// Tree walk written against the raw node table.
fn walk(tree: &RegressionTree, row: &[f32]) -> f64 {
    let mut i = 0;
    loop {
        let n = &tree.nodes[i];
        if n.left == LEAF {
            return n.weight;
        }
        i = if f64::from(row[n.feature as usize]) < n.threshold {
            n.left
        } else {
            n.right
        } as usize;
    }
}

fn naive_margins(model: &BoostModel, ds: &Dataset) -> Vec<f64> {
    let mut out = Vec::new();
    for r in 0..ds.n_rows() {
        let row = ds.features().row(r);
        for k in 0..model.group_size() {
            let mut m = model.base_margin;
            for round in &model.trees {
                m += model.params.eta * walk(&round[k], row);
            }
            out.push(m);
        }
    }
    out
}

fn small_params(rounds: usize, depth: usize) -> HyperParams {
    HyperParams {
        num_rounds: rounds,
        max_depth: depth,
        min_child_weight: 0.0,
        ..HyperParams::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fmx_round_trip_is_bit_exact(ds in dataset_strategy(finite_f32())) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.fmx");
        write_fmx(&ds, &path).unwrap();
        let back = load_fmx(&path).unwrap();
        prop_assert_eq!(bits(&ds), bits(&back));
        prop_assert_eq!(ds.labels(), back.labels());
        prop_assert_eq!(ds.class_names(), back.class_names());
    }

    #[test]
    fn csv_to_fmx_to_csv_preserves_values(ds in dataset_strategy(finite_f32())) {
        let dir = tempfile::tempdir().unwrap();
        let csv1 = dir.path().join("a.csv");
        let fmx = dir.path().join("b.fmx");
        let csv2 = dir.path().join("c.csv");
        write_csv(&ds, &csv1).unwrap();
        let from_csv = load_csv(&csv1).unwrap();
        write_fmx(&from_csv, &fmx).unwrap();
        write_csv(&load_fmx(&fmx).unwrap(), &csv2).unwrap();
        prop_assert_eq!(std::fs::read(&csv1).unwrap(), std::fs::read(&csv2).unwrap());
        prop_assert_eq!(bits(&ds), bits(&from_csv));
        prop_assert_eq!(ds.labels(), from_csv.labels());
    }

    #[test]
    fn kfold_partitions_and_balances(
        counts in proptest::collection::vec(3usize..40, 2..4),
        k in 2usize..4,
        seed in any::<u64>(),
    ) {
        let ds = common::shaped(&counts, 2, 1);
        let plan = stratified_kfold(&ds, k, seed).unwrap();
        prop_assert_eq!(plan.folds.len(), k);
        let mut hits = vec![0; ds.n_rows()];
        for fold in &plan.folds {
            let mut all: Vec<usize> = fold.train.iter().chain(&fold.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..ds.n_rows()).collect::<Vec<_>>());
            for &t in &fold.test {
                hits[t] += 1;
            }
            for (c, &n_c) in counts.iter().enumerate() {
                let in_test = fold.test.iter().filter(|&&r| ds.labels()[r] == c as u32).count();
                prop_assert!(in_test == n_c / k || in_test == n_c.div_ceil(k));
            }
        }
        prop_assert!(hits.iter().all(|&h| h == 1));
        prop_assert_eq!(stratified_kfold(&ds, k, seed).unwrap(), plan);
    }

    #[test]
    fn holdout_partitions_and_sizes(
        counts in proptest::collection::vec(5usize..60, 2..4),
        frac in 0.1f64..0.9,
        seed in any::<u64>(),
    ) {
        let ds = common::shaped(&counts, 2, 1);
        let plan = stratified_holdout(&ds, frac, seed).unwrap();
        let fold = &plan.folds[0];
        let mut all: Vec<usize> = fold.train.iter().chain(&fold.test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..ds.n_rows()).collect::<Vec<_>>());
        let n = ds.n_rows() as f64;
        // The overall size is exact unless every class needs a row on both sides.
        let target = (frac * n).round() as usize;
        let k = counts.len();
        if target >= k && target <= ds.n_rows() - k {
            prop_assert_eq!(fold.test.len(), target);
        }
        for (c, &n_c) in counts.iter().enumerate() {
            let in_test = fold.test.iter().filter(|&&r| ds.labels()[r] == c as u32).count();
            prop_assert!((in_test as f64 - frac * n_c as f64).abs() <= 1.0 + 1e-9);
            prop_assert!(in_test >= 1 && in_test < n_c);
        }
    }

    #[test]
    fn predictions_follow_the_tree_walk(
        seed in any::<u64>(),
        classes in 2usize..4,
        rounds in 1usize..6,
        depth in 1usize..4,
    ) {
        let ds = common::random_dataset(40, 4, classes, seed);
        let spec = ObjectiveSpec::for_classes(classes).unwrap();
        let fit = Trainer::new(small_params(rounds, depth), spec).fit(&ds).unwrap();
        let model = &fit.model;
        let margins = model.predict_margin(ds.features()).unwrap();
        let naive = naive_margins(model, &ds);
        for (a, b) in margins.values.iter().zip(&naive) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
        // Margins tracked during training match a fresh prediction exactly.
        prop_assert_eq!(&fit.train_margins, &margins.values);

        let proba = model.predict_proba(ds.features()).unwrap();
        prop_assert_eq!(proba.n_cols, classes);
        for row in proba.rows() {
            prop_assert!(row.iter().all(|p| (0.0..=1.0).contains(p)));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let classes_pred = model.predict_class(ds.features()).unwrap();
        prop_assert_eq!(&classes_pred, &argmax_rows(&proba));
        for tree in model.trees.iter().flatten() {
            prop_assert!(tree.depth() <= depth);
            prop_assert!(tree.validate(ds.n_cols(), depth).is_ok());
        }
    }

    #[test]
    fn sequential_and_parallel_training_agree(seed in any::<u64>(), classes in 2usize..4) {
        let ds = common::random_dataset(60, 6, classes, seed);
        let spec = ObjectiveSpec::for_classes(classes).unwrap();
        let fit = |par| Trainer::new(small_params(4, 3), spec).with_parallelism(par).fit(&ds).unwrap();
        let (a, b) = (fit(Parallelism::Sequential), fit(Parallelism::Rayon));
        prop_assert_eq!(a.model, b.model);
        prop_assert_eq!(a.objective_trace, b.objective_trace);
    }
}
