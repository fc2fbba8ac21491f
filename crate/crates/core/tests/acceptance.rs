//! End-to-end acceptance checks. Prints one `PASS`, `FAIL` or `BLOCKED` line
//! per check and exits non-zero if any check fails.
//!
//! Run with `cargo test -p boostray --test acceptance`.

mod common;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use boostray::boost::objective::{grad_hess_logistic, grad_hess_softmax};
use boostray::boost::persist::{model_from_str, model_to_string};
use boostray::boost::{
    build_tree, leaf_weight, HyperParams, ObjectiveSpec, SortedColumns, Trainer,
};
use boostray::data::{load_fmx, write_fmx, Dataset, FeatureMatrix};
use boostray::experiment::Evaluator;
use boostray::Parallelism;
use rand::Rng;

enum Status {
    Pass,
    Fail,
    Blocked,
}

struct Check {
    name: &'static str,
    status: Status,
    detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<String, String>) -> Check {
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)) {
        Ok(Ok(detail)) => Check {
            name,
            status: Status::Pass,
            detail,
        },
        Ok(Err(detail)) => Check {
            name,
            status: Status::Fail,
            detail,
        },
        Err(_) => Check {
            name,
            status: Status::Fail,
            detail: "panicked".into(),
        },
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn table_params() -> HyperParams {
    HyperParams::default()
}

// ---------------------------------------------------------------------------
// Split search against brute force

/// Value on a 2^-16 grid so every partial sum of up to 32 terms is exact and
/// the result cannot depend on summation order.
fn dyadic(rng: &mut impl Rng, lo: i32, hi: i32) -> f64 {
    f64::from(rng.random_range(lo..=hi)) / 65536.0
}

struct Brute {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Enumerates every (feature, midpoint) pair with a direct partition of the
/// rows and scores it as the drop in the optimal leaf objective.
fn brute_force_root(x: &FeatureMatrix, g: &[f64], h: &[f64], lambda: f64) -> Option<Brute> {
    let leaf_obj = |gs: f64, hs: f64| -0.5 * gs * gs / (hs + lambda);
    let (gt, ht) = (g.iter().sum::<f64>(), h.iter().sum::<f64>());
    let mut best: Option<Brute> = None;
    for f in 0..x.n_cols() {
        let mut vals: Vec<f32> = (0..x.n_rows()).map(|r| x.get(r, f)).collect();
        vals.sort_by(f32::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let t = (f64::from(w[0]) + f64::from(w[1])) / 2.0;
            let (mut gl, mut hl, mut gr, mut hr) = (0.0, 0.0, 0.0, 0.0);
            for r in 0..x.n_rows() {
                if f64::from(x.get(r, f)) < t {
                    gl += g[r];
                    hl += h[r];
                } else {
                    gr += g[r];
                    hr += h[r];
                }
            }
            let gain = leaf_obj(gt, ht) - leaf_obj(gl, hl) - leaf_obj(gr, hr);
            if best.as_ref().is_none_or(|b| gain > b.gain) {
                best = Some(Brute {
                    feature: f,
                    threshold: t,
                    gain,
                });
            }
        }
    }
    best
}

fn split_oracle() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = common::rng(2024);
    let mut splits = 0;
    for trial in 0..200 {
        let n = rng.random_range(2..=32);
        let d = rng.random_range(1..=4);
        // Half the trials draw from a few levels to exercise duplicate values.
        let coarse = trial % 2 == 0;
        let values: Vec<f32> = (0..n * d)
            .map(|_| {
                if coarse {
                    rng.random_range(0..5) as f32 * 0.5
                } else {
                    rng.random_range(-10.0f32..10.0)
                }
            })
            .collect();
        let x = FeatureMatrix::new(n, d, values).unwrap();
        let g: Vec<f64> = (0..n).map(|_| dyadic(&mut rng, -65536, 65536)).collect();
        let h: Vec<f64> = (0..n).map(|_| dyadic(&mut rng, 1, 65536)).collect();
        let lambda = [0.0, 0.5, 1.0, 2.0][trial % 4];
        let params = HyperParams {
            max_depth: 1,
            lambda,
            gamma: 0.0,
            min_child_weight: 0.0,
            ..HyperParams::default()
        };
        let rows: Vec<usize> = (0..n).collect();
        let sorted = SortedColumns::new(&x, &rows, Parallelism::Sequential);
        let tree = build_tree(&x, &rows, &g, &h, &params, &sorted, Parallelism::Sequential);
        let root = tree.nodes[0];
        match brute_force_root(&x, &g, &h, lambda) {
            Some(b) if b.gain > params.min_gain_eps => {
                ensure(!root.is_leaf(), || {
                    format!("trial {trial}: expected a split, got a leaf")
                })?;
                ensure(
                    root.feature as usize == b.feature && root.threshold == b.threshold,
                    || {
                        format!(
                            "trial {trial}: split ({}, {}) vs brute force ({}, {})",
                            root.feature, root.threshold, b.feature, b.threshold
                        )
                    },
                )?;
                ensure((root.gain - b.gain).abs() <= 1e-10, || {
                    format!("trial {trial}: gain {} vs {}", root.gain, b.gain)
                })?;
                splits += 1;
            }
            _ => ensure(root.is_leaf(), || {
                format!("trial {trial}: split where none is profitable")
            })?,
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "200 datasets, {splits} with a profitable split, {elapsed:.2?}"
    ))
}

// ---------------------------------------------------------------------------
// Gradients against finite differences

const STEP: f64 = 1e-5;

/// Change in cross-entropy when margin k moves by d:
/// `ln(1 + p_k (e^d - 1)) - d [k = label]`.
fn xent_delta(label: usize, m: &[f64], k: usize, d: f64) -> f64 {
    let z: f64 = m.iter().map(|v| v.exp()).sum();
    let p = m[k].exp() / z;
    (p * d.exp_m1()).ln_1p() - if k == label { d } else { 0.0 }
}

fn central(f: impl Fn(f64) -> f64) -> (f64, f64) {
    let (up, down) = (f(STEP), f(-STEP));
    ((up - down) / (2.0 * STEP), (up + down) / (STEP * STEP))
}

fn gradient_fidelity() -> Result<String, String> {
    let mut rng = common::rng(7);
    let (mut worst_g, mut worst_h) = (0.0f64, 0.0f64);
    for i in 0..100 {
        let label = rng.random_range(0..2u32);
        let m = rng.random_range(-6.0..6.0);
        let (g, h) = grad_hess_logistic(label, m);
        // Logistic loss equals two-class cross-entropy on margins (0, m).
        let (fg, fh) = central(|d| xent_delta(label as usize, &[0.0, m], 1, d));
        worst_g = worst_g.max((g - fg).abs());
        worst_h = worst_h.max((h - fh).abs());
        ensure((g - fg).abs() <= 1e-6 && (h - fh).abs() <= 1e-5, || {
            format!("logistic point {i}: ({g}, {h}) vs ({fg}, {fh})")
        })?;
    }
    for i in 0..100 {
        let k = rng.random_range(2..=5);
        let label = rng.random_range(0..k);
        let m: Vec<f64> = (0..k).map(|_| rng.random_range(-4.0..4.0)).collect();
        let (g, h) = grad_hess_softmax(label as u32, &m);
        for c in 0..k {
            let (fg, fh) = central(|d| xent_delta(label, &m, c, d));
            worst_g = worst_g.max((g[c] - fg).abs());
            worst_h = worst_h.max((h[c] - fh).abs());
            ensure(
                (g[c] - fg).abs() <= 1e-6 && (h[c] - fh).abs() <= 1e-5,
                || {
                    format!(
                        "softmax point {i} class {c}: ({}, {}) vs ({fg}, {fh})",
                        g[c], h[c]
                    )
                },
            )?;
        }
    }
    Ok(format!("max |dg| {worst_g:.1e}, max |dh| {worst_h:.1e}"))
}

// ---------------------------------------------------------------------------
// Leaf weight against a grid search

fn quadratic_minimizer() -> Result<String, String> {
    let mut rng = common::rng(99);
    for trial in 0..100 {
        let gs = rng.random_range(-50.0..50.0);
        let hs = rng.random_range(0.0..20.0);
        let lambda = rng.random_range(0.0..5.0);
        if hs + lambda <= 0.0 {
            continue;
        }
        let obj = |w: f64| gs * w + 0.5 * (hs + lambda) * w * w;
        let w = leaf_weight(gs, hs, lambda).map_err(|e| e.to_string())?;
        let at_w = obj(w);
        for i in 0..=200_000 {
            let c = -10.0 + i as f64 * 1e-4;
            let at_c = obj(c);
            // Allow for rounding in evaluating the objective itself.
            let slack = 1e-12 * at_c.abs().max(1.0);
            ensure(at_w <= at_c + slack, || {
                format!("trial {trial}: w={w} gives {at_w}, grid point {c} gives {at_c}")
            })?;
        }
    }
    Ok("100 trials, 200001 grid points each".into())
}

// ---------------------------------------------------------------------------
// Training objective never increases

fn monotone_objective() -> Result<String, String> {
    let ds = common::random_dataset(500, 20, 2, 5);
    let fit = Trainer::new(table_params(), ObjectiveSpec::binary())
        .fit(&ds)
        .map_err(|e| e.to_string())?;
    let trace = &fit.objective_trace;
    ensure(trace.len() == 101, || {
        format!("trace has {} entries", trace.len())
    })?;
    for (i, w) in trace.windows(2).enumerate() {
        ensure(w[1] <= w[0] + 1e-9, || {
            format!("round {}: {} -> {}", i + 1, w[0], w[1])
        })?;
    }
    Ok(format!(
        "objective {:.4} -> {:.4} over 100 rounds",
        trace[0], trace[100]
    ))
}

// ---------------------------------------------------------------------------
// Byte-identical CLI output

fn boostray(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_boostray"))
        .args(args)
        .env_remove("BOOSTRAY_THREADS")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!(
            "{args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr).trim()
        )
    })?;
    Ok(out.stdout)
}

fn read(p: &Path) -> Result<Vec<u8>, String> {
    std::fs::read(p).map_err(|e| format!("{}: {e}", p.display()))
}

fn determinism() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = dir.path().join("blobs.fmx");
    write_fmx(&common::random_dataset(300, 12, 2, 17), &data).map_err(|e| e.to_string())?;
    let data = data.to_str().unwrap();

    for fmt in ["text", "json"] {
        let cv = |extra: &[&str]| {
            let mut args = vec!["cv", "--data", data, "--seed", "42", "--report-format", fmt];
            args.extend_from_slice(extra);
            boostray(&args)
        };
        let first = cv(&[])?;
        ensure(first == cv(&[])?, || {
            format!("{fmt} cv report differs between runs")
        })?;
        ensure(cv(&["--threads", "1"])? == cv(&["--threads", "8"])?, || {
            format!("{fmt} cv report differs between 1 and 8 threads")
        })?;
        ensure(first == cv(&["--threads", "8"])?, || {
            format!("{fmt} cv report depends on the pool")
        })?;
    }

    let mut models = Vec::new();
    for (i, threads) in ["1", "8", "8"].iter().enumerate() {
        let out = dir.path().join(format!("model{i}.json"));
        boostray(&[
            "train",
            "--data",
            data,
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ])?;
        models.push(read(&out)?);
    }
    ensure(models.windows(2).all(|w| w[0] == w[1]), || {
        "model files differ".into()
    })?;
    Ok(format!(
        "cv reports and {} byte model files identical",
        models[0].len()
    ))
}

// ---------------------------------------------------------------------------
// Separable two-blob data

fn synthetic_end_to_end() -> Result<String, String> {
    let ds = common::blobs(200, 5, 6.0, 3);
    let fit = Trainer::new(table_params(), ObjectiveSpec::binary())
        .fit(&ds)
        .map_err(|e| e.to_string())?;
    let pred = fit
        .model
        .predict_class(ds.features())
        .map_err(|e| e.to_string())?;
    let correct = pred.iter().zip(ds.labels()).filter(|(a, b)| a == b).count();
    ensure(correct == 200, || {
        format!("training accuracy {correct}/200")
    })?;

    let cv = Evaluator::new(table_params(), ObjectiveSpec::binary())
        .cv(&ds, 5, 42)
        .map_err(|e| e.to_string())?;
    let acc = cv.averaged.accuracy;
    ensure(acc >= 0.95, || format!("5-fold accuracy {acc}"))?;
    Ok(format!(
        "training accuracy 100%, 5-fold accuracy {:.2}%",
        100.0 * acc
    ))
}

// ---------------------------------------------------------------------------
// File round-trips

fn format_round_trips() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = common::rng(123);
    for trial in 0..50 {
        let n = rng.random_range(1..40);
        let d = rng.random_range(1..30);
        let k = rng.random_range(1..=4usize).min(n);
        // Raw bit patterns cover subnormals, negative zero and extremes.
        let values: Vec<f32> = (0..n * d)
            .map(|_| loop {
                let v = f32::from_bits(rng.random());
                if v.is_finite() {
                    break v;
                }
            })
            .collect();
        let mut labels: Vec<u32> = (0..n).map(|_| rng.random_range(0..k as u32)).collect();
        for (c, l) in labels.iter_mut().enumerate().take(k) {
            *l = c as u32;
        }
        let names = (0..k).map(|c| format!("class {c}-{trial}")).collect();
        let ds = Dataset::new(FeatureMatrix::new(n, d, values).unwrap(), labels, names).unwrap();
        let path = dir.path().join(format!("t{trial}.fmx"));
        write_fmx(&ds, &path).map_err(|e| e.to_string())?;
        let back = load_fmx(&path).map_err(|e| e.to_string())?;
        let bits = |d: &Dataset| {
            d.features()
                .values()
                .iter()
                .map(|v| v.to_bits())
                .collect::<Vec<_>>()
        };
        ensure(bits(&ds) == bits(&back), || {
            format!("trial {trial}: feature bits differ")
        })?;
        ensure(
            ds.labels() == back.labels() && ds.class_names() == back.class_names(),
            || format!("trial {trial}: labels or names differ"),
        )?;

        if k >= 2 {
            let params = HyperParams {
                num_rounds: rng.random_range(1..6),
                max_depth: rng.random_range(1..4),
                eta: rng.random_range(0.05..1.0),
                lambda: rng.random_range(0.0..3.0),
                min_child_weight: 0.0,
                ..HyperParams::default()
            };
            let spec = ObjectiveSpec::for_classes(k).unwrap();
            let model = Trainer::new(params, spec)
                .fit(&ds)
                .map_err(|e| e.to_string())?
                .model;
            let text = model_to_string(&model);
            let back = model_from_str(&text).map_err(|e| e.to_string())?;
            ensure(back == model, || {
                format!("trial {trial}: model differs after reload")
            })?;
            ensure(model_to_string(&back) == text, || {
                format!("trial {trial}: re-save differs")
            })?;
        }
    }
    Ok("50 trials, features bit-exact".into())
}

// ---------------------------------------------------------------------------
// Feature files from the chest X-ray study

fn fixture_dir() -> PathBuf {
    std::env::var_os("BOOSTRAY_XRAY_FIXTURES")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/xray"))
}

fn find_fixture(stem: &str) -> Option<PathBuf> {
    ["fmx", "csv"]
        .iter()
        .map(|ext| fixture_dir().join(format!("{stem}.{ext}")))
        .find(|p| p.exists())
}

fn xray_accuracy() -> Check {
    let name = "x-ray feature accuracy (2-class 5-fold >= 96.0%, 3-class holdout >= 85.0%)";
    let (Some(two), Some(three)) = (find_fixture("two_class"), find_fixture("three_class")) else {
        return Check {
            name,
            status: Status::Blocked,
            detail: format!(
                "no two_class/three_class feature files in {} (set BOOSTRAY_XRAY_FIXTURES)",
                fixture_dir().display()
            ),
        };
    };
    check(name, || {
        let two = Dataset::load(&two).map_err(|e| e.to_string())?;
        let three = Dataset::load(&three).map_err(|e| e.to_string())?;
        let cv = Evaluator::new(table_params(), ObjectiveSpec::binary())
            .cv(&two, 5, 42)
            .map_err(|e| e.to_string())?;
        let spec = ObjectiveSpec::for_classes(three.n_classes()).map_err(|e| e.to_string())?;
        let ho = Evaluator::new(table_params(), spec)
            .holdout(&three, 0.2, 42)
            .map_err(|e| e.to_string())?;
        let (a2, a3) = (cv.averaged.accuracy, ho.report.accuracy);
        ensure(a2 >= 0.96 && a3 >= 0.85, || {
            format!("2-class {a2:.4}, 3-class {a3:.4}")
        })?;
        Ok(format!(
            "2-class {:.2}%, 3-class {:.2}%",
            100.0 * a2,
            100.0 * a3
        ))
    })
}

fn training_time() -> Result<String, String> {
    let ds = common::shaped(&[125, 500, 500], 1664, 8);
    let start = Instant::now();
    let fit = Trainer::new(table_params(), ObjectiveSpec::for_classes(3).unwrap())
        .fit(&ds)
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(fit.model.trees.len() == 100, || "wrong round count".into())?;
    ensure(elapsed < Duration::from_secs(300), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("1125x1664, 3 classes, 100 rounds in {elapsed:.2?}"))
}

fn main() {
    let checks = vec![
        check("split-oracle equivalence", split_oracle),
        check("gradient fidelity", gradient_fidelity),
        check("quadratic minimizer", quadratic_minimizer),
        check("monotone training objective", monotone_objective),
        check("determinism across runs and thread counts", determinism),
        check("synthetic two-blob end-to-end", synthetic_end_to_end),
        check("FMX and model file round-trips", format_round_trips),
        xray_accuracy(),
        check(
            "training time on 1125x1664 features (< 5 min)",
            training_time,
        ),
    ];
    let mut failed = 0;
    for c in &checks {
        let tag = match c.status {
            Status::Pass => "PASS",
            Status::Fail => {
                failed += 1;
                "FAIL"
            }
            Status::Blocked => "BLOCKED",
        };
        println!("{tag:<7} {}: {}", c.name, c.detail);
    }
    if failed > 0 {
        println!("{failed} acceptance check(s) failed");
        std::process::exit(1);
    }
}
