#![allow(dead_code)]

use boostray::data::{Dataset, FeatureMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Two Gaussian blobs (sd 1) whose centres sit `gap` apart in every
/// dimension, `n / 2` rows each. Class 0 is "normal", class 1 "covid".
pub fn blobs(n: usize, d: usize, gap: f64, seed: u64) -> Dataset {
    let mut rng = rng(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut values = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = (i >= n / 2) as u32;
        let centre = if label == 1 { gap } else { 0.0 };
        for _ in 0..d {
            values.push((centre + noise.sample(&mut rng)) as f32);
        }
        labels.push(label);
    }
    let fm = FeatureMatrix::new(n, d, values).unwrap();
    Dataset::new(fm, labels, vec!["normal".into(), "covid".into()]).unwrap()
}

/// Labels drawn from a noisy linear rule over uniform features.
pub fn random_dataset(n: usize, d: usize, n_classes: usize, seed: u64) -> Dataset {
    let mut rng = rng(seed);
    let values: Vec<f32> = (0..n * d).map(|_| rng.random_range(-1.0f32..1.0)).collect();
    let weights: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut labels: Vec<u32> = (0..n)
        .map(|i| {
            let s: f64 = (0..d)
                .map(|j| weights[j] * f64::from(values[i * d + j]))
                .sum();
            let s = s + rng.random_range(-0.3..0.3);
            let bucket = ((s + 1.5) / 3.0 * n_classes as f64).floor();
            bucket.clamp(0.0, (n_classes - 1) as f64) as u32
        })
        .collect();
    // Guarantee every class is present.
    for (c, l) in labels.iter_mut().enumerate().take(n_classes) {
        *l = c as u32;
    }
    let fm = FeatureMatrix::new(n, d, values).unwrap();
    let names = (0..n_classes).map(|c| format!("class{c}")).collect();
    Dataset::new(fm, labels, names).unwrap()
}

/// `n_per_class[c]` rows for class c, features distinguishable per class.
pub fn shaped(n_per_class: &[usize], d: usize, seed: u64) -> Dataset {
    let mut rng = rng(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (c, &count) in n_per_class.iter().enumerate() {
        for _ in 0..count {
            for j in 0..d {
                let shift = if j % n_per_class.len() == c { 1.5 } else { 0.0 };
                values.push((shift + noise.sample(&mut rng)) as f32);
            }
            labels.push(c as u32);
        }
    }
    let n = labels.len();
    let fm = FeatureMatrix::new(n, d, values).unwrap();
    let names = (0..n_per_class.len())
        .map(|c| format!("class{c}"))
        .collect();
    Dataset::new(fm, labels, names).unwrap()
}
