#![allow(dead_code)]

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shapshift::selector::{ErrorGroup, InfluenceRule};
use shapshift::{Dataset, GbdtModel, GbdtParams, Matrix};

/// A small boosted ensemble fitted on random data, plus rows to explain.
///
/// Half of the columns are coarsely discretized so thresholds collide with
/// feature values and ties are exercised.
pub fn random_ensemble(
    seed: u64,
    features: RangeInclusive<usize>,
    max_trees: usize,
    max_depth: usize,
) -> (GbdtModel, Matrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(features);
    let n = rng.random_range(30..=120);
    let mut columns = Vec::with_capacity(m);
    for j in 0..m {
        let col: Vec<f64> = (0..n)
            .map(|_| {
                let v: f64 = rng.random();
                if j % 2 == 1 { (v * 4.0).floor() } else { v }
            })
            .collect();
        columns.push(col);
    }
    let y: Vec<f64> = (0..n)
        .map(|i| {
            let mut s = 0.0;
            for (j, col) in columns.iter().enumerate() {
                let w = ((j * 7919 + seed as usize) % 5) as f64 - 2.0;
                s += w * col[i] + if j == 0 { (col[i] * 6.0).sin() } else { 0.0 };
            }
            s + rng.random::<f64>() * 0.3
        })
        .collect();
    let names: Vec<String> = (0..m).map(|j| format!("f{j:02}")).collect();
    let ds = Dataset::new(names, columns, "y", y).unwrap();
    let params = GbdtParams {
        n_trees: rng.random_range(1..=max_trees),
        learning_rate: 0.3,
        max_depth: rng.random_range(1..=max_depth),
        min_samples_leaf: rng.random_range(1..=6),
        ..Default::default()
    };
    let model = GbdtModel::fit(&ds, &params).unwrap();
    let mut rows: Vec<Vec<f64>> = (0..5).map(|i| ds.feature_matrix().row(i).to_vec()).collect();
    // off-sample rows, including ones sitting exactly on likely thresholds
    for _ in 0..3 {
        rows.push((0..m).map(|j| if j % 2 == 1 { rng.random_range(0..4) as f64 + 0.5 } else { rng.random() }).collect());
    }
    (model, Matrix::from_rows(&rows).unwrap())
}

/// Linear-interpolation quantile, computed independently of the library.
pub fn quantile_oracle(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Expected band and labels for an error vector.
pub fn partition_oracle(errors: &[f64], q_low: f64, q_high: f64) -> (f64, f64, Vec<ErrorGroup>) {
    let lo = quantile_oracle(errors, q_low);
    let hi = quantile_oracle(errors, q_high);
    let q_star = errors.iter().filter(|&&e| e <= 0.0).count() as f64 / errors.len() as f64;
    let star = quantile_oracle(errors, q_star);
    let (a, b) = if hi < 0.0 {
        (star, hi - (lo - star))
    } else if lo > 0.0 {
        (lo - (hi - star), star)
    } else {
        (lo, hi)
    };
    let labels = errors
        .iter()
        .map(|&e| {
            if e > b {
                ErrorGroup::Under
            } else if e < a {
                ErrorGroup::Over
            } else {
                ErrorGroup::Correct
            }
        })
        .collect();
    (a, b, labels)
}

/// Definition table for the negative-influence score, one match arm per
/// branch, written from the sign pattern instead of the library's chain.
pub fn influence_oracle(cp: f64, op: f64, up: f64, median: f64) -> (f64, InfluenceRule) {
    let (c, o, u) = (cp.abs(), op.abs(), up.abs());
    if cp == 0.0 && op == 0.0 && up == 0.0 {
        return (f64::INFINITY, InfluenceRule::NoEffect);
    }
    let both_positive = op > 0.0 && up > 0.0;
    if median < 0.0 && both_positive && o > u + c {
        return (o - u - c, InfluenceRule::FeedsOverPrediction);
    }
    if median > 0.0 && both_positive && u > o + c {
        return (u - o - c, InfluenceRule::FeedsUnderPrediction);
    }
    if op > 0.0 && up < 0.0 && o + u > c {
        return (o + u - c, InfluenceRule::WidensBothErrors);
    }
    (0.0, InfluenceRule::Harmless)
}
