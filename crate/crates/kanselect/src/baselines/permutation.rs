//! Permutation importance measured with an internal random-forest predictor.

use super::SelectorKind;
use crate::data::Target;
use crate::derive_seed;
use crate::error::{Error, Result};
use crate::importance::ImportanceVector;
use crate::metrics;
use crate::tree::{ForestConfig, RandomForest};
use ndarray::{Array2, ArrayView2, Axis};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

const HOLDOUT_FRACTION: f64 = 0.3;

/// Train a forest on a seeded 70/30 sub-split, then score each feature by the
/// drop in held-out metric (macro-F1 or R²) when that column is permuted:
/// `mean over repeats of max(0, baseline − permuted)`, sum-normalized.
pub fn permutation_importance(
    x: ArrayView2<f64>,
    y: &Target,
    repeats: usize,
    n_trees: usize,
    max_depth: usize,
    seed: u64,
) -> Result<ImportanceVector> {
    let (n, d) = x.dim();
    if n != y.len() {
        return Err(Error::DimensionMismatch {
            what: "target rows",
            expected: n,
            got: y.len(),
        });
    }
    if n < 10 {
        return Err(Error::TooFewSamples { min: 10, got: n });
    }
    let repeats = repeats.max(1);

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[crate::tag_hash("perm_split")]));
    order.shuffle(&mut rng);
    let n_holdout = ((n as f64 * HOLDOUT_FRACTION).round() as usize).clamp(1, n - 1);
    let (holdout_idx, train_idx) = order.split_at(n_holdout);

    let x_train = x.select(Axis(0), train_idx);
    let y_train = y.select(train_idx);
    let x_holdout = x.select(Axis(0), holdout_idx);
    let y_holdout = y.select(holdout_idx);

    let cfg = ForestConfig {
        n_trees,
        max_depth,
        seed: derive_seed(seed, &[crate::tag_hash("perm_forest")]),
        ..ForestConfig::default_for(y.task())
    };
    let forest = RandomForest::fit(x_train.view(), &y_train, &cfg);

    let baseline = metrics::score(&y_holdout, &forest_predict(&forest, x_holdout.view()))?;

    let mut raw = vec![0.0; d];
    for (j, slot) in raw.iter_mut().enumerate() {
        let mut acc = 0.0;
        for r in 0..repeats {
            let mut permuted = x_holdout.clone();
            shuffle_column(
                &mut permuted,
                j,
                derive_seed(seed, &[crate::tag_hash("perm_col"), j as u64, r as u64]),
            );
            let score = metrics::score(&y_holdout, &forest_predict(&forest, permuted.view()))?;
            acc += (baseline - score).max(0.0);
        }
        *slot = acc / repeats as f64;
    }
    Ok(ImportanceVector::from_raw(SelectorKind::PermutationRf, raw))
}

fn forest_predict(forest: &RandomForest, x: ArrayView2<f64>) -> Target {
    let raw = forest.predict(x);
    match forest.task() {
        crate::data::Task::Regression => Target::Regression(raw),
        crate::data::Task::Classification { n_classes } => Target::Classification {
            labels: raw.into_iter().map(|v| v as usize).collect(),
            n_classes,
        },
    }
}

fn shuffle_column(x: &mut Array2<f64>, j: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values: Vec<f64> = x.column(j).to_vec();
    values.shuffle(&mut rng);
    for (i, v) in values.into_iter().enumerate() {
        x[[i, j]] = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn constant_column_scores_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 120;
        let mut x = Array2::from_shape_fn((n, 3), |_| rng.random_range(-1.0..1.0f64));
        x.column_mut(1).fill(3.0);
        let y = Target::Regression((0..n).map(|i| 2.0 * x[[i, 0]]).collect());
        let iv = permutation_importance(x.view(), &y, 5, 50, 6, 0).unwrap();
        assert_eq!(iv.scores[1], 0.0);
    }

    #[test]
    fn informative_feature_dominates() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 150;
        let x = Array2::from_shape_fn((n, 4), |_| rng.random_range(-1.0..1.0f64));
        let y = Target::Regression((0..n).map(|i| 2.0 * x[[i, 2]]).collect());
        let iv = permutation_importance(x.view(), &y, 5, 60, 6, 3).unwrap();
        let top = iv
            .scores
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(top, 2);
        // Pure-noise columns stay below 0.1 of the normalized mass.
        for j in [0, 1, 3] {
            assert!(iv.scores[j] < 0.1, "noise column {j}: {}", iv.scores[j]);
        }
    }
}
