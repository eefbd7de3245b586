//! Plug-in mutual information with equal-frequency binning.

use super::SelectorKind;
use crate::data::Target;
use crate::error::{Error, Result};
use crate::importance::ImportanceVector;
use ndarray::ArrayView2;

/// Per-feature mutual information against the target: continuous variables are
/// discretized into equal-frequency bins (regression targets too), then the
/// plug-in estimate is computed from the joint histogram. Negative estimates
/// are clamped to zero and the vector is sum-normalized.
///
/// A constant target is degenerate: every MI is zero and the vector comes back
/// flagged all-zero.
pub fn mi_rank(x: ArrayView2<f64>, y: &Target, bins: usize) -> Result<ImportanceVector> {
    let n = x.nrows();
    if n < 10 {
        return Err(Error::TooFewSamples { min: 10, got: n });
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            what: "target rows",
            expected: n,
            got: y.len(),
        });
    }
    let bins = bins.max(2);
    let (y_bins, y_arity) = match y {
        Target::Classification { labels, n_classes } => (labels.clone(), *n_classes),
        Target::Regression(values) => {
            let b = equal_frequency_bins(values, bins);
            let arity = b.iter().max().map_or(1, |m| m + 1);
            (b, arity)
        }
    };
    if y_bins.iter().all(|&b| b == y_bins[0]) {
        return Ok(ImportanceVector::from_raw(
            SelectorKind::Mi,
            vec![0.0; x.ncols()],
        ));
    }

    let raw: Vec<f64> = (0..x.ncols())
        .map(|j| {
            let column: Vec<f64> = x.column(j).to_vec();
            let x_bins = equal_frequency_bins(&column, bins);
            let x_arity = x_bins.iter().max().map_or(1, |m| m + 1);
            plugin_mi(&x_bins, x_arity, &y_bins, y_arity).max(0.0)
        })
        .collect();
    Ok(ImportanceVector::from_raw(SelectorKind::Mi, raw))
}

/// Equal-frequency discretization: cut points at the k/bins quantiles, with
/// duplicate cut points merged so tied values always share a bin.
pub(crate) fn equal_frequency_bins(values: &[f64], bins: usize) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    let mut edges: Vec<f64> = (1..bins)
        .map(|k| {
            let h = (k as f64 / bins as f64) * (n - 1) as f64;
            let lo = h.floor() as usize;
            let frac = h - lo as f64;
            if lo + 1 < n {
                sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
            } else {
                sorted[n - 1]
            }
        })
        .collect();
    edges.dedup_by(|a, b| a == b);
    values
        .iter()
        .map(|&v| edges.iter().filter(|&&e| v > e).count())
        .collect()
}

fn plugin_mi(a: &[usize], a_arity: usize, b: &[usize], b_arity: usize) -> f64 {
    let n = a.len() as f64;
    let mut joint = vec![0.0; a_arity * b_arity];
    let mut pa = vec![0.0; a_arity];
    let mut pb = vec![0.0; b_arity];
    for (&ai, &bi) in a.iter().zip(b) {
        joint[ai * b_arity + bi] += 1.0;
        pa[ai] += 1.0;
        pb[bi] += 1.0;
    }
    let mut mi = 0.0;
    for ai in 0..a_arity {
        for bi in 0..b_arity {
            let nab = joint[ai * b_arity + bi];
            if nab > 0.0 {
                mi += (nab / n) * ((n * nab) / (pa[ai] * pb[bi])).ln();
            }
        }
    }
    mi
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn informative_feature_outranks_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 500;
        let x = Array2::from_shape_fn((n, 2), |_| rng.random_range(-1.0..1.0f64));
        // y = x0 binarized; x1 pure noise.
        let labels: Vec<usize> = (0..n).map(|i| usize::from(x[[i, 0]] > 0.0)).collect();
        let y = Target::Classification {
            labels,
            n_classes: 2,
        };
        let iv = mi_rank(x.view(), &y, 8).unwrap();
        assert!(iv.scores[0] > iv.scores[1]);
        assert!(iv.scores[0] > 0.8, "scores {:?}", iv.scores);
    }

    #[test]
    fn independent_noise_scores_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 2000;
        let x = Array2::from_shape_fn((n, 2), |_| rng.random_range(-1.0..1.0f64));
        let labels: Vec<usize> = (0..n).map(|i| usize::from(x[[i, 0]] > 0.0)).collect();
        let y = Target::Classification {
            labels,
            n_classes: 2,
        };
        // Column 1 is independent of y; its normalized share against the
        // informative column must stay under 0.05.
        let iv = mi_rank(x.view(), &y, 8).unwrap();
        assert!(iv.scores[1] < 0.05, "noise share {}", iv.scores[1]);
    }

    #[test]
    fn identical_copies_share_the_score() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 400;
        let mut x = Array2::zeros((n, 3));
        for i in 0..n {
            let v: f64 = rng.random_range(-1.0..1.0);
            x[[i, 0]] = v;
            x[[i, 1]] = v; // exact copy
            x[[i, 2]] = rng.random_range(-1.0..1.0);
        }
        let labels: Vec<usize> = (0..n).map(|i| usize::from(x[[i, 0]] > 0.2)).collect();
        let y = Target::Classification {
            labels,
            n_classes: 2,
        };
        let iv = mi_rank(x.view(), &y, 8).unwrap();
        assert_eq!(iv.scores[0], iv.scores[1]);
    }

    #[test]
    fn constant_target_is_flagged() {
        let x = Array2::zeros((20, 2));
        let y = Target::Classification {
            labels: vec![1; 20],
            n_classes: 2,
        };
        let iv = mi_rank(x.view(), &y, 8).unwrap();
        assert!(iv.is_all_zero());
    }

    #[test]
    fn too_few_samples_is_rejected() {
        let x = Array2::zeros((5, 2));
        let y = Target::Regression(vec![0.0; 5]);
        assert!(matches!(
            mi_rank(x.view(), &y, 8),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn regression_targets_are_binned() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 600;
        let x = Array2::from_shape_fn((n, 2), |_| rng.random_range(-1.0..1.0f64));
        let y = Target::Regression((0..n).map(|i| 3.0 * x[[i, 1]]).collect());
        let iv = mi_rank(x.view(), &y, 8).unwrap();
        assert!(iv.scores[1] > iv.scores[0]);
    }

    #[test]
    fn tied_values_share_bins() {
        let values = vec![0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 3.0, 4.0];
        let bins = equal_frequency_bins(&values, 4);
        assert!(bins[0] == bins[1] && bins[1] == bins[2] && bins[2] == bins[3]);
    }
}
