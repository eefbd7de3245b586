//! Property tests over randomly generated inputs.

use kanselect::baselines::SelectorKind;
use kanselect::importance::ImportanceVector;
use kanselect::metrics;
use kanselect::pipeline::{plan_folds, retention_count, top_k};
use kanselect::spline::build_knots;
use proptest::prelude::*;

proptest! {
    /// Clamped B-splines: nonnegative, partition of unity, local support —
    /// for any degree/grid/domain and any probe point (even out of domain).
    #[test]
    fn spline_basis_invariants(
        degree in 0usize..=3,
        grid in 1usize..=8,
        lo in -5.0f64..0.0,
        width in 0.5f64..10.0,
        t in -0.5f64..1.5,
    ) {
        let hi = lo + width;
        let kv = build_knots(lo, hi, grid, degree).unwrap();
        prop_assert_eq!(kv.num_basis(), grid + degree);
        let x = lo + t * width; // sometimes outside [lo, hi]
        let ev = kv.eval(x);
        for &v in &ev.values {
            prop_assert!(v >= 0.0);
        }
        let sum: f64 = ev.values.iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
        let support = ev.values.iter().filter(|&&v| v > 0.0).count();
        prop_assert!(support <= degree + 1);
    }

    /// Importance normalization: any nonnegative raw vector either normalizes
    /// to sum one or comes back flagged all-zero.
    #[test]
    fn importance_normalization(raw in proptest::collection::vec(0.0f64..1e6, 1..20)) {
        let iv = ImportanceVector::from_raw(SelectorKind::Mi, raw.clone());
        iv.validate().unwrap();
        let sum: f64 = iv.scores.iter().sum();
        if raw.iter().sum::<f64>() > 0.0 {
            prop_assert!(iv.normalized);
            prop_assert!((sum - 1.0).abs() <= 1e-9);
        } else {
            prop_assert!(iv.is_all_zero());
            prop_assert_eq!(sum, 0.0);
        }
    }

    /// Top-k nesting: with the deterministic tie rule, growing the retention
    /// level only ever adds features.
    #[test]
    fn top_k_sets_nest(scores in proptest::collection::vec(0.0f64..1.0, 3..25)) {
        let iv = ImportanceVector::from_raw(SelectorKind::KanL2, scores);
        let d = iv.len();
        let mut previous: Vec<usize> = Vec::new();
        for percent in [20u32, 40, 60, 80, 100] {
            let n_k = retention_count(percent, d);
            let chosen = top_k(&iv, n_k).unwrap();
            prop_assert_eq!(chosen.len(), n_k);
            prop_assert!(previous.iter().all(|p| chosen.contains(p)));
            prop_assert!(chosen.windows(2).all(|w| w[0] < w[1]));
            previous = chosen;
        }
    }

    /// Fold partitions are exact: validation sets are disjoint and cover 0..n.
    #[test]
    fn fold_partition_exactness(n in 4usize..200, f in 2usize..8, seed in 0u64..1000) {
        prop_assume!(n >= f);
        let plan = plan_folds(n, f, None, seed).unwrap();
        let mut seen = vec![false; n];
        for fold in &plan.folds {
            for &i in &fold.validation {
                prop_assert!(!seen[i]);
                seen[i] = true;
            }
            prop_assert_eq!(fold.train.len() + fold.validation.len(), n);
        }
        prop_assert!(seen.iter().all(|&s| s));
        let sizes: Vec<usize> = plan.folds.iter().map(|f| f.validation.len()).collect();
        let min = sizes.iter().min().unwrap();
        let max = sizes.iter().max().unwrap();
        prop_assert!(max - min <= 1);
    }

    /// Macro-F1 stays in [0, 1] and hits 1 exactly on perfect predictions.
    #[test]
    fn macro_f1_bounds(
        (labels, preds) in (1usize..50).prop_flat_map(|n| (
            proptest::collection::vec(0usize..4, n),
            proptest::collection::vec(0usize..4, n),
        )),
    ) {
        let f1 = metrics::macro_f1(&labels, &preds, 4).unwrap();
        prop_assert!((0.0..=1.0).contains(&f1));
        let perfect = metrics::macro_f1(&labels, &labels, 4).unwrap();
        let classes_present = {
            let mut c = labels.clone();
            c.sort_unstable();
            c.dedup();
            c.len()
        };
        // Perfect predictions score 1 on every class that appears; absent
        // classes contribute 0 by the 0/0 convention.
        prop_assert!((perfect - classes_present as f64 / 4.0).abs() < 1e-12);
    }
}
