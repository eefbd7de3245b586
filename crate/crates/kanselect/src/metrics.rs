//! Evaluation metrics: macro-averaged F1 for classification, R² for regression.

use crate::data::Target;
use crate::error::{Error, Result};

/// Macro-F1: one-vs-rest F1 per class, averaged over all `n_classes` classes.
/// A class with no true or predicted samples contributes 0 (the 0/0 case).
pub fn macro_f1(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            what: "prediction rows",
            expected: y_true.len(),
            got: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::EmptyEvaluationSet);
    }
    for &l in y_true.iter().chain(y_pred) {
        if l >= n_classes {
            return Err(Error::LabelOutOfRange {
                label: l,
                n_classes,
            });
        }
    }
    let mut f1_sum = 0.0;
    for c in 0..n_classes {
        let mut tp = 0.0;
        let mut fp = 0.0;
        let mut fneg = 0.0;
        for (&t, &p) in y_true.iter().zip(y_pred) {
            match (t == c, p == c) {
                (true, true) => tp += 1.0,
                (false, true) => fp += 1.0,
                (true, false) => fneg += 1.0,
                (false, false) => {}
            }
        }
        let denom = 2.0 * tp + fp + fneg;
        if denom > 0.0 {
            f1_sum += 2.0 * tp / denom;
        }
    }
    Ok(f1_sum / n_classes as f64)
}

/// Coefficient of determination `1 − SS_res/SS_tot`. A constant target
/// (SS_tot = 0) scores 1 when the residuals are zero and 0 otherwise.
pub fn r2(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            what: "prediction rows",
            expected: y_true.len(),
            got: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::EmptyEvaluationSet);
    }
    let mean = y_true.iter().sum::<f64>() / y_true.len() as f64;
    let ss_tot: f64 = y_true.iter().map(|t| (t - mean) * (t - mean)).sum();
    let ss_res: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(t, p)| (t - p) * (t - p))
        .sum();
    if ss_tot == 0.0 {
        return Ok(if ss_res == 0.0 { 1.0 } else { 0.0 });
    }
    Ok(1.0 - ss_res / ss_tot)
}

/// Task-appropriate score of predictions against the truth: macro-F1 for
/// classification, R² for regression.
pub fn score(truth: &Target, predictions: &Target) -> Result<f64> {
    match (truth, predictions) {
        (Target::Regression(t), Target::Regression(p)) => r2(t, p),
        (
            Target::Classification {
                labels: t,
                n_classes,
            },
            Target::Classification { labels: p, .. },
        ) => macro_f1(t, p, *n_classes),
        _ => Err(Error::TaskMismatch("truth and prediction kinds differ")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn perfect_predictions_score_one() {
        assert_abs_diff_eq!(macro_f1(&[0, 1, 1, 2], &[0, 1, 1, 2], 3).unwrap(), 1.0);
        assert_abs_diff_eq!(r2(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
    }

    #[test]
    fn mean_prediction_scores_zero_r2() {
        let y = [1.0, 2.0, 3.0, 6.0];
        let mean = y.iter().sum::<f64>() / 4.0;
        let pred = [mean; 4];
        assert_abs_diff_eq!(r2(&y, &pred).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn hand_counted_macro_f1() {
        // y=(1,1,2,2), ŷ=(1,2,2,2) with classes {1,2} mapped to {0,1}:
        // F1_1 = 2/3, F1_2 = 0.8, macro = 11/15.
        let f1 = macro_f1(&[0, 0, 1, 1], &[0, 1, 1, 1], 2).unwrap();
        assert_abs_diff_eq!(f1, 11.0 / 15.0, epsilon = 1e-12);
    }

    #[test]
    fn absent_class_contributes_zero() {
        // Class 2 never appears in truth or prediction: 0/0 counts as 0.
        let f1 = macro_f1(&[0, 1], &[0, 1], 3).unwrap();
        assert_abs_diff_eq!(f1, 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_target_conventions() {
        assert_abs_diff_eq!(r2(&[5.0, 5.0], &[5.0, 5.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(r2(&[5.0, 5.0], &[5.0, 6.0]).unwrap(), 0.0);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        assert!(macro_f1(&[0, 1], &[0], 2).is_err());
        assert!(r2(&[0.0], &[]).is_err());
    }
}
