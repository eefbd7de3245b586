//! L1-penalized linear selection by cyclic coordinate descent with soft
//! thresholding. Regression minimizes `(1/2n)‖y − Xβ‖² + λ‖β‖₁`; classification
//! fits one-vs-rest L1 logistic models by proximal coordinate descent with the
//! `p(1−p) ≤ 1/4` curvature bound.

use super::{standardize, SelectorKind};
use crate::data::Target;
use crate::error::{Error, Result};
use crate::importance::ImportanceVector;
use ndarray::{Array2, ArrayView2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-8;
const MAX_SWEEPS: usize = 10_000;

/// Result of a LASSO fit in the internally standardized feature space.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    /// One coefficient vector per one-vs-rest problem (a single entry for
    /// regression).
    pub coefficients: Vec<Vec<f64>>,
    pub intercepts: Vec<f64>,
    pub lambda: f64,
    pub converged: bool,
}

/// `|coefficients|` summed over the one-vs-rest problems, sum-normalized.
pub fn lasso_select(
    x: ArrayView2<f64>,
    y: &Target,
    lambda: Option<f64>,
    seed: u64,
) -> Result<ImportanceVector> {
    let fit = lasso_fit(x, y, lambda, seed)?;
    let d = x.ncols();
    let mut raw = vec![0.0; d];
    for coefs in &fit.coefficients {
        for (r, c) in raw.iter_mut().zip(coefs) {
            *r += c.abs();
        }
    }
    Ok(ImportanceVector::from_raw(SelectorKind::Lasso, raw))
}

/// Fit with a fixed `lambda`, or pick it by 3-fold cross-validation over a
/// 10-point logarithmic grid descending from the all-zero threshold `λ_max`.
pub fn lasso_fit(
    x: ArrayView2<f64>,
    y: &Target,
    lambda: Option<f64>,
    seed: u64,
) -> Result<LassoFit> {
    let n = x.nrows();
    if n != y.len() {
        return Err(Error::DimensionMismatch {
            what: "target rows",
            expected: n,
            got: y.len(),
        });
    }
    if n < 2 {
        return Err(Error::TooFewSamples { min: 2, got: n });
    }
    let xs = standardize(x);
    let lambda = match lambda {
        Some(l) => l,
        None => cross_validate_lambda(&xs, y, seed)?,
    };
    Ok(fit_standardized(&xs, y, lambda))
}

fn fit_standardized(xs: &Array2<f64>, y: &Target, lambda: f64) -> LassoFit {
    match y {
        Target::Regression(values) => {
            let (coefs, intercept, converged) =
                regression_cd(xs, values, lambda, None, MAX_SWEEPS);
            LassoFit {
                coefficients: vec![coefs],
                intercepts: vec![intercept],
                lambda,
                converged,
            }
        }
        Target::Classification { labels, n_classes } => {
            let mut coefficients = Vec::with_capacity(*n_classes);
            let mut intercepts = Vec::with_capacity(*n_classes);
            let mut converged = true;
            for class in 0..*n_classes {
                let targets: Vec<f64> = labels
                    .iter()
                    .map(|&l| if l == class { 1.0 } else { 0.0 })
                    .collect();
                let (coefs, b, ok) = logistic_cd(xs, &targets, lambda, None, MAX_SWEEPS);
                converged &= ok;
                coefficients.push(coefs);
                intercepts.push(b);
            }
            LassoFit {
                coefficients,
                intercepts,
                lambda,
                converged,
            }
        }
    }
}

/// Cyclic coordinate descent for `(1/2n)‖y − b − Xβ‖² + λ‖β‖₁`.
/// Returns `(β, intercept, converged)`.
fn regression_cd(
    xs: &Array2<f64>,
    y: &[f64],
    lambda: f64,
    warm: Option<&[f64]>,
    max_sweeps: usize,
) -> (Vec<f64>, f64, bool) {
    let (n, d) = xs.dim();
    let nf = n as f64;
    let y_mean = y.iter().sum::<f64>() / nf;
    let mut beta = warm.map_or_else(|| vec![0.0; d], |w| w.to_vec());
    // Residual r = y − ȳ − Xβ, maintained incrementally.
    let mut residual: Vec<f64> = (0..n)
        .map(|i| {
            let fit: f64 = (0..d).map(|j| xs[[i, j]] * beta[j]).sum();
            y[i] - y_mean - fit
        })
        .collect();
    let col_sq: Vec<f64> = (0..d)
        .map(|j| xs.column(j).iter().map(|v| v * v).sum::<f64>() / nf)
        .collect();

    for _ in 0..max_sweeps {
        let mut max_change = 0.0_f64;
        for j in 0..d {
            if col_sq[j] == 0.0 {
                continue;
            }
            let grad: f64 = (0..n).map(|i| xs[[i, j]] * residual[i]).sum::<f64>() / nf;
            let raw = beta[j] * col_sq[j] + grad;
            let new = soft_threshold(raw, lambda) / col_sq[j];
            let delta = new - beta[j];
            if delta != 0.0 {
                for i in 0..n {
                    residual[i] -= delta * xs[[i, j]];
                }
                beta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < TOL {
            return (beta, y_mean, true);
        }
    }
    (beta, y_mean, false)
}

/// Proximal coordinate descent for one-vs-rest L1 logistic regression with
/// binary targets in {0, 1}. The quadratic majorizer uses the global curvature
/// bound `x_jᵀx_j / 4n`.
fn logistic_cd(
    xs: &Array2<f64>,
    targets: &[f64],
    lambda: f64,
    warm: Option<&[f64]>,
    max_sweeps: usize,
) -> (Vec<f64>, f64, bool) {
    let (n, d) = xs.dim();
    let nf = n as f64;
    let mut beta = warm.map_or_else(|| vec![0.0; d], |w| w.to_vec());
    let mut intercept = 0.0;
    // Linear scores z = b + Xβ, maintained incrementally.
    let mut z: Vec<f64> = (0..n)
        .map(|i| (0..d).map(|j| xs[[i, j]] * beta[j]).sum::<f64>())
        .collect();
    let curvature: Vec<f64> = (0..d)
        .map(|j| xs.column(j).iter().map(|v| v * v).sum::<f64>() / (4.0 * nf))
        .collect();

    for _ in 0..max_sweeps {
        let mut max_change = 0.0_f64;

        // Unpenalized intercept step under the same 1/4 curvature bound.
        let grad_b: f64 = (0..n).map(|i| sigmoid(z[i] + intercept) - targets[i]).sum::<f64>() / nf;
        let delta_b = -grad_b / 0.25;
        intercept += delta_b;
        max_change = max_change.max(delta_b.abs());

        for j in 0..d {
            if curvature[j] == 0.0 {
                continue;
            }
            let grad: f64 = (0..n)
                .map(|i| xs[[i, j]] * (sigmoid(z[i] + intercept) - targets[i]))
                .sum::<f64>()
                / nf;
            let raw = curvature[j] * beta[j] - grad;
            let new = soft_threshold(raw, lambda) / curvature[j];
            let delta = new - beta[j];
            if delta != 0.0 {
                for i in 0..n {
                    z[i] += delta * xs[[i, j]];
                }
                beta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < TOL {
            return (beta, intercept, true);
        }
    }
    (beta, intercept, false)
}

fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

fn soft_threshold(v: f64, lambda: f64) -> f64 {
    if v > lambda {
        v - lambda
    } else if v < -lambda {
        v + lambda
    } else {
        0.0
    }
}

/// Smallest penalty that zeroes every coefficient (with the optimal intercept).
fn lambda_max(xs: &Array2<f64>, y: &Target) -> f64 {
    let (n, d) = xs.dim();
    let nf = n as f64;
    let residuals: Vec<Vec<f64>> = match y {
        Target::Regression(values) => {
            let mean = values.iter().sum::<f64>() / nf;
            vec![values.iter().map(|v| v - mean).collect()]
        }
        Target::Classification { labels, n_classes } => (0..*n_classes)
            .map(|class| {
                let targets: Vec<f64> = labels
                    .iter()
                    .map(|&l| if l == class { 1.0 } else { 0.0 })
                    .collect();
                let mean = targets.iter().sum::<f64>() / nf;
                targets.iter().map(|t| t - mean).collect()
            })
            .collect(),
    };
    let mut max = 0.0_f64;
    for r in &residuals {
        for j in 0..d {
            let dot: f64 = (0..xs.nrows()).map(|i| xs[[i, j]] * r[i]).sum();
            max = max.max((dot / nf).abs());
        }
    }
    max
}

/// 3-fold CV over a 10-point logarithmic grid `λ_max … λ_max·1e-3`, warm-started
/// from large to small. Ties prefer the larger (sparser) penalty.
fn cross_validate_lambda(xs: &Array2<f64>, y: &Target, seed: u64) -> Result<f64> {
    let n = xs.nrows();
    let lam_max = lambda_max(xs, y);
    if lam_max == 0.0 {
        return Ok(1e-3);
    }
    let grid: Vec<f64> = (0..10)
        .map(|k| lam_max * 10f64.powf(-3.0 * k as f64 / 9.0))
        .collect();

    let folds = 3.min(n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut assignment = vec![0usize; n];
    for (pos, &i) in order.iter().enumerate() {
        assignment[i] = pos % folds;
    }

    let mut grid_loss = vec![0.0; grid.len()];
    for fold in 0..folds {
        let train_idx: Vec<usize> = (0..n).filter(|i| assignment[*i] != fold).collect();
        let valid_idx: Vec<usize> = (0..n).filter(|i| assignment[*i] == fold).collect();
        if train_idx.is_empty() || valid_idx.is_empty() {
            continue;
        }
        let x_train = xs.select(ndarray::Axis(0), &train_idx);
        let x_valid = xs.select(ndarray::Axis(0), &valid_idx);

        match y {
            Target::Regression(values) => {
                let y_train: Vec<f64> = train_idx.iter().map(|&i| values[i]).collect();
                let y_valid: Vec<f64> = valid_idx.iter().map(|&i| values[i]).collect();
                let mut warm: Option<Vec<f64>> = None;
                for (g, &lam) in grid.iter().enumerate() {
                    let (beta, b, _) =
                        regression_cd(&x_train, &y_train, lam, warm.as_deref(), 1000);
                    let mse: f64 = valid_idx
                        .iter()
                        .enumerate()
                        .map(|(row, _)| {
                            let pred: f64 = (0..xs.ncols())
                                .map(|j| x_valid[[row, j]] * beta[j])
                                .sum::<f64>()
                                + b;
                            let e = pred - y_valid[row];
                            e * e
                        })
                        .sum::<f64>()
                        / y_valid.len() as f64;
                    grid_loss[g] += mse;
                    warm = Some(beta);
                }
            }
            Target::Classification { labels, n_classes } => {
                for class in 0..*n_classes {
                    let t_train: Vec<f64> = train_idx
                        .iter()
                        .map(|&i| if labels[i] == class { 1.0 } else { 0.0 })
                        .collect();
                    let t_valid: Vec<f64> = valid_idx
                        .iter()
                        .map(|&i| if labels[i] == class { 1.0 } else { 0.0 })
                        .collect();
                    let mut warm: Option<Vec<f64>> = None;
                    for (g, &lam) in grid.iter().enumerate() {
                        let (beta, b, _) =
                            logistic_cd(&x_train, &t_train, lam, warm.as_deref(), 1000);
                        let deviance: f64 = valid_idx
                            .iter()
                            .enumerate()
                            .map(|(row, _)| {
                                let z: f64 = (0..xs.ncols())
                                    .map(|j| x_valid[[row, j]] * beta[j])
                                    .sum::<f64>()
                                    + b;
                                let p = sigmoid(z).clamp(1e-12, 1.0 - 1e-12);
                                -(t_valid[row] * p.ln() + (1.0 - t_valid[row]) * (1.0 - p).ln())
                            })
                            .sum::<f64>()
                            / t_valid.len() as f64;
                        grid_loss[g] += deviance;
                        warm = Some(beta);
                    }
                }
            }
        }
    }

    let mut best = 0;
    for g in 1..grid.len() {
        if grid_loss[g] < grid_loss[best] {
            best = g;
        }
    }
    Ok(grid[best])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// OLS on standardized data via the normal equations, solved by Gaussian
    /// elimination inside the test: the oracle for λ = 0.
    fn ols(xs: &Array2<f64>, y_centered: &[f64]) -> Vec<f64> {
        let (n, d) = xs.dim();
        let mut a = vec![vec![0.0; d + 1]; d];
        for r in 0..d {
            for c in 0..d {
                a[r][c] = (0..n).map(|i| xs[[i, r]] * xs[[i, c]]).sum();
            }
            a[r][d] = (0..n).map(|i| xs[[i, r]] * y_centered[i]).sum();
        }
        for col in 0..d {
            let pivot = (col..d)
                .max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
                .unwrap();
            a.swap(col, pivot);
            for r in 0..d {
                if r != col {
                    let f = a[r][col] / a[col][col];
                    for c in col..=d {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
        (0..d).map(|r| a[r][d] / a[r][r]).collect()
    }

    #[test]
    fn zero_penalty_matches_ols() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 80;
        let x = Array2::from_shape_fn((n, 3), |_| rng.random_range(-1.0..1.0f64));
        let y: Vec<f64> = (0..n)
            .map(|i| 2.0 * x[[i, 0]] - 1.0 * x[[i, 2]] + 0.05 * rng.random_range(-1.0..1.0))
            .collect();
        let fit = lasso_fit(x.view(), &Target::Regression(y.clone()), Some(0.0), 0).unwrap();

        let xs = standardize(x.view());
        let mean = y.iter().sum::<f64>() / n as f64;
        let centered: Vec<f64> = y.iter().map(|v| v - mean).collect();
        let oracle = ols(&xs, &centered);
        for (a, b) in fit.coefficients[0].iter().zip(&oracle) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-6);
        }
    }

    #[test]
    fn lambda_above_threshold_zeroes_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 60;
        let x = Array2::from_shape_fn((n, 4), |_| rng.random_range(-1.0..1.0f64));
        let y: Vec<f64> = (0..n).map(|i| x[[i, 1]] * 3.0).collect();
        let xs = standardize(x.view());
        let target = Target::Regression(y);
        let lam = lambda_max(&xs, &target);
        let fit = lasso_fit(x.view(), &target, Some(lam * 1.0001), 0).unwrap();
        assert!(fit.coefficients[0].iter().all(|&c| c == 0.0));
        // Just below the threshold at least one coefficient activates.
        let fit = lasso_fit(x.view(), &target, Some(lam * 0.99), 0).unwrap();
        assert!(fit.coefficients[0].iter().any(|&c| c != 0.0));
    }

    /// Orthonormal design (±1 Hadamard columns have zero mean, unit variance,
    /// zero cross-correlation), where the solution is the entrywise soft
    /// threshold of the OLS coefficients.
    #[test]
    fn orthonormal_design_soft_threshold_closed_form() {
        let h = [
            [1.0, 1.0, 1.0, 1.0],
            [1.0, -1.0, 1.0, -1.0],
            [1.0, 1.0, -1.0, -1.0],
            [1.0, -1.0, -1.0, 1.0],
        ];
        // Drop the constant first column; replicate rows to n = 8.
        let mut x = Array2::zeros((8, 3));
        for i in 0..8 {
            for j in 0..3 {
                x[[i, j]] = h[i % 4][j + 1];
            }
        }
        let beta_true = [1.5, -0.4, 0.05];
        let y: Vec<f64> = (0..8)
            .map(|i| (0..3).map(|j| x[[i, j]] * beta_true[j]).sum::<f64>() + 2.0)
            .collect();
        let lambda = 0.3;
        let fit = lasso_fit(x.view(), &Target::Regression(y.clone()), Some(lambda), 0).unwrap();
        let xs = standardize(x.view());
        let mean = y.iter().sum::<f64>() / 8.0;
        for j in 0..3 {
            let ols_j: f64 = (0..8).map(|i| xs[[i, j]] * (y[i] - mean)).sum::<f64>() / 8.0;
            let expected = soft_threshold(ols_j, lambda);
            assert_abs_diff_eq!(fit.coefficients[0][j], expected, epsilon = 1e-6);
        }
    }

    /// KKT stationarity at convergence: every zero coefficient satisfies
    /// |x_jᵀ r / n| ≤ λ + tol.
    #[test]
    fn kkt_conditions_hold_at_convergence() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100;
        let x = Array2::from_shape_fn((n, 6), |_| rng.random_range(-1.0..1.0f64));
        let y: Vec<f64> = (0..n)
            .map(|i| 2.0 * x[[i, 0]] + 0.5 * x[[i, 3]] + 0.1 * rng.random_range(-1.0..1.0))
            .collect();
        let lambda = 0.05;
        let fit = lasso_fit(x.view(), &Target::Regression(y.clone()), Some(lambda), 0).unwrap();
        assert!(fit.converged);
        let xs = standardize(x.view());
        let mean = y.iter().sum::<f64>() / n as f64;
        let beta = &fit.coefficients[0];
        let residual: Vec<f64> = (0..n)
            .map(|i| y[i] - mean - (0..6).map(|j| xs[[i, j]] * beta[j]).sum::<f64>())
            .collect();
        for j in 0..6 {
            let corr: f64 = (0..n).map(|i| xs[[i, j]] * residual[i]).sum::<f64>() / n as f64;
            if beta[j] == 0.0 {
                assert!(corr.abs() <= lambda + 1e-6, "feature {j}: {corr}");
            } else {
                assert_abs_diff_eq!(corr, lambda * beta[j].signum(), epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn cv_lambda_keeps_informative_features() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 120;
        let x = Array2::from_shape_fn((n, 5), |_| rng.random_range(-1.0..1.0f64));
        let y: Vec<f64> = (0..n)
            .map(|i| 3.0 * x[[i, 2]] + 0.1 * rng.random_range(-1.0..1.0))
            .collect();
        let iv = lasso_select(x.view(), &Target::Regression(y), None, 9).unwrap();
        assert!(iv.scores[2] > 0.8, "scores {:?}", iv.scores);
    }

    #[test]
    fn logistic_lasso_finds_the_separating_feature() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 150;
        let mut x = Array2::from_shape_fn((n, 4), |_| rng.random_range(-1.0..1.0f64));
        let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
        for i in 0..n {
            x[[i, 1]] += if labels[i] == 1 { 1.5 } else { -1.5 };
        }
        let y = Target::Classification {
            labels,
            n_classes: 2,
        };
        let iv = lasso_select(x.view(), &y, None, 6).unwrap();
        let top = iv
            .scores
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(top, 1);
    }
}
