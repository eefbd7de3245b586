//! Recursive feature elimination with a linear scorer: a hinge-loss SVM
//! (one-vs-rest, deterministic full-batch subgradient descent) for
//! classification, ridge coefficients for regression.

use super::{standardize, SelectorKind};
use crate::data::Target;
use crate::error::{Error, Result};
use crate::importance::ImportanceVector;
use ndarray::{Array2, ArrayView2, Axis};

const SVM_EPOCHS: usize = 300;
const SVM_L2: f64 = 0.01;
const RIDGE_ALPHA: f64 = 1e-3;

/// Iteratively train the linear scorer on the surviving features, drop the
/// `step_fraction` (at least one) with the smallest squared weight, and map the
/// reverse elimination order to ranks normalized to sum 1: the last survivor
/// scores highest.
pub fn svm_rfe(
    x: ArrayView2<f64>,
    y: &Target,
    step_fraction: f64,
    _seed: u64,
) -> Result<ImportanceVector> {
    let (n, d) = x.dim();
    if n != y.len() {
        return Err(Error::DimensionMismatch {
            what: "target rows",
            expected: n,
            got: y.len(),
        });
    }
    if d == 0 {
        return Err(Error::InvalidSize {
            what: "features",
            min: 1,
            got: 0,
        });
    }
    if !(0.0 < step_fraction && step_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "step_fraction must lie in (0, 1), got {step_fraction}"
        )));
    }
    let xs = standardize(x);

    let mut surviving: Vec<usize> = (0..d).collect();
    let mut elimination_rank = vec![0usize; d]; // 1 = first out, d = last out
    let mut next_rank = 1;

    while !surviving.is_empty() {
        let x_sub = xs.select(Axis(1), &surviving);
        let criteria = match y {
            Target::Classification { labels, n_classes } => {
                svm_criteria(&x_sub, labels, *n_classes)
            }
            Target::Regression(values) => ridge_criteria(&x_sub, values),
        };
        let step = ((surviving.len() as f64 * step_fraction).floor() as usize)
            .max(1)
            .min(surviving.len());

        // Smallest criterion goes first; ties fall to the lower feature index
        // because `surviving` is kept ascending and the sort is stable.
        let mut order: Vec<usize> = (0..surviving.len()).collect();
        order.sort_by(|&a, &b| criteria[a].total_cmp(&criteria[b]));
        let mut doomed: Vec<usize> = order[..step].iter().map(|&p| surviving[p]).collect();
        doomed.sort_by_key(|&f| {
            let pos = surviving.iter().position(|&s| s == f).expect("member");
            (float_ord(criteria[pos]), f)
        });
        for f in doomed {
            elimination_rank[f] = next_rank;
            next_rank += 1;
            surviving.retain(|&s| s != f);
        }
    }

    let raw: Vec<f64> = elimination_rank.iter().map(|&r| r as f64).collect();
    Ok(ImportanceVector::from_raw(SelectorKind::SvmRfe, raw))
}

fn float_ord(v: f64) -> u64 {
    // Total order on nonnegative criteria for stable tie handling.
    v.to_bits()
}

/// Σ_c w_{c,j}² from one-vs-rest soft-margin hinge SVMs trained by full-batch
/// subgradient descent with a 1/(λt) step schedule (zero init, no randomness).
fn svm_criteria(x: &Array2<f64>, labels: &[usize], n_classes: usize) -> Vec<f64> {
    let (n, d) = x.dim();
    let mut criteria = vec![0.0; d];
    let classes = if n_classes == 2 { 1 } else { n_classes };
    for class in 0..classes {
        let sign: Vec<f64> = labels
            .iter()
            .map(|&l| if l == class { 1.0 } else { -1.0 })
            .collect();
        let mut w = vec![0.0; d];
        let mut b = 0.0;
        for t in 1..=SVM_EPOCHS {
            let lr = 1.0 / (SVM_L2 * t as f64);
            let mut grad_w: Vec<f64> = w.iter().map(|wi| SVM_L2 * wi).collect();
            let mut grad_b = 0.0;
            for i in 0..n {
                let margin: f64 =
                    sign[i] * ((0..d).map(|j| w[j] * x[[i, j]]).sum::<f64>() + b);
                if margin < 1.0 {
                    for j in 0..d {
                        grad_w[j] -= sign[i] * x[[i, j]] / n as f64;
                    }
                    grad_b -= sign[i] / n as f64;
                }
            }
            for j in 0..d {
                w[j] -= lr * grad_w[j];
            }
            b -= lr * grad_b;
        }
        for j in 0..d {
            criteria[j] += w[j] * w[j];
        }
    }
    criteria
}

/// w_j² from a ridge fit, the regression stand-in scorer.
fn ridge_criteria(x: &Array2<f64>, y: &[f64]) -> Vec<f64> {
    let (n, d) = x.dim();
    let nf = n as f64;
    let y_mean = y.iter().sum::<f64>() / nf;
    let mut gram = vec![vec![0.0; d]; d];
    let mut rhs = vec![0.0; d];
    for i in 0..n {
        for a in 0..d {
            rhs[a] += x[[i, a]] * (y[i] - y_mean);
            for b in a..d {
                gram[a][b] += x[[i, a]] * x[[i, b]];
            }
        }
    }
    for a in 0..d {
        gram[a][a] += RIDGE_ALPHA;
        for b in 0..a {
            gram[a][b] = gram[b][a];
        }
    }
    // Gaussian elimination with partial pivoting.
    let mut aug = gram;
    for (row, r) in rhs.iter().enumerate() {
        aug[row].push(*r);
    }
    for col in 0..d {
        let pivot = (col..d)
            .max_by(|&p, &q| aug[p][col].abs().total_cmp(&aug[q][col].abs()))
            .expect("nonempty");
        aug.swap(col, pivot);
        for r in 0..d {
            if r != col && aug[col][col] != 0.0 {
                let f = aug[r][col] / aug[col][col];
                for c in col..=d {
                    aug[r][c] -= f * aug[col][c];
                }
            }
        }
    }
    (0..d)
        .map(|r| {
            let w = aug[r][d] / aug[r][r];
            w * w
        })
        .collect()
}
