//! Downstream predictors used to score selected feature subsets: ridge /
//! multinomial logistic regression, random forests, and gradient-boosted trees.

use crate::data::{Target, Task};
use crate::error::{Error, Result};
use crate::tree::{ForestConfig, GbtConfig, GradientBoostedTrees, RandomForest};
use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

/// Predictor families of the benchmark. The gradient-boosted predictor also
/// answers to the `xgboost` config alias.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictorKind {
    Linear,
    RandomForest,
    #[serde(alias = "xgboost")]
    GradientBoostedTrees,
}

impl PredictorKind {
    pub fn id(&self) -> &'static str {
        match self {
            PredictorKind::Linear => "linear",
            PredictorKind::RandomForest => "random_forest",
            PredictorKind::GradientBoostedTrees => "gradient_boosted_trees",
        }
    }

    /// Row label used in report tables, matching the task-specific linear name.
    pub fn display_name(&self, task: Task) -> &'static str {
        match self {
            PredictorKind::Linear => {
                if task.is_classification() {
                    "LogReg"
                } else {
                    "Ridge"
                }
            }
            PredictorKind::RandomForest => "RF",
            PredictorKind::GradientBoostedTrees => "GB",
        }
    }
}

/// Predictor hyperparameters; unset fields keep the benchmark defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PredictorSpec {
    pub kind: PredictorKind,
    pub seed: u64,
    /// Ridge l2 strength; must be positive (it also regularizes the solve).
    pub ridge_alpha: f64,
    pub logistic_epochs: usize,
    pub logistic_lr: f64,
    pub logistic_l2: f64,
    pub n_trees: usize,
    pub rf_max_depth: usize,
    pub gbt_rounds: usize,
    pub gbt_depth: usize,
    pub gbt_shrinkage: f64,
}

impl Default for PredictorSpec {
    fn default() -> Self {
        Self {
            kind: PredictorKind::Linear,
            seed: 0,
            ridge_alpha: 1.0,
            logistic_epochs: 300,
            logistic_lr: 0.5,
            logistic_l2: 1e-4,
            n_trees: 100,
            rf_max_depth: 8,
            gbt_rounds: 200,
            gbt_depth: 3,
            gbt_shrinkage: 0.1,
        }
    }
}

impl PredictorSpec {
    pub fn of_kind(kind: PredictorKind) -> Self {
        Self {
            kind,
            ..Default::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// A fitted predictor ready to score new rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum PredictorModel {
    Ridge {
        weights: Vec<f64>,
        intercept: f64,
    },
    Logistic {
        /// C×d weight matrix.
        weights: Array2<f64>,
        intercepts: Vec<f64>,
        n_classes: usize,
    },
    Forest(RandomForest),
    Gbt(GradientBoostedTrees),
}

/// Train the predictor described by `spec` on `(x, y)`.
pub fn fit(spec: &PredictorSpec, x: ArrayView2<f64>, y: &Target) -> Result<PredictorModel> {
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            what: "target rows",
            expected: x.nrows(),
            got: y.len(),
        });
    }
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::InvalidSize {
            what: "training matrix",
            min: 1,
            got: 0,
        });
    }
    match (spec.kind, y) {
        (PredictorKind::Linear, Target::Regression(values)) => {
            fit_ridge(x, values, spec.ridge_alpha)
        }
        (PredictorKind::Linear, Target::Classification { labels, n_classes }) => {
            fit_logistic(x, labels, *n_classes, spec)
        }
        (PredictorKind::RandomForest, _) => {
            let cfg = ForestConfig {
                n_trees: spec.n_trees,
                max_depth: spec.rf_max_depth,
                seed: spec.seed,
                ..ForestConfig::default_for(y.task())
            };
            Ok(PredictorModel::Forest(RandomForest::fit(x, y, &cfg)))
        }
        (PredictorKind::GradientBoostedTrees, _) => {
            let cfg = GbtConfig {
                n_rounds: spec.gbt_rounds,
                max_depth: spec.gbt_depth,
                shrinkage: spec.gbt_shrinkage,
                seed: spec.seed,
            };
            Ok(PredictorModel::Gbt(GradientBoostedTrees::fit(x, y, &cfg)))
        }
    }
}

/// Predictions in the same target representation the model was trained on.
pub fn predict(model: &PredictorModel, x: ArrayView2<f64>) -> Target {
    match model {
        PredictorModel::Ridge { weights, intercept } => {
            let values = x
                .rows()
                .into_iter()
                .map(|row| row.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>() + intercept)
                .collect();
            Target::Regression(values)
        }
        PredictorModel::Logistic {
            weights,
            intercepts,
            n_classes,
        } => {
            let labels = x
                .rows()
                .into_iter()
                .map(|row| {
                    let mut best = 0;
                    let mut best_score = f64::NEG_INFINITY;
                    for c in 0..*n_classes {
                        let score = row
                            .iter()
                            .zip(weights.row(c))
                            .map(|(a, w)| a * w)
                            .sum::<f64>()
                            + intercepts[c];
                        if score > best_score {
                            best_score = score;
                            best = c;
                        }
                    }
                    best
                })
                .collect();
            Target::Classification {
                labels,
                n_classes: *n_classes,
            }
        }
        PredictorModel::Forest(forest) => raw_to_target(forest.predict(x), forest_task(forest)),
        PredictorModel::Gbt(gbt) => raw_to_target(gbt.predict(x), gbt_task(gbt)),
    }
}

fn forest_task(forest: &RandomForest) -> Task {
    forest.task()
}

fn gbt_task(gbt: &GradientBoostedTrees) -> Task {
    gbt.task()
}

fn raw_to_target(raw: Vec<f64>, task: Task) -> Target {
    match task {
        Task::Regression => Target::Regression(raw),
        Task::Classification { n_classes } => Target::Classification {
            labels: raw.into_iter().map(|v| v as usize).collect(),
            n_classes,
        },
    }
}

/// Closed-form ridge: center features and target, solve the regularized normal
/// equations by Cholesky, recover the intercept from the means.
fn fit_ridge(x: ArrayView2<f64>, y: &[f64], alpha: f64) -> Result<PredictorModel> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "ridge_alpha must be positive, got {alpha}"
        )));
    }
    let (n, d) = x.dim();
    let x_mean: Array1<f64> = x.mean_axis(Axis(0)).expect("n > 0");
    let y_mean = y.iter().sum::<f64>() / n as f64;

    let mut gram = Array2::zeros((d, d));
    let mut rhs = vec![0.0; d];
    for i in 0..n {
        for a in 0..d {
            let xa = x[[i, a]] - x_mean[a];
            rhs[a] += xa * (y[i] - y_mean);
            for b in a..d {
                gram[[a, b]] += xa * (x[[i, b]] - x_mean[b]);
            }
        }
    }
    for a in 0..d {
        gram[[a, a]] += alpha;
        for b in 0..a {
            gram[[a, b]] = gram[[b, a]];
        }
    }
    let weights = cholesky_solve(&gram, &rhs)?;
    let intercept = y_mean
        - weights
            .iter()
            .zip(x_mean.iter())
            .map(|(w, m)| w * m)
            .sum::<f64>();
    Ok(PredictorModel::Ridge { weights, intercept })
}

/// Solve the SPD system `A v = b` in place via Cholesky.
fn cholesky_solve(a: &Array2<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let d = b.len();
    let mut l = a.clone();
    for c in 0..d {
        for r in c..d {
            let mut sum = l[[r, c]];
            for k in 0..c {
                sum -= l[[r, k]] * l[[c, k]];
            }
            if r == c {
                if sum <= 0.0 {
                    return Err(Error::InvalidConfig(
                        "ridge system is not positive definite".into(),
                    ));
                }
                l[[c, c]] = sum.sqrt();
            } else {
                l[[r, c]] = sum / l[[c, c]];
            }
        }
    }
    // Forward then backward substitution.
    let mut v = b.to_vec();
    for r in 0..d {
        for k in 0..r {
            v[r] -= l[[r, k]] * v[k];
        }
        v[r] /= l[[r, r]];
    }
    for r in (0..d).rev() {
        for k in r + 1..d {
            v[r] -= l[[k, r]] * v[k];
        }
        v[r] /= l[[r, r]];
    }
    Ok(v)
}

/// Multinomial logistic regression by full-batch gradient descent from zero
/// init (deterministic without any RNG). Epochs that raise the objective are
/// rolled back with a halved step, so the objective is non-increasing.
fn fit_logistic(
    x: ArrayView2<f64>,
    labels: &[usize],
    n_classes: usize,
    spec: &PredictorSpec,
) -> Result<PredictorModel> {
    let (n, d) = x.dim();
    for &l in labels {
        if l >= n_classes {
            return Err(Error::LabelOutOfRange {
                label: l,
                n_classes,
            });
        }
    }
    let mut weights = Array2::<f64>::zeros((n_classes, d));
    let mut intercepts = vec![0.0; n_classes];
    let l2 = spec.logistic_l2;

    let objective = |w: &Array2<f64>, b: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            let mut logits = vec![0.0; n_classes];
            for c in 0..n_classes {
                logits[c] = x.row(i).iter().zip(w.row(c)).map(|(a, v)| a * v).sum::<f64>() + b[c];
            }
            let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = logits.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
            acc += lse - logits[labels[i]];
        }
        acc / n as f64 + l2 * w.iter().map(|v| v * v).sum::<f64>()
    };

    let mut lr = spec.logistic_lr;
    let mut prev = objective(&weights, &intercepts);
    for _ in 0..spec.logistic_epochs {
        let mut grad_w = Array2::<f64>::zeros((n_classes, d));
        let mut grad_b = vec![0.0; n_classes];
        for i in 0..n {
            let mut logits = vec![0.0; n_classes];
            for c in 0..n_classes {
                logits[c] = x
                    .row(i)
                    .iter()
                    .zip(weights.row(c))
                    .map(|(a, v)| a * v)
                    .sum::<f64>()
                    + intercepts[c];
            }
            let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let denom: f64 = logits.iter().map(|v| (v - max).exp()).sum();
            for c in 0..n_classes {
                let p = (logits[c] - max).exp() / denom;
                let err = (p - if labels[i] == c { 1.0 } else { 0.0 }) / n as f64;
                grad_b[c] += err;
                for j in 0..d {
                    grad_w[[c, j]] += err * x[[i, j]];
                }
            }
        }
        grad_w += &(2.0 * l2 * &weights);

        let snapshot_w = weights.clone();
        let snapshot_b = intercepts.clone();
        weights.scaled_add(-lr, &grad_w);
        for (b, g) in intercepts.iter_mut().zip(&grad_b) {
            *b -= lr * g;
        }
        let cur = objective(&weights, &intercepts);
        if !cur.is_finite() || cur > prev {
            weights = snapshot_w;
            intercepts = snapshot_b;
            lr *= 0.5;
        } else {
            prev = cur;
        }
    }

    Ok(PredictorModel::Logistic {
        weights,
        intercepts,
        n_classes,
    })
}
