//! KAN-derived feature importance: spline-coefficient norms (KAN-L1, KAN-L2),
//! knockout risk deltas (KAN-KO), and input-gradient sensitivity (KAN-SI).
//!
//! All four measures read only the first layer's parameters and structure,
//! since only layer 1 touches raw features. KO and SI are empirical risk /
//! gradient estimates and must be fed data held out from the model's own
//! training; the [`EvalSet`] provenance tag makes that checkable at runtime.

use crate::baselines::SelectorKind;
use crate::data::Target;
use crate::error::{Error, Result};
use crate::kan::KanModel;
use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

/// Nonnegative per-feature scores, sum-normalized to 1 unless every raw score
/// is zero (then the all-zero vector is returned with `normalized = false`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceVector {
    pub selector: SelectorKind,
    /// Normalized scores (or all zeros when flagged).
    pub scores: Vec<f64>,
    /// Pre-normalization scores, kept for fidelity to each measure's definition.
    pub raw_scores: Vec<f64>,
    /// False only in the flagged all-zero case.
    pub normalized: bool,
}

impl ImportanceVector {
    /// Sum-normalize nonnegative raw scores; an all-zero input is passed
    /// through and flagged.
    pub fn from_raw(selector: SelectorKind, raw: Vec<f64>) -> ImportanceVector {
        debug_assert!(raw.iter().all(|&v| v >= 0.0 && v.is_finite()));
        let total: f64 = raw.iter().sum();
        if total > 0.0 {
            ImportanceVector {
                selector,
                scores: raw.iter().map(|v| v / total).collect(),
                raw_scores: raw,
                normalized: true,
            }
        } else {
            ImportanceVector {
                selector,
                scores: vec![0.0; raw.len()],
                raw_scores: raw,
                normalized: false,
            }
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn is_all_zero(&self) -> bool {
        !self.normalized
    }

    /// Sum member scores into their source-feature groups (`group_of[col]` is
    /// the group index of encoded column `col`), renormalizing afterwards.
    pub fn aggregate_groups(&self, group_of: &[usize], n_groups: usize) -> Result<ImportanceVector> {
        if group_of.len() != self.scores.len() {
            return Err(Error::DimensionMismatch {
                what: "group map entries",
                expected: self.scores.len(),
                got: group_of.len(),
            });
        }
        let mut raw = vec![0.0; n_groups];
        for (col, &g) in group_of.iter().enumerate() {
            if g >= n_groups {
                return Err(Error::IndexOutOfRange {
                    index: g,
                    len: n_groups,
                });
            }
            raw[g] += self.raw_scores[col];
        }
        Ok(ImportanceVector::from_raw(self.selector, raw))
    }

    /// Invariant check: nonnegative, and sum 1 ± 1e-9 unless flagged all-zero.
    pub fn validate(&self) -> Result<()> {
        if self.scores.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "importance vector for {} has negative or non-finite scores",
                self.selector.id()
            )));
        }
        let sum: f64 = self.scores.iter().sum();
        let ok = if self.normalized {
            (sum - 1.0).abs() <= 1e-9
        } else {
            sum == 0.0
        };
        if !ok {
            return Err(Error::InvalidConfig(format!(
                "importance vector for {} sums to {sum}",
                self.selector.id()
            )));
        }
        Ok(())
    }
}

/// Where a data slice came from, relative to the model under evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// The slice participated in training the model.
    Training,
    /// The slice was held out from model training.
    HeldOut,
}

/// A tagged evaluation slice for the empirical importance measures.
pub struct EvalSet<'a> {
    x: ArrayView2<'a, f64>,
    y: Option<&'a Target>,
    provenance: Provenance,
}

impl<'a> EvalSet<'a> {
    pub fn held_out(x: ArrayView2<'a, f64>, y: Option<&'a Target>) -> Self {
        EvalSet {
            x,
            y,
            provenance: Provenance::HeldOut,
        }
    }

    /// Tag a slice that the model trained on. KO/SI reject it; this exists so
    /// callers cannot silently feed training data to the empirical measures.
    pub fn training(x: ArrayView2<'a, f64>, y: Option<&'a Target>) -> Self {
        EvalSet {
            x,
            y,
            provenance: Provenance::Training,
        }
    }

    pub fn x(&self) -> ArrayView2<'a, f64> {
        self.x
    }

    fn require_held_out(&self) -> Result<()> {
        match self.provenance {
            Provenance::HeldOut => Ok(()),
            Provenance::Training => Err(Error::ProvenanceViolation { got: "training" }),
        }
    }

    fn require_nonempty(&self) -> Result<()> {
        if self.x.nrows() == 0 {
            Err(Error::EmptyEvaluationSet)
        } else {
            Ok(())
        }
    }
}

/// Knockout bookkeeping: the base risk, each single-feature knockout risk, and
/// the clamped deltas the scores are built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnockoutReport {
    pub base_risk: f64,
    pub knockout_risks: Vec<f64>,
    /// `Δ_j = max(0, L_j − L)`.
    pub deltas: Vec<f64>,
    pub delta_floor: f64,
}

/// Normalization applied to raw sensitivities, matching the measurement scale
/// of each input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SensitivityScale {
    #[default]
    Std,
    Iqr,
    None,
}

/// Configuration for the sensitivity measure.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SensitivityConfig {
    pub scale: SensitivityScale,
    /// Encoded column → group index; when present, scaled scores are summed
    /// within each group (one-hot dummies fold back into their category) and
    /// the returned vector has one entry per group.
    pub onehot_groups: Option<Vec<usize>>,
}

/// Entrywise-absolute norm of each feature's layer-1 spline block, optionally
/// plus the absolute norm of its base column (the feature's total contribution).
pub fn importance_l1(model: &KanModel, include_base: bool) -> ImportanceVector {
    coefficient_importance(model, include_base, SelectorKind::KanL1, |block| {
        block.iter().map(|w| w.abs()).sum()
    })
}

/// Euclidean norm of each feature's layer-1 spline block, optionally plus the
/// Euclidean norm of its base column.
pub fn importance_l2(model: &KanModel, include_base: bool) -> ImportanceVector {
    coefficient_importance(model, include_base, SelectorKind::KanL2, |block| {
        block.iter().map(|w| w * w).sum::<f64>().sqrt()
    })
}

fn coefficient_importance<F>(
    model: &KanModel,
    include_base: bool,
    selector: SelectorKind,
    norm: F,
) -> ImportanceVector
where
    F: Fn(&[f64]) -> f64,
{
    let layer = &model.layers()[0];
    let d = layer.input_dim();
    let mut raw = Vec::with_capacity(d);
    for j in 0..d {
        let block: Vec<f64> = layer
            .spline_block(j)
            .expect("j < d")
            .iter()
            .cloned()
            .collect();
        let mut score = norm(&block);
        if include_base {
            let base_col: Vec<f64> = layer.w_base().column(j).to_vec();
            score += norm(&base_col);
        }
        raw.push(score);
    }
    ImportanceVector::from_raw(selector, raw)
}

/// Copy of the model with feature `j`'s layer-1 base column and spline block
/// zeroed; the original is untouched.
pub fn knockout_feature(model: &KanModel, j: usize) -> Result<KanModel> {
    let mut knocked = model.clone();
    knocked.layers_mut()[0].zero_feature(j)?;
    Ok(knocked)
}

/// Knockout importance: the clamped increase in held-out task loss when each
/// feature's first-layer parameters are zeroed.
///
/// `raw_scores` carries `Δ_j / (Σ Δ + δ)`; `scores` is additionally normalized
/// to sum exactly to one for cross-selector comparability.
pub fn importance_ko(
    model: &KanModel,
    eval: &EvalSet,
    delta_floor: f64,
) -> Result<(ImportanceVector, KnockoutReport)> {
    eval.require_held_out()?;
    eval.require_nonempty()?;
    if !(delta_floor > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "delta_floor must be positive, got {delta_floor}"
        )));
    }
    let y = eval
        .y
        .ok_or(Error::TaskMismatch("knockout importance needs labels"))?;
    let base_risk = model.loss(eval.x, y, 0.0)?;
    let d = model.input_dim();
    let mut knockout_risks = Vec::with_capacity(d);
    let mut deltas = Vec::with_capacity(d);
    for j in 0..d {
        let knocked = knockout_feature(model, j)?;
        let risk = knocked.loss(eval.x, y, 0.0)?;
        knockout_risks.push(risk);
        deltas.push((risk - base_risk).max(0.0));
    }
    let denom: f64 = deltas.iter().sum::<f64>() + delta_floor;
    let paper_scores: Vec<f64> = deltas.iter().map(|d| d / denom).collect();
    let vector = ImportanceVector::from_raw(SelectorKind::KanKo, paper_scores);
    let report = KnockoutReport {
        base_risk,
        knockout_risks,
        deltas,
        delta_floor,
    };
    Ok((vector, report))
}

/// Sensitivity importance: the empirical mean absolute input gradient on a
/// held-out slice, scaled per feature by its spread on the same slice.
pub fn importance_si(
    model: &KanModel,
    eval: &EvalSet,
    cfg: &SensitivityConfig,
) -> Result<ImportanceVector> {
    eval.require_held_out()?;
    eval.require_nonempty()?;
    let grads = model.input_gradients(eval.x)?;
    let n = grads.nrows() as f64;
    let d = grads.ncols();
    let mut scaled = Vec::with_capacity(d);
    for i in 0..d {
        let mean_abs = grads.column(i).iter().map(|g| g.abs()).sum::<f64>() / n;
        let column: Vec<f64> = eval.x.column(i).to_vec();
        let s = match cfg.scale {
            SensitivityScale::Std => population_std(&column),
            SensitivityScale::Iqr => iqr(&column),
            SensitivityScale::None => 1.0,
        };
        scaled.push(s * mean_abs);
    }
    let vector = match &cfg.onehot_groups {
        Some(group_of) => {
            let n_groups = group_of.iter().max().map_or(0, |m| m + 1);
            ImportanceVector::from_raw(SelectorKind::KanSi, scaled)
                .aggregate_groups(group_of, n_groups)?
        }
        None => ImportanceVector::from_raw(SelectorKind::KanSi, scaled),
    };
    Ok(vector)
}

fn population_std(values: &[f64]) -> f64 {
    // A constant column must score exactly zero, not rounding noise.
    if values.iter().all(|&v| v == values[0]) {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    var.sqrt()
}

/// Interquartile range with linearly interpolated quantiles.
fn iqr(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    quantile(&sorted, 0.75) - quantile(&sorted, 0.25)
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = q * (n - 1) as f64;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < n {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[n - 1]
    }
}
