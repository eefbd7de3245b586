//! Classical feature selectors: mutual-information ranking, LASSO,
//! random-forest impurity importance, SVM-RFE, and permutation importance.
//!
//! Each selector consumes an encoded feature matrix plus targets and returns a
//! normalized [`ImportanceVector`]. Everything is deterministic given the seed
//! carried by the [`SelectorSpec`].

mod lasso;
mod mi;
mod permutation;
mod svm_rfe;

pub use lasso::{lasso_fit, lasso_select, LassoFit};
pub use mi::mi_rank;
pub use permutation::permutation_importance;
pub use svm_rfe::svm_rfe;

use crate::data::Target;
use crate::error::{Error, Result};
use crate::importance::{ImportanceVector, SensitivityScale};
use crate::kan::Activation;
use crate::tree::{ForestConfig, RandomForest};
use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

/// Identity of a feature selector; the full roster spans the four KAN measures
/// plus five classical baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectorKind {
    Mi,
    Lasso,
    RfImportance,
    SvmRfe,
    PermutationRf,
    KanL1,
    KanL2,
    KanKo,
    KanSi,
    /// Pseudo-selector keeping every feature; the benchmark baseline column.
    AllFeatures,
}

impl SelectorKind {
    /// Column header used in report tables.
    pub fn display_name(&self) -> &'static str {
        match self {
            SelectorKind::Mi => "Mutual Info",
            SelectorKind::Lasso => "LASSO/L1",
            SelectorKind::RfImportance => "Random Forest",
            SelectorKind::SvmRfe => "SVM-RFE",
            SelectorKind::PermutationRf => "Perm. (RF)",
            SelectorKind::KanL1 => "KAN-L1",
            SelectorKind::KanL2 => "KAN-L2",
            SelectorKind::KanKo => "KAN-KO",
            SelectorKind::KanSi => "KAN-SI",
            SelectorKind::AllFeatures => "All Features",
        }
    }

    /// Stable snake_case id used in file names and JSON.
    pub fn id(&self) -> &'static str {
        match self {
            SelectorKind::Mi => "mi",
            SelectorKind::Lasso => "lasso",
            SelectorKind::RfImportance => "rf_importance",
            SelectorKind::SvmRfe => "svm_rfe",
            SelectorKind::PermutationRf => "permutation_rf",
            SelectorKind::KanL1 => "kan_l1",
            SelectorKind::KanL2 => "kan_l2",
            SelectorKind::KanKo => "kan_ko",
            SelectorKind::KanSi => "kan_si",
            SelectorKind::AllFeatures => "all_features",
        }
    }

    pub fn is_kan(&self) -> bool {
        matches!(
            self,
            SelectorKind::KanL1 | SelectorKind::KanL2 | SelectorKind::KanKo | SelectorKind::KanSi
        )
    }
}

/// KAN training and measure options shared by the four KAN selectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct KanSelectorOptions {
    /// Hidden width for a 2-layer model; `None` keeps the single-layer default.
    pub hidden: Option<usize>,
    pub degree: usize,
    pub grid_size: usize,
    pub activation: Activation,
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2_penalty: f64,
    /// Add each feature's base-column norm to its spline norm (KAN-L1/L2).
    pub include_base: bool,
    pub si_scale: SensitivityScale,
    pub delta_floor: f64,
    /// Fraction of the training fold held out from KAN training for KO/SI.
    pub inner_holdout_fraction: f64,
}

impl Default for KanSelectorOptions {
    fn default() -> Self {
        Self {
            hidden: None,
            degree: 3,
            grid_size: 5,
            activation: Activation::Silu,
            epochs: 300,
            learning_rate: 0.2,
            l2_penalty: 1e-4,
            include_base: true,
            si_scale: SensitivityScale::Std,
            delta_floor: 1e-12,
            inner_holdout_fraction: 0.2,
        }
    }
}

/// A selector plus its hyperparameters; fields irrelevant to `kind` are ignored.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectorSpec {
    pub kind: SelectorKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_mi_bins")]
    pub mi_bins: usize,
    /// Fixed LASSO penalty; `None` selects it by internal 3-fold CV.
    #[serde(default)]
    pub lasso_lambda: Option<f64>,
    #[serde(default = "default_rf_trees")]
    pub rf_trees: usize,
    #[serde(default = "default_rf_depth")]
    pub rf_max_depth: usize,
    #[serde(default = "default_step_fraction")]
    pub rfe_step_fraction: f64,
    #[serde(default = "default_perm_repeats")]
    pub perm_repeats: usize,
    #[serde(default)]
    pub kan: KanSelectorOptions,
}

fn default_mi_bins() -> usize {
    8
}
fn default_rf_trees() -> usize {
    100
}
fn default_rf_depth() -> usize {
    8
}
fn default_step_fraction() -> f64 {
    0.1
}
fn default_perm_repeats() -> usize {
    5
}

impl SelectorSpec {
    pub fn of_kind(kind: SelectorKind) -> Self {
        Self {
            kind,
            seed: 0,
            mi_bins: default_mi_bins(),
            lasso_lambda: None,
            rf_trees: default_rf_trees(),
            rf_max_depth: default_rf_depth(),
            rfe_step_fraction: default_step_fraction(),
            perm_repeats: default_perm_repeats(),
            kan: KanSelectorOptions::default(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Mean decrease in impurity from a seeded random forest, sum-normalized.
pub fn rf_importance(
    x: ArrayView2<f64>,
    y: &Target,
    n_trees: usize,
    max_depth: usize,
    seed: u64,
) -> Result<ImportanceVector> {
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            what: "target rows",
            expected: x.nrows(),
            got: y.len(),
        });
    }
    let cfg = ForestConfig {
        n_trees,
        max_depth,
        seed,
        ..ForestConfig::default_for(y.task())
    };
    let forest = RandomForest::fit(x, y, &cfg);
    Ok(ImportanceVector::from_raw(
        SelectorKind::RfImportance,
        forest.impurity_importances(),
    ))
}

/// Fit one of the classical selectors. KAN selectors are driven by the
/// pipeline (they need model training plus an inner holdout) and the
/// all-features passthrough returns a uniform vector.
pub fn fit_classical(spec: &SelectorSpec, x: ArrayView2<f64>, y: &Target) -> Result<ImportanceVector> {
    match spec.kind {
        SelectorKind::Mi => mi_rank(x, y, spec.mi_bins),
        SelectorKind::Lasso => lasso_select(x, y, spec.lasso_lambda, spec.seed),
        SelectorKind::RfImportance => rf_importance(x, y, spec.rf_trees, spec.rf_max_depth, spec.seed),
        SelectorKind::SvmRfe => svm_rfe(x, y, spec.rfe_step_fraction, spec.seed),
        SelectorKind::PermutationRf => {
            permutation_importance(x, y, spec.perm_repeats, spec.rf_trees, spec.rf_max_depth, spec.seed)
        }
        SelectorKind::AllFeatures => Ok(ImportanceVector::from_raw(
            SelectorKind::AllFeatures,
            vec![1.0; x.ncols()],
        )),
        kan => Err(Error::InvalidConfig(format!(
            "{} is not a classical selector",
            kan.id()
        ))),
    }
}

/// Column-wise z-scoring in place of scale-sensitive selectors: zero mean and
/// unit population variance; constant columns become all zeros.
pub(crate) fn standardize(x: ArrayView2<f64>) -> Array2<f64> {
    let mut out = x.to_owned();
    for mut col in out.axis_iter_mut(Axis(1)) {
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let scale = if var > 0.0 { var.sqrt() } else { 1.0 };
        col.mapv_inplace(|v| (v - mean) / scale);
    }
    out
}
