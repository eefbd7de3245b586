//! The leakage-safe selection-to-prediction protocol: fold planning, per-fold
//! preprocessing and selector fitting, top-k projection, predictor scoring,
//! and aggregation into a [`BenchmarkReport`].
//!
//! For every fold, preprocessing and selectors see only the training indices.
//! The KAN knockout and sensitivity measures additionally carve a seeded 80/20
//! split inside the training fold so their evaluation data is held out from
//! KAN training while staying disjoint from the validation fold.

use crate::baselines::{self, SelectorKind, SelectorSpec};
use crate::data::{Dataset, Target};
use crate::error::{Error, Result};
use crate::importance::{
    importance_ko, importance_l1, importance_l2, importance_si, EvalSet, ImportanceVector,
    SensitivityConfig,
};
use crate::kan::{self, KanModel, KanSpec, TrainConfig};
use crate::metrics;
use crate::predictors::{self, PredictorSpec};
use crate::report::{BenchmarkReport, ReportMetadata, ScoreCell, SelectionRecord};
use crate::{derive_seed, tag_hash};
use ndarray::{Array2, ArrayView2, Axis};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Cap the global worker pool used for benchmark jobs. Call before the first
/// parallel run; later calls are ignored once the pool exists. Results never
/// depend on the worker count, only wall-clock time does.
pub fn configure_workers(workers: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))
}

/// One cross-validation split: training indices and their complement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

/// A complete F-fold partition of `0..n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub n: usize,
    pub folds: Vec<Fold>,
    pub seed: u64,
    pub stratified: bool,
}

/// Plan `f` folds over `n` samples. Classification labels trigger
/// stratification: each class is dealt round-robin across folds, keeping class
/// proportions within one sample per fold.
pub fn plan_folds(n: usize, f: usize, labels: Option<&[usize]>, seed: u64) -> Result<FoldPlan> {
    if f < 2 {
        return Err(Error::InvalidSize {
            what: "folds",
            min: 2,
            got: f,
        });
    }
    if n < f {
        return Err(Error::TooFewSamples { min: f, got: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut validation_sets: Vec<Vec<usize>> = vec![Vec::new(); f];
    match labels {
        Some(labels) => {
            if labels.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "label rows",
                    expected: n,
                    got: labels.len(),
                });
            }
            let n_classes = labels.iter().max().map_or(0, |m| m + 1);
            let mut dealt = 0usize;
            for class in 0..n_classes {
                let mut members: Vec<usize> =
                    (0..n).filter(|&i| labels[i] == class).collect();
                members.shuffle(&mut rng);
                for idx in members {
                    validation_sets[dealt % f].push(idx);
                    dealt += 1;
                }
            }
        }
        None => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            for (pos, idx) in order.into_iter().enumerate() {
                validation_sets[pos % f].push(idx);
            }
        }
    }
    let folds = validation_sets
        .into_iter()
        .map(|mut validation| {
            validation.sort_unstable();
            let in_validation: std::collections::BTreeSet<usize> =
                validation.iter().cloned().collect();
            let train: Vec<usize> = (0..n).filter(|i| !in_validation.contains(i)).collect();
            Fold { train, validation }
        })
        .collect();
    Ok(FoldPlan {
        n,
        folds,
        seed,
        stratified: labels.is_some(),
    })
}

/// `n_k = max(1, ⌈k·d/100⌉)`: how many features a retention percentage keeps.
pub fn retention_count(percent: u32, d: usize) -> usize {
    let nk = ((percent as f64) * (d as f64) / 100.0).ceil() as usize;
    nk.clamp(1, d)
}

/// Indices of the `n_k` largest scores, ties broken toward the lower feature
/// index; the result is sorted ascending.
pub fn top_k(importance: &ImportanceVector, n_k: usize) -> Result<Vec<usize>> {
    let d = importance.len();
    if n_k > d {
        return Err(Error::InvalidSize {
            what: "retained features",
            min: n_k,
            got: d,
        });
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        importance.scores[b]
            .total_cmp(&importance.scores[a])
            .then(a.cmp(&b))
    });
    let mut chosen: Vec<usize> = order.into_iter().take(n_k).collect();
    chosen.sort_unstable();
    Ok(chosen)
}

/// Restrict `x` to the given columns, preserving ascending order.
pub fn project(x: ArrayView2<f64>, columns: &[usize]) -> Array2<f64> {
    x.select(Axis(1), columns)
}

/// Column-wise z-scoring fitted on training data only. Constant columns pass
/// through unscaled (scale 1) so no NaNs appear downstream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: ArrayView2<f64>) -> Standardizer {
        let n = x.nrows() as f64;
        let (means, scales) = x
            .axis_iter(Axis(1))
            .map(|col| {
                let mean = col.iter().sum::<f64>() / n;
                let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                let scale = if var > 0.0 { var.sqrt() } else { 1.0 };
                (mean, scale)
            })
            .unzip();
        Standardizer { means, scales }
    }

    pub fn transform(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut out = x.to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (m, s) = (self.means[j], self.scales[j]);
            col.mapv_inplace(|v| (v - m) / s);
        }
        out
    }
}

/// Options shared by a whole benchmark run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkOptions {
    pub retentions: Vec<u32>,
    pub seed: u64,
}

impl Default for BenchmarkOptions {
    fn default() -> Self {
        Self {
            retentions: vec![20, 40, 60],
            seed: 0,
        }
    }
}

/// Fit any selector on (already preprocessed) training-fold data, returning a
/// source-feature-level importance vector.
///
/// Encoded-column scores are summed within their one-hot groups; for purely
/// numeric data the group map is the identity and this is a no-op.
pub fn fit_selector(
    spec: &SelectorSpec,
    x_train: ArrayView2<f64>,
    y_train: &Target,
    group_of: &[usize],
    n_sources: usize,
    seed: u64,
) -> Result<ImportanceVector> {
    let vector = match spec.kind {
        SelectorKind::KanL1 | SelectorKind::KanL2 => {
            let model = train_kan(spec, x_train, y_train, derive_seed(seed, &[tag_hash("kan_full")]))?;
            let iv = match spec.kind {
                SelectorKind::KanL1 => importance_l1(&model, spec.kan.include_base),
                _ => importance_l2(&model, spec.kan.include_base),
            };
            iv.aggregate_groups(group_of, n_sources)?
        }
        SelectorKind::KanKo => {
            let (model, holdout_x, holdout_y) =
                train_kan_with_holdout(spec, x_train, y_train, seed)?;
            let eval = EvalSet::held_out(holdout_x.view(), Some(&holdout_y));
            let (iv, _) = importance_ko(&model, &eval, spec.kan.delta_floor)?;
            if iv.is_all_zero() {
                // No knockout moved the loss; fall back to the L2 ranking of
                // the same trained model so top-k stays meaningful.
                importance_l2(&model, spec.kan.include_base).aggregate_groups(group_of, n_sources)?
            } else {
                iv.aggregate_groups(group_of, n_sources)?
            }
        }
        SelectorKind::KanSi => {
            let (model, holdout_x, _) = train_kan_with_holdout(spec, x_train, y_train, seed)?;
            let eval = EvalSet::held_out(holdout_x.view(), None);
            let cfg = SensitivityConfig {
                scale: spec.kan.si_scale,
                onehot_groups: Some(group_of.to_vec()),
            };
            let mut iv = importance_si(&model, &eval, &cfg)?;
            if iv.len() < n_sources {
                iv.scores.resize(n_sources, 0.0);
                iv.raw_scores.resize(n_sources, 0.0);
            }
            iv
        }
        _ => {
            let spec = SelectorSpec {
                seed: derive_seed(seed, &[tag_hash("classical")]),
                ..spec.clone()
            };
            baselines::fit_classical(&spec, x_train, y_train)?.aggregate_groups(group_of, n_sources)?
        }
    };
    vector.validate()?;
    Ok(vector)
}

fn kan_spec_of(spec: &SelectorSpec) -> KanSpec {
    KanSpec {
        hidden: spec.kan.hidden,
        degree: spec.kan.degree,
        grid_size: spec.kan.grid_size,
        activation: spec.kan.activation,
    }
}

fn train_kan(
    spec: &SelectorSpec,
    x: ArrayView2<f64>,
    y: &Target,
    seed: u64,
) -> Result<KanModel> {
    let model = KanModel::init(y.task(), x, &kan_spec_of(spec), seed)?;
    let cfg = TrainConfig {
        epochs: spec.kan.epochs,
        learning_rate: spec.kan.learning_rate,
        l2_penalty: spec.kan.l2_penalty,
        batch_size: 0,
        momentum: 0.0,
        seed,
    };
    let (trained, _) = kan::train(model, x, y, &cfg)?;
    Ok(trained)
}

/// Split the training fold 80/20 (seeded), train on the larger part, and hand
/// back the held-out slice for the empirical measures.
fn train_kan_with_holdout(
    spec: &SelectorSpec,
    x: ArrayView2<f64>,
    y: &Target,
    seed: u64,
) -> Result<(KanModel, Array2<f64>, Target)> {
    let n = x.nrows();
    if n < 5 {
        return Err(Error::TooFewSamples { min: 5, got: n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[tag_hash("kan_inner")]));
    order.shuffle(&mut rng);
    let holdout = spec.kan.inner_holdout_fraction.clamp(0.05, 0.5);
    let n_holdout = ((n as f64 * holdout).round() as usize).clamp(1, n - 2);
    let (holdout_idx, train_idx) = order.split_at(n_holdout);
    let mut holdout_idx = holdout_idx.to_vec();
    let mut train_idx = train_idx.to_vec();
    holdout_idx.sort_unstable();
    train_idx.sort_unstable();

    let x_inner = x.select(Axis(0), &train_idx);
    let y_inner = y.select(&train_idx);
    let model = train_kan_inner(spec, x_inner.view(), &y_inner, seed)?;
    let x_holdout = x.select(Axis(0), &holdout_idx);
    let y_holdout = y.select(&holdout_idx);
    Ok((model, x_holdout, y_holdout))
}

fn train_kan_inner(
    spec: &SelectorSpec,
    x: ArrayView2<f64>,
    y: &Target,
    seed: u64,
) -> Result<KanModel> {
    let model = KanModel::init(
        y.task(),
        x,
        &kan_spec_of(spec),
        derive_seed(seed, &[tag_hash("kan_inner_init")]),
    )?;
    let cfg = TrainConfig {
        epochs: spec.kan.epochs,
        learning_rate: spec.kan.learning_rate,
        l2_penalty: spec.kan.l2_penalty,
        batch_size: 0,
        momentum: 0.0,
        seed,
    };
    let (trained, _) = kan::train(model, x, y, &cfg)?;
    Ok(trained)
}

struct SelectorJobOutput {
    cells: Vec<ScoreCell>,
    selections: Vec<SelectionRecord>,
}

/// Run the full selection-to-prediction benchmark over a fold plan.
///
/// Each (fold, selector) job fits preprocessing and the selector on the
/// training fold only, projects both folds to the selected columns per
/// retention level, trains every predictor on the projected training fold and
/// scores it on the projected validation fold. Per-cell failures are recorded
/// and the run continues.
pub fn run_benchmark(
    dataset: &Dataset,
    selectors: &[SelectorSpec],
    predictor_specs: &[PredictorSpec],
    plan: &FoldPlan,
    opts: &BenchmarkOptions,
) -> Result<BenchmarkReport> {
    dataset.validate()?;
    if plan.n != dataset.n_samples() {
        return Err(Error::DimensionMismatch {
            what: "fold plan samples",
            expected: dataset.n_samples(),
            got: plan.n,
        });
    }
    if selectors.is_empty() || predictor_specs.is_empty() {
        return Err(Error::InvalidConfig(
            "need at least one selector and one predictor".into(),
        ));
    }
    for &r in &opts.retentions {
        if r == 0 || r > 100 {
            return Err(Error::InvalidConfig(format!(
                "retention {r}% outside (0, 100]"
            )));
        }
    }

    // Per-fold preprocessing, fitted on the training fold only.
    struct FoldData {
        x_train: Array2<f64>,
        y_train: Target,
        x_valid: Array2<f64>,
        y_valid: Target,
    }
    let fold_data: Vec<FoldData> = plan
        .folds
        .iter()
        .map(|fold| {
            let x_train_raw = dataset.x.select(Axis(0), &fold.train);
            let scaler = Standardizer::fit(x_train_raw.view());
            FoldData {
                x_train: scaler.transform(x_train_raw.view()),
                y_train: dataset.y.select(&fold.train),
                x_valid: scaler.transform(dataset.x.select(Axis(0), &fold.validation).view()),
                y_valid: dataset.y.select(&fold.validation),
            }
        })
        .collect();

    let n_sources = dataset.n_sources();
    let jobs: Vec<(usize, usize)> = (0..plan.folds.len())
        .flat_map(|f| (0..selectors.len()).map(move |s| (f, s)))
        .collect();

    let outputs: Vec<SelectorJobOutput> = jobs
        .par_iter()
        .map(|&(fold_idx, selector_idx)| {
            let spec = &selectors[selector_idx];
            let data = &fold_data[fold_idx];
            let seed = derive_seed(
                opts.seed,
                &[tag_hash(spec.kind.id()), fold_idx as u64],
            );
            run_selector_job(
                dataset,
                spec,
                data.x_train.view(),
                &data.y_train,
                data.x_valid.view(),
                &data.y_valid,
                predictor_specs,
                &opts.retentions,
                n_sources,
                fold_idx,
                seed,
                opts.seed,
            )
        })
        .collect();

    let mut cells = Vec::new();
    let mut selections = Vec::new();
    for output in outputs {
        cells.extend(output.cells);
        selections.extend(output.selections);
    }

    let mut selector_kinds: Vec<SelectorKind> = selectors.iter().map(|s| s.kind).collect();
    selector_kinds.sort();
    selector_kinds.dedup();
    let mut predictor_kinds: Vec<_> = predictor_specs.iter().map(|p| p.kind).collect();
    predictor_kinds.sort();
    predictor_kinds.dedup();

    let metadata = ReportMetadata {
        dataset: dataset.name.clone(),
        task: dataset.task(),
        n_samples: dataset.n_samples(),
        n_sources,
        n_encoded: dataset.n_encoded(),
        folds: plan.folds.len(),
        retentions: opts.retentions.clone(),
        seed: opts.seed,
        selectors: selector_kinds,
        predictors: predictor_kinds,
        config_hash: None,
    };
    Ok(BenchmarkReport::assemble(metadata, cells, selections))
}

#[allow(clippy::too_many_arguments)]
fn run_selector_job(
    dataset: &Dataset,
    spec: &SelectorSpec,
    x_train: ArrayView2<f64>,
    y_train: &Target,
    x_valid: ArrayView2<f64>,
    y_valid: &Target,
    predictor_specs: &[PredictorSpec],
    retentions: &[u32],
    n_sources: usize,
    fold_idx: usize,
    selector_seed: u64,
    master_seed: u64,
) -> SelectorJobOutput {
    let mut cells = Vec::new();
    let mut selections = Vec::new();

    // The all-features baseline runs once per fold at retention 100.
    let retention_list: Vec<u32> = if spec.kind == SelectorKind::AllFeatures {
        vec![100]
    } else {
        retentions.to_vec()
    };

    let importance = fit_selector(
        spec,
        x_train,
        y_train,
        &dataset.group_of,
        n_sources,
        selector_seed,
    );

    match importance {
        Ok(importance) => {
            for &retention in &retention_list {
                let n_k = retention_count(retention, n_sources);
                let sources = match top_k(&importance, n_k) {
                    Ok(s) => s,
                    Err(e) => {
                        for pspec in predictor_specs {
                            cells.push(failed_cell(spec.kind, retention, pspec, fold_idx, &e));
                        }
                        continue;
                    }
                };
                let columns: Vec<usize> = sources
                    .iter()
                    .flat_map(|&s| dataset.encoded_columns_of(s))
                    .collect();
                selections.push(SelectionRecord {
                    selector: spec.kind,
                    retention,
                    fold: fold_idx,
                    sources: sources.clone(),
                });
                let x_train_proj = project(x_train, &columns);
                let x_valid_proj = project(x_valid, &columns);
                for pspec in predictor_specs {
                    let seeded = PredictorSpec {
                        seed: derive_seed(
                            master_seed,
                            &[
                                tag_hash("predictor"),
                                tag_hash(pspec.kind.id()),
                                fold_idx as u64,
                            ],
                        ),
                        ..pspec.clone()
                    };
                    let outcome = predictors::fit(&seeded, x_train_proj.view(), y_train)
                        .and_then(|model| {
                            let preds = predictors::predict(&model, x_valid_proj.view());
                            metrics::score(y_valid, &preds)
                        });
                    match outcome {
                        Ok(score) => cells.push(ScoreCell {
                            selector: spec.kind,
                            retention,
                            predictor: pspec.kind,
                            fold: fold_idx,
                            score: Some(score),
                            error: None,
                        }),
                        Err(e) => cells.push(failed_cell(spec.kind, retention, pspec, fold_idx, &e)),
                    }
                }
            }
        }
        Err(e) => {
            for &retention in &retention_list {
                for pspec in predictor_specs {
                    cells.push(failed_cell(spec.kind, retention, pspec, fold_idx, &e));
                }
            }
        }
    }

    SelectorJobOutput { cells, selections }
}

fn failed_cell(
    selector: SelectorKind,
    retention: u32,
    pspec: &PredictorSpec,
    fold: usize,
    error: &Error,
) -> ScoreCell {
    ScoreCell {
        selector,
        retention,
        predictor: pspec.kind,
        fold,
        score: None,
        error: Some(error.to_string()),
    }
}

/// The full default roster: the four KAN measures, the five classical
/// baselines, and the all-features passthrough.
pub fn default_selector_roster() -> Vec<SelectorSpec> {
    [
        SelectorKind::KanKo,
        SelectorKind::KanL1,
        SelectorKind::KanL2,
        SelectorKind::KanSi,
        SelectorKind::Lasso,
        SelectorKind::Mi,
        SelectorKind::PermutationRf,
        SelectorKind::RfImportance,
        SelectorKind::SvmRfe,
        SelectorKind::AllFeatures,
    ]
    .into_iter()
    .map(SelectorSpec::of_kind)
    .collect()
}

/// Fold plan for a dataset: stratified for classification.
pub fn plan_for_dataset(dataset: &Dataset, f: usize, seed: u64) -> Result<FoldPlan> {
    match &dataset.y {
        Target::Classification { labels, .. } => plan_folds(dataset.n_samples(), f, Some(labels), seed),
        Target::Regression(_) => plan_folds(dataset.n_samples(), f, None, seed),
    }
}

/// Convenience wrapper for non-CV selector fitting on a full dataset (used by
/// the ranking command): standardizes, fits, and returns source-level vectors.
pub fn rank_on_full_dataset(
    dataset: &Dataset,
    selectors: &[SelectorSpec],
    seed: u64,
) -> Result<Vec<(SelectorKind, ImportanceVector)>> {
    dataset.validate()?;
    let scaler = Standardizer::fit(dataset.x.view());
    let x = scaler.transform(dataset.x.view());
    selectors
        .iter()
        .map(|spec| {
            let iv = fit_selector(
                spec,
                x.view(),
                &dataset.y,
                &dataset.group_of,
                dataset.n_sources(),
                derive_seed(seed, &[tag_hash(spec.kind.id()), tag_hash("full")]),
            )?;
            Ok((spec.kind, iv))
        })
        .collect()
}

/// Train the KAN used for ranking on the full dataset, for model inspection.
pub fn kan_for_dataset(dataset: &Dataset, spec: &SelectorSpec, seed: u64) -> Result<KanModel> {
    let scaler = Standardizer::fit(dataset.x.view());
    let x = scaler.transform(dataset.x.view());
    train_kan(
        spec,
        x.view(),
        &dataset.y,
        derive_seed(
            seed,
            &[tag_hash(SelectorKind::KanL2.id()), tag_hash("full"), tag_hash("kan_full")],
        ),
    )
}

/// Copy of the dataset with the labels of one fold's validation set shuffled
/// among themselves; that fold's training data is untouched, so its selections
/// must not move. (Shuffling all folds at once would corrupt every fold's
/// training labels, since each sample validates in exactly one fold.)
pub fn shuffle_validation_labels(
    dataset: &Dataset,
    plan: &FoldPlan,
    fold: usize,
    seed: u64,
) -> Dataset {
    let mut out = dataset.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let validation = &plan.folds[fold].validation;
    match &mut out.y {
        Target::Regression(values) => {
            let mut slice: Vec<f64> = validation.iter().map(|&i| values[i]).collect();
            slice.shuffle(&mut rng);
            for (&i, v) in validation.iter().zip(slice) {
                values[i] = v;
            }
        }
        Target::Classification { labels, .. } => {
            let mut slice: Vec<usize> = validation.iter().map(|&i| labels[i]).collect();
            slice.shuffle(&mut rng);
            for (&i, v) in validation.iter().zip(slice) {
                labels[i] = v;
            }
        }
    }
    out
}

/// Selector-fitting stage only: the selection records `run_benchmark` would
/// produce, with identical per-job seed derivation, skipping predictor
/// training. The leakage-safety check re-runs this on label-shuffled data;
/// `only_folds` restricts the work to the folds being compared.
pub fn compute_selections(
    dataset: &Dataset,
    selectors: &[SelectorSpec],
    plan: &FoldPlan,
    opts: &BenchmarkOptions,
    only_folds: Option<&[usize]>,
) -> Result<Vec<SelectionRecord>> {
    dataset.validate()?;
    let n_sources = dataset.n_sources();
    let fold_list: Vec<usize> = match only_folds {
        Some(folds) => folds.to_vec(),
        None => (0..plan.folds.len()).collect(),
    };
    let jobs: Vec<(usize, usize)> = fold_list
        .iter()
        .flat_map(|&f| (0..selectors.len()).map(move |s| (f, s)))
        .collect();
    let nested: Vec<Vec<SelectionRecord>> = jobs
        .par_iter()
        .map(|&(fold_idx, selector_idx)| {
            let spec = &selectors[selector_idx];
            let fold = &plan.folds[fold_idx];
            let x_train_raw = dataset.x.select(Axis(0), &fold.train);
            let scaler = Standardizer::fit(x_train_raw.view());
            let x_train = scaler.transform(x_train_raw.view());
            let y_train = dataset.y.select(&fold.train);
            let seed = derive_seed(opts.seed, &[tag_hash(spec.kind.id()), fold_idx as u64]);
            let retention_list: Vec<u32> = if spec.kind == SelectorKind::AllFeatures {
                vec![100]
            } else {
                opts.retentions.clone()
            };
            let Ok(importance) = fit_selector(
                spec,
                x_train.view(),
                &y_train,
                &dataset.group_of,
                n_sources,
                seed,
            ) else {
                return Vec::new();
            };
            retention_list
                .iter()
                .filter_map(|&retention| {
                    let n_k = retention_count(retention, n_sources);
                    top_k(&importance, n_k).ok().map(|sources| SelectionRecord {
                        selector: spec.kind,
                        retention,
                        fold: fold_idx,
                        sources,
                    })
                })
                .collect()
        })
        .collect();
    let mut records: Vec<SelectionRecord> = nested.into_iter().flatten().collect();
    records.sort_by_key(|s| (s.selector, s.retention, s.fold));
    Ok(records)
}
