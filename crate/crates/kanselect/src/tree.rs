//! CART decision trees and the ensembles built on them (bagged forests,
//! gradient-boosted stumps/trees).
//!
//! Splits use midpoint thresholds between sorted distinct values, maximizing
//! the weighted impurity decrease (Gini for class targets, variance for value
//! targets). Ties break toward the lowest feature index, then the lowest
//! threshold, which makes every fit deterministic given its RNG stream.
//! Zero-gain splits are allowed on impure nodes so parity problems (XOR) are
//! solvable at depth 2.

use crate::data::{Target, Task};
use crate::derive_seed;
use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Training targets for a single tree.
#[derive(Clone, Copy)]
pub enum TreeTarget<'a> {
    /// Class labels with Gini impurity; leaves predict the majority class.
    Classes {
        labels: &'a [usize],
        n_classes: usize,
    },
    /// Real values with variance impurity; leaves predict the mean.
    Values(&'a [f64]),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// A fitted CART tree plus the impurity decrease it attributed to each feature.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cart {
    nodes: Vec<Node>,
    /// Per-feature weighted impurity decrease accumulated over all splits.
    pub impurity_decrease: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Candidate features drawn per node; `None` considers all.
    pub feature_subsample: Option<usize>,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            max_depth: 8,
            min_samples_split: 2,
            min_samples_leaf: 1,
            feature_subsample: None,
        }
    }
}

struct FitContext<'a> {
    x: ArrayView2<'a, f64>,
    target: TreeTarget<'a>,
    cfg: &'a TreeConfig,
    n_total: f64,
    nodes: Vec<Node>,
    impurity_decrease: Vec<f64>,
}

impl Cart {
    /// Fit a tree on the rows listed in `indices` (duplicates allowed, so a
    /// bootstrap sample is just a multiset of indices).
    pub fn fit(
        x: ArrayView2<f64>,
        target: TreeTarget,
        indices: &[usize],
        cfg: &TreeConfig,
        rng: &mut ChaCha8Rng,
    ) -> Cart {
        let mut ctx = FitContext {
            x,
            target,
            cfg,
            n_total: indices.len() as f64,
            nodes: Vec::new(),
            impurity_decrease: vec![0.0; x.ncols()],
        };
        let mut scratch = indices.to_vec();
        grow(&mut ctx, &mut scratch, 0, rng);
        Cart {
            nodes: ctx.nodes,
            impurity_decrease: ctx.impurity_decrease,
        }
    }

    pub fn predict_row(&self, row: ArrayView1<f64>) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<f64> {
        (0..x.nrows())
            .map(|i| self.predict_row(x.row(i)))
            .collect()
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        fn depth_at(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => {
                    1 + depth_at(nodes, *left).max(depth_at(nodes, *right))
                }
            }
        }
        depth_at(&self.nodes, 0)
    }
}

/// Grow the subtree for `indices`, returning its node id.
fn grow(ctx: &mut FitContext, indices: &mut [usize], depth: usize, rng: &mut ChaCha8Rng) -> usize {
    let stats = NodeStats::gather(&ctx.target, indices);
    let can_split = depth < ctx.cfg.max_depth
        && indices.len() >= ctx.cfg.min_samples_split
        && stats.impurity > 0.0;
    if !can_split {
        let id = ctx.nodes.len();
        ctx.nodes.push(Node::Leaf {
            value: stats.leaf_value(),
        });
        return id;
    }

    let candidates = candidate_features(ctx.x.ncols(), ctx.cfg.feature_subsample, rng);
    let best = best_split(ctx, indices, &stats, &candidates);
    let Some(split) = best else {
        let id = ctx.nodes.len();
        ctx.nodes.push(Node::Leaf {
            value: stats.leaf_value(),
        });
        return id;
    };

    ctx.impurity_decrease[split.feature] += split.decrease * indices.len() as f64 / ctx.n_total;

    // Partition in place: rows with value <= threshold first.
    let mut mid = 0;
    for i in 0..indices.len() {
        if ctx.x[[indices[i], split.feature]] <= split.threshold {
            indices.swap(i, mid);
            mid += 1;
        }
    }

    let id = ctx.nodes.len();
    ctx.nodes.push(Node::Leaf { value: 0.0 }); // placeholder until children exist
    let (left_idx, right_idx) = indices.split_at_mut(mid);
    let left = grow(ctx, left_idx, depth + 1, rng);
    let right = grow(ctx, right_idx, depth + 1, rng);
    ctx.nodes[id] = Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left,
        right,
    };
    id
}

fn candidate_features(d: usize, subsample: Option<usize>, rng: &mut ChaCha8Rng) -> Vec<usize> {
    match subsample {
        Some(k) if k < d => {
            let mut all: Vec<usize> = (0..d).collect();
            // Partial Fisher-Yates; sorted afterwards so the tie rule stays
            // "lowest feature index" within the drawn subset.
            for i in 0..k {
                let j = rng.random_range(i..d);
                all.swap(i, j);
            }
            let mut chosen = all[..k].to_vec();
            chosen.sort_unstable();
            chosen
        }
        _ => (0..d).collect(),
    }
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    decrease: f64,
}

/// Impurity bookkeeping for one node.
enum NodeStats {
    Classes { counts: Vec<f64>, impurity: f64 },
    Values { sum: f64, sum_sq: f64, n: f64, impurity: f64 },
}

impl NodeStats {
    fn gather(target: &TreeTarget, indices: &[usize]) -> NodeStatsView {
        match target {
            TreeTarget::Classes { labels, n_classes } => {
                let mut counts = vec![0.0; *n_classes];
                for &i in indices {
                    counts[labels[i]] += 1.0;
                }
                let n = indices.len() as f64;
                let impurity = gini(&counts, n);
                NodeStatsView {
                    stats: NodeStats::Classes { counts, impurity },
                    impurity,
                }
            }
            TreeTarget::Values(values) => {
                let mut sum = 0.0;
                let mut sum_sq = 0.0;
                for &i in indices {
                    sum += values[i];
                    sum_sq += values[i] * values[i];
                }
                let n = indices.len() as f64;
                let impurity = variance(sum, sum_sq, n);
                NodeStatsView {
                    stats: NodeStats::Values {
                        sum,
                        sum_sq,
                        n,
                        impurity,
                    },
                    impurity,
                }
            }
        }
    }
}

struct NodeStatsView {
    stats: NodeStats,
    impurity: f64,
}

impl NodeStatsView {
    fn leaf_value(&self) -> f64 {
        match &self.stats {
            NodeStats::Classes { counts, .. } => {
                // Majority class, ties to the lowest index.
                let mut best = 0;
                for c in 1..counts.len() {
                    if counts[c] > counts[best] {
                        best = c;
                    }
                }
                best as f64
            }
            NodeStats::Values { sum, n, .. } => sum / n,
        }
    }
}

fn gini(counts: &[f64], n: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / n) * (c / n)).sum::<f64>()
}

fn variance(sum: f64, sum_sq: f64, n: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    let mean = sum / n;
    (sum_sq / n - mean * mean).max(0.0)
}

fn best_split(
    ctx: &FitContext,
    indices: &[usize],
    parent: &NodeStatsView,
    candidates: &[usize],
) -> Option<SplitChoice> {
    let n = indices.len() as f64;
    let min_leaf = ctx.cfg.min_samples_leaf;
    let mut best: Option<SplitChoice> = None;

    for &feature in candidates {
        let mut order: Vec<usize> = indices.to_vec();
        order.sort_by(|&a, &b| ctx.x[[a, feature]].total_cmp(&ctx.x[[b, feature]]));

        match &ctx.target {
            TreeTarget::Classes { labels, n_classes } => {
                let NodeStats::Classes {
                    counts: total_counts,
                    ..
                } = &parent.stats
                else {
                    unreachable!()
                };
                let mut left_counts = vec![0.0; *n_classes];
                let mut left_n = 0.0;
                for w in 0..order.len() - 1 {
                    let i = order[w];
                    left_counts[labels[i]] += 1.0;
                    left_n += 1.0;
                    let v = ctx.x[[i, feature]];
                    let v_next = ctx.x[[order[w + 1], feature]];
                    if v == v_next {
                        continue;
                    }
                    let right_n = n - left_n;
                    if (left_n as usize) < min_leaf || (right_n as usize) < min_leaf {
                        continue;
                    }
                    let right_counts: Vec<f64> = total_counts
                        .iter()
                        .zip(&left_counts)
                        .map(|(t, l)| t - l)
                        .collect();
                    let decrease = parent.impurity
                        - (left_n / n) * gini(&left_counts, left_n)
                        - (right_n / n) * gini(&right_counts, right_n);
                    consider(&mut best, feature, 0.5 * (v + v_next), decrease);
                }
            }
            TreeTarget::Values(values) => {
                let NodeStats::Values {
                    sum: total_sum,
                    sum_sq: total_sq,
                    ..
                } = &parent.stats
                else {
                    unreachable!()
                };
                let mut left_sum = 0.0;
                let mut left_sq = 0.0;
                let mut left_n = 0.0;
                for w in 0..order.len() - 1 {
                    let i = order[w];
                    left_sum += values[i];
                    left_sq += values[i] * values[i];
                    left_n += 1.0;
                    let v = ctx.x[[i, feature]];
                    let v_next = ctx.x[[order[w + 1], feature]];
                    if v == v_next {
                        continue;
                    }
                    let right_n = n - left_n;
                    if (left_n as usize) < min_leaf || (right_n as usize) < min_leaf {
                        continue;
                    }
                    let decrease = parent.impurity
                        - (left_n / n) * variance(left_sum, left_sq, left_n)
                        - (right_n / n)
                            * variance(total_sum - left_sum, total_sq - left_sq, right_n);
                    consider(&mut best, feature, 0.5 * (v + v_next), decrease);
                }
            }
        }
    }
    best
}

/// Keep the strictly better split; iteration order (features ascending,
/// thresholds ascending) implements the deterministic tie rule.
fn consider(best: &mut Option<SplitChoice>, feature: usize, threshold: f64, decrease: f64) {
    if decrease < 0.0 {
        return;
    }
    let better = match best {
        None => true,
        Some(b) => decrease > b.decrease,
    };
    if better {
        *best = Some(SplitChoice {
            feature,
            threshold,
            decrease,
        });
    }
}

/// How many candidate features each node draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSubsample {
    All,
    /// `ceil(sqrt(d))`, the classification default.
    Sqrt,
    /// `max(1, d/3)`, the regression default.
    Third,
    Fixed(usize),
}

impl FeatureSubsample {
    pub fn resolve(&self, d: usize) -> Option<usize> {
        match self {
            FeatureSubsample::All => None,
            FeatureSubsample::Sqrt => Some(((d as f64).sqrt().ceil() as usize).clamp(1, d)),
            FeatureSubsample::Third => Some((d / 3).max(1)),
            FeatureSubsample::Fixed(k) => Some((*k).clamp(1, d)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub bootstrap: bool,
    pub feature_subsample: FeatureSubsample,
    pub seed: u64,
}

impl ForestConfig {
    pub fn default_for(task: Task) -> Self {
        Self {
            n_trees: 100,
            max_depth: 8,
            bootstrap: true,
            feature_subsample: if task.is_classification() {
                FeatureSubsample::Sqrt
            } else {
                FeatureSubsample::Third
            },
            seed: 0,
        }
    }
}

/// Bagged CART ensemble.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RandomForest {
    trees: Vec<Cart>,
    task: Task,
    n_features: usize,
}

/// Bootstrap sample of size n: n draws with replacement.
pub fn bootstrap_indices(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

impl RandomForest {
    pub fn fit(x: ArrayView2<f64>, y: &Target, cfg: &ForestConfig) -> RandomForest {
        let task = y.task();
        let n = x.nrows();
        let tree_cfg = TreeConfig {
            max_depth: cfg.max_depth,
            feature_subsample: cfg.feature_subsample.resolve(x.ncols()),
            ..Default::default()
        };
        let trees: Vec<Cart> = (0..cfg.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[t as u64]));
                let indices = if cfg.bootstrap {
                    bootstrap_indices(n, &mut rng)
                } else {
                    (0..n).collect()
                };
                let target = match y {
                    Target::Classification { labels, n_classes } => TreeTarget::Classes {
                        labels,
                        n_classes: *n_classes,
                    },
                    Target::Regression(values) => TreeTarget::Values(values),
                };
                Cart::fit(x, target, &indices, &tree_cfg, &mut rng)
            })
            .collect();
        RandomForest {
            trees,
            task,
            n_features: x.ncols(),
        }
    }

    pub fn trees(&self) -> &[Cart] {
        &self.trees
    }

    pub fn task(&self) -> Task {
        self.task
    }

    /// Majority vote over trees (ties to the lowest class) for classification,
    /// mean of tree outputs for regression.
    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<f64> {
        let per_tree: Vec<Vec<f64>> = self.trees.iter().map(|t| t.predict(x)).collect();
        let n = x.nrows();
        match self.task {
            Task::Regression => (0..n)
                .map(|i| per_tree.iter().map(|p| p[i]).sum::<f64>() / per_tree.len() as f64)
                .collect(),
            Task::Classification { n_classes } => (0..n)
                .map(|i| {
                    let mut votes = vec![0usize; n_classes];
                    for p in &per_tree {
                        votes[p[i] as usize] += 1;
                    }
                    let mut best = 0;
                    for c in 1..n_classes {
                        if votes[c] > votes[best] {
                            best = c;
                        }
                    }
                    best as f64
                })
                .collect(),
        }
    }

    /// Mean decrease in impurity accumulated per feature across all trees
    /// (unnormalized; selectors sum-normalize downstream).
    pub fn impurity_importances(&self) -> Vec<f64> {
        let mut totals = vec![0.0; self.n_features];
        for tree in &self.trees {
            for (j, v) in tree.impurity_decrease.iter().enumerate() {
                totals[j] += v;
            }
        }
        for v in &mut totals {
            *v /= self.trees.len() as f64;
        }
        totals
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GbtConfig {
    pub n_rounds: usize,
    pub max_depth: usize,
    pub shrinkage: f64,
    pub seed: u64,
}

impl Default for GbtConfig {
    fn default() -> Self {
        Self {
            n_rounds: 200,
            max_depth: 3,
            shrinkage: 0.1,
            seed: 0,
        }
    }
}

/// Stagewise regression trees fit to loss gradients: squared loss for
/// regression, softmax log-loss (one tree per class per round) for
/// classification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradientBoostedTrees {
    task: Task,
    /// Initial scores: `[mean(y)]` for regression, zeros for classification.
    init: Vec<f64>,
    /// `rounds × output_dim` trees.
    rounds: Vec<Vec<Cart>>,
    shrinkage: f64,
    /// Training loss after the init and after each round.
    pub training_loss: Vec<f64>,
}

impl GradientBoostedTrees {
    pub fn task(&self) -> Task {
        self.task
    }

    pub fn fit(x: ArrayView2<f64>, y: &Target, cfg: &GbtConfig) -> GradientBoostedTrees {
        let task = y.task();
        let n = x.nrows();
        let tree_cfg = TreeConfig {
            max_depth: cfg.max_depth,
            feature_subsample: None,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let all: Vec<usize> = (0..n).collect();

        match y {
            Target::Regression(targets) => {
                let mean = targets.iter().sum::<f64>() / n as f64;
                let mut scores = vec![mean; n];
                let mut rounds = Vec::with_capacity(cfg.n_rounds);
                let mut training_loss = vec![mse(&scores, targets)];
                for _ in 0..cfg.n_rounds {
                    let residuals: Vec<f64> =
                        targets.iter().zip(&scores).map(|(t, s)| t - s).collect();
                    let tree =
                        Cart::fit(x, TreeTarget::Values(&residuals), &all, &tree_cfg, &mut rng);
                    for i in 0..n {
                        scores[i] += cfg.shrinkage
                            * tree.predict_row(x.row(i));
                    }
                    training_loss.push(mse(&scores, targets));
                    rounds.push(vec![tree]);
                }
                GradientBoostedTrees {
                    task,
                    init: vec![mean],
                    rounds,
                    shrinkage: cfg.shrinkage,
                    training_loss,
                }
            }
            Target::Classification { labels, n_classes } => {
                let c = *n_classes;
                let mut scores = Array2::<f64>::zeros((n, c));
                let mut rounds = Vec::with_capacity(cfg.n_rounds);
                let mut training_loss = vec![log_loss(&scores, labels)];
                for _ in 0..cfg.n_rounds {
                    let probs = softmax_rows(&scores);
                    let mut round_trees = Vec::with_capacity(c);
                    for class in 0..c {
                        let residuals: Vec<f64> = (0..n)
                            .map(|i| {
                                let t = if labels[i] == class { 1.0 } else { 0.0 };
                                t - probs[[i, class]]
                            })
                            .collect();
                        let tree = Cart::fit(
                            x,
                            TreeTarget::Values(&residuals),
                            &all,
                            &tree_cfg,
                            &mut rng,
                        );
                        for i in 0..n {
                            scores[[i, class]] += cfg.shrinkage
                                * tree.predict_row(x.row(i));
                        }
                        round_trees.push(tree);
                    }
                    training_loss.push(log_loss(&scores, labels));
                    rounds.push(round_trees);
                }
                GradientBoostedTrees {
                    task,
                    init: vec![0.0; c],
                    rounds,
                    shrinkage: cfg.shrinkage,
                    training_loss,
                }
            }
        }
    }

    /// Raw additive scores (regression value or per-class logits).
    pub fn decision_scores(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let n = x.nrows();
        let m = self.init.len();
        let mut scores = Array2::zeros((n, m));
        for i in 0..n {
            for (j, init) in self.init.iter().enumerate() {
                scores[[i, j]] = *init;
            }
        }
        for round in &self.rounds {
            for (j, tree) in round.iter().enumerate() {
                for i in 0..n {
                    scores[[i, j]] += self.shrinkage
                        * tree.predict_row(x.row(i));
                }
            }
        }
        scores
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<f64> {
        let scores = self.decision_scores(x);
        match self.task {
            Task::Regression => scores.column(0).to_vec(),
            Task::Classification { n_classes } => (0..x.nrows())
                .map(|i| {
                    let mut best = 0;
                    for c in 1..n_classes {
                        if scores[[i, c]] > scores[[i, best]] {
                            best = c;
                        }
                    }
                    best as f64
                })
                .collect(),
        }
    }
}

fn mse(pred: &[f64], target: &[f64]) -> f64 {
    pred.iter()
        .zip(target)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / pred.len() as f64
}

fn log_loss(scores: &Array2<f64>, labels: &[usize]) -> f64 {
    let n = scores.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        let row = scores.row(i);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = row.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
        acc += lse - scores[[i, labels[i]]];
    }
    acc / n as f64
}

fn softmax_rows(scores: &Array2<f64>) -> Array2<f64> {
    let mut out = scores.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut denom = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            denom += *v;
        }
        for v in row.iter_mut() {
            *v /= denom;
        }
    }
    out
}
