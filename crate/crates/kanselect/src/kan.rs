//! KAN layers and models: forward pass, analytic gradients, and training.
//!
//! A layer maps `x ∈ R^d` to `y = W_base·φ(x) + Σ_j W_spline^(j)·b_j(x_j) ∈ R^m`,
//! where `b_j` is feature `j`'s B-spline basis expansion. In batch form the
//! layer is `Y = Φ(X)·W_baseᵀ + B(X)·W_splineᵀ` with the spline blocks flattened
//! into one `m×(d·K)` matrix. Models stack one or two layers; everything is
//! trained end-to-end by gradient descent on analytic gradients.

use crate::data::{Target, Task};
use crate::error::{Error, Result};
use crate::spline::{self, KnotVector};
use ndarray::{Array2, ArrayView2, Axis};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Component-wise activation applied to a layer's raw input on the base path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Identity,
    Silu,
}

impl Activation {
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Silu => x * sigmoid(x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Silu => {
                let s = sigmoid(x);
                s * (1.0 + x * (1.0 - s))
            }
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// One KAN layer: base weights, flattened spline weights, per-feature knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KanLayer {
    /// m×d base weight matrix.
    w_base: Array2<f64>,
    /// m×(d·K) spline weights; columns `j·K .. (j+1)·K` form feature j's block.
    w_spline: Array2<f64>,
    knots: Vec<KnotVector>,
    activation: Activation,
}

impl KanLayer {
    pub fn input_dim(&self) -> usize {
        self.w_base.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.w_base.nrows()
    }

    /// Basis functions per feature.
    pub fn basis_size(&self) -> usize {
        self.knots[0].num_basis()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn knots(&self) -> &[KnotVector] {
        &self.knots
    }

    pub fn w_base(&self) -> &Array2<f64> {
        &self.w_base
    }

    pub fn w_base_mut(&mut self) -> &mut Array2<f64> {
        &mut self.w_base
    }

    pub fn w_spline(&self) -> &Array2<f64> {
        &self.w_spline
    }

    pub fn w_spline_mut(&mut self) -> &mut Array2<f64> {
        &mut self.w_spline
    }

    /// View of feature `j`'s m×K spline block.
    pub fn spline_block(&self, j: usize) -> Result<ArrayView2<f64>> {
        let d = self.input_dim();
        if j >= d {
            return Err(Error::IndexOutOfRange { index: j, len: d });
        }
        let k = self.basis_size();
        Ok(self.w_spline.slice(ndarray::s![.., j * k..(j + 1) * k]))
    }

    /// Zero feature `j`'s base column and spline block in place.
    pub(crate) fn zero_feature(&mut self, j: usize) -> Result<()> {
        let d = self.input_dim();
        if j >= d {
            return Err(Error::IndexOutOfRange { index: j, len: d });
        }
        self.w_base.column_mut(j).fill(0.0);
        let k = self.basis_size();
        self.w_spline
            .slice_mut(ndarray::s![.., j * k..(j + 1) * k])
            .fill(0.0);
        Ok(())
    }

    fn trace(&self, input: &Array2<f64>) -> Result<LayerTrace> {
        if input.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                what: "input columns",
                expected: self.input_dim(),
                got: input.ncols(),
            });
        }
        let phi = input.mapv(|v| self.activation.apply(v));
        let phi_deriv = input.mapv(|v| self.activation.derivative(v));
        let (basis, basis_deriv) =
            spline::expand_batch_with_derivatives(&self.knots, input.view())?;
        let output = phi.dot(&self.w_base.t()) + basis.dot(&self.w_spline.t());
        Ok(LayerTrace {
            input: input.clone(),
            phi,
            phi_deriv,
            basis,
            basis_deriv,
            output,
        })
    }

    /// Recompute the output from an existing trace's cached expansions.
    fn output_from(&self, trace: &LayerTrace) -> Array2<f64> {
        trace.phi.dot(&self.w_base.t()) + trace.basis.dot(&self.w_spline.t())
    }

    /// Backpropagate `g = ∂L/∂output` through the layer's input paths:
    /// base path via φ', spline path via the basis derivatives.
    fn input_gradient(&self, trace: &LayerTrace, g: &Array2<f64>) -> Array2<f64> {
        let mut gx = g.dot(&self.w_base) * &trace.phi_deriv;
        let spread = g.dot(&self.w_spline) * &trace.basis_deriv; // n×(d·K)
        let k = self.basis_size();
        for j in 0..self.input_dim() {
            let block = spread.slice(ndarray::s![.., j * k..(j + 1) * k]);
            let summed = block.sum_axis(Axis(1));
            let mut col = gx.column_mut(j);
            col += &summed;
        }
        gx
    }
}

/// Per-layer activations recorded by the forward pass.
#[derive(Debug, Clone)]
pub struct LayerTrace {
    pub input: Array2<f64>,
    pub phi: Array2<f64>,
    pub phi_deriv: Array2<f64>,
    pub basis: Array2<f64>,
    pub basis_deriv: Array2<f64>,
    pub output: Array2<f64>,
}

/// Everything the backward pass needs, recorded layer by layer.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub layers: Vec<LayerTrace>,
}

impl ForwardTrace {
    pub fn output(&self) -> &Array2<f64> {
        &self.layers.last().expect("at least one layer").output
    }
}

/// Gradients with the same shapes as the model parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub layers: Vec<LayerGradients>,
}

#[derive(Debug, Clone)]
pub struct LayerGradients {
    pub w_base: Array2<f64>,
    pub w_spline: Array2<f64>,
}

/// Architecture hyperparameters for building a model from training data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KanSpec {
    /// `None` builds a single layer d→out; `Some(h)` builds d→h→out.
    pub hidden: Option<usize>,
    pub degree: usize,
    pub grid_size: usize,
    pub activation: Activation,
}

impl Default for KanSpec {
    fn default() -> Self {
        Self {
            hidden: None,
            degree: 3,
            grid_size: 5,
            activation: Activation::Silu,
        }
    }
}

/// Training hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    /// 0 means full batch.
    pub batch_size: usize,
    pub l2_penalty: f64,
    pub momentum: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 300,
            learning_rate: 0.1,
            batch_size: 0,
            l2_penalty: 0.0,
            momentum: 0.0,
            seed: 0,
        }
    }
}

/// A stack of one or two KAN layers plus the task it was built for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KanModel {
    layers: Vec<KanLayer>,
    task: Task,
}

impl KanModel {
    /// Initialize a model for `task` with knots fitted to the training columns.
    ///
    /// Layer-1 knot domains cover each feature's observed `[min, max]`; hidden
    /// layer domains cover the initial layer-1 output range with headroom for
    /// drift during training. Base weights start at `U(-1/√d, 1/√d)`, spline
    /// weights at `0.1/√K · U(-1, 1)` so the base path dominates early.
    pub fn init(
        task: Task,
        x_train: ArrayView2<f64>,
        spec: &KanSpec,
        seed: u64,
    ) -> Result<KanModel> {
        let d = x_train.ncols();
        if d == 0 || x_train.nrows() == 0 {
            return Err(Error::InvalidSize {
                what: "training matrix",
                min: 1,
                got: 0,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let out = task.output_dim();

        let first_out = spec.hidden.unwrap_or(out);
        let knots1 = knots_for_columns(x_train, spec)?;
        let layer1 = init_layer(first_out, knots1, spec.activation, &mut rng);

        let mut layers = vec![layer1];
        if spec.hidden.is_some() {
            let trace = layers[0].trace(&x_train.to_owned())?;
            let knots2 = hidden_knots(trace.output.view(), spec)?;
            layers.push(init_layer(out, knots2, spec.activation, &mut rng));
        }

        Ok(KanModel { layers, task })
    }

    pub fn layers(&self) -> &[KanLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [KanLayer] {
        &mut self.layers
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("at least one layer").output_dim()
    }

    /// Batched forward pass returning raw outputs (logits for classification)
    /// and the full trace.
    pub fn forward(&self, x: ArrayView2<f64>) -> Result<(Array2<f64>, ForwardTrace)> {
        let mut input = x.to_owned();
        let mut traces = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let t = layer.trace(&input)?;
            input = t.output.clone();
            traces.push(t);
        }
        Ok((input, ForwardTrace { layers: traces }))
    }

    /// Task loss plus `l2_penalty · Σ w²` over all weights when nonzero.
    pub fn loss(&self, x: ArrayView2<f64>, y: &Target, l2_penalty: f64) -> Result<f64> {
        let (out, _) = self.forward(x)?;
        let base = self.loss_from_output(out.view(), y)?;
        Ok(base + l2_penalty * self.weight_square_sum())
    }

    /// Task loss given precomputed outputs: MSE for regression, mean softmax
    /// cross-entropy for classification.
    pub fn loss_from_output(&self, out: ArrayView2<f64>, y: &Target) -> Result<f64> {
        let n = out.nrows();
        if n == 0 {
            return Err(Error::EmptyEvaluationSet);
        }
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                what: "target rows",
                expected: n,
                got: y.len(),
            });
        }
        match (&self.task, y) {
            (Task::Regression, Target::Regression(t)) => {
                let mut acc = 0.0;
                for i in 0..n {
                    let r = out[[i, 0]] - t[i];
                    acc += r * r;
                }
                Ok(acc / n as f64)
            }
            (Task::Classification { n_classes }, Target::Classification { labels, .. }) => {
                let c = *n_classes;
                let mut acc = 0.0;
                for i in 0..n {
                    if labels[i] >= c {
                        return Err(Error::LabelOutOfRange {
                            label: labels[i],
                            n_classes: c,
                        });
                    }
                    let row = out.row(i);
                    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let lse = row.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
                    acc += lse - out[[i, labels[i]]];
                }
                Ok(acc / n as f64)
            }
            _ => Err(Error::TaskMismatch("model task does not match target kind")),
        }
    }

    fn weight_square_sum(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| {
                l.w_base.iter().map(|w| w * w).sum::<f64>()
                    + l.w_spline.iter().map(|w| w * w).sum::<f64>()
            })
            .sum()
    }

    /// `∂L/∂output` for the mean task loss.
    fn output_gradient(&self, out: &Array2<f64>, y: &Target) -> Result<Array2<f64>> {
        let n = out.nrows();
        match (&self.task, y) {
            (Task::Regression, Target::Regression(t)) => {
                let mut g = out.clone();
                for i in 0..n {
                    g[[i, 0]] = 2.0 * (out[[i, 0]] - t[i]) / n as f64;
                }
                Ok(g)
            }
            (Task::Classification { n_classes }, Target::Classification { labels, .. }) => {
                let c = *n_classes;
                let mut g = Array2::zeros((n, c));
                for i in 0..n {
                    if labels[i] >= c {
                        return Err(Error::LabelOutOfRange {
                            label: labels[i],
                            n_classes: c,
                        });
                    }
                    let row = out.row(i);
                    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let denom: f64 = row.iter().map(|v| (v - max).exp()).sum();
                    for p in 0..c {
                        let soft = (out[[i, p]] - max).exp() / denom;
                        g[[i, p]] = (soft - if labels[i] == p { 1.0 } else { 0.0 }) / n as f64;
                    }
                }
                Ok(g)
            }
            _ => Err(Error::TaskMismatch("model task does not match target kind")),
        }
    }

    /// Analytic gradients of `loss(x, y, l2_penalty)` for every parameter.
    pub fn backward(
        &self,
        x: ArrayView2<f64>,
        y: &Target,
        l2_penalty: f64,
    ) -> Result<(f64, Gradients)> {
        let (out, trace) = self.forward(x)?;
        let loss = self.loss_from_output(out.view(), y)? + l2_penalty * self.weight_square_sum();
        let g_out = self.output_gradient(&out, y)?;
        let grads = self.backward_from_trace(&trace, g_out, l2_penalty);
        Ok((loss, grads))
    }

    fn backward_from_trace(
        &self,
        trace: &ForwardTrace,
        g_out: Array2<f64>,
        l2_penalty: f64,
    ) -> Gradients {
        let mut layer_grads: Vec<LayerGradients> = Vec::with_capacity(self.layers.len());
        let mut g = g_out;
        for (layer, t) in self.layers.iter().zip(&trace.layers).rev() {
            let mut gw_base = g.t().dot(&t.phi);
            let mut gw_spline = g.t().dot(&t.basis);
            if l2_penalty != 0.0 {
                gw_base += &(2.0 * l2_penalty * &layer.w_base);
                gw_spline += &(2.0 * l2_penalty * &layer.w_spline);
            }
            layer_grads.push(LayerGradients {
                w_base: gw_base,
                w_spline: gw_spline,
            });
            g = layer.input_gradient(t, &g);
        }
        layer_grads.reverse();
        Gradients {
            layers: layer_grads,
        }
    }

    /// Per-sample gradients `∂f/∂x_i` of the scalar model output.
    ///
    /// Regression reads the single output; classification reads the largest
    /// logit per sample (ties broken by lowest class index).
    pub fn input_gradients(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        let (out, trace) = self.forward(x)?;
        let n = out.nrows();
        let m = out.ncols();
        let mut g = Array2::zeros((n, m));
        match self.task {
            Task::Regression => g.column_mut(0).fill(1.0),
            Task::Classification { .. } => {
                for i in 0..n {
                    let mut best = 0;
                    for p in 1..m {
                        if out[[i, p]] > out[[i, best]] {
                            best = p;
                        }
                    }
                    g[[i, best]] = 1.0;
                }
            }
        }
        for (layer, t) in self.layers.iter().zip(&trace.layers).rev() {
            g = layer.input_gradient(t, &g);
        }
        Ok(g)
    }
}

fn knots_for_columns(x: ArrayView2<f64>, spec: &KanSpec) -> Result<Vec<KnotVector>> {
    x.axis_iter(Axis(1))
        .map(|col| {
            let values: Vec<f64> = col.to_vec();
            spline::build_knots_from_samples(&values, spec.grid_size, spec.degree)
        })
        .collect()
}

/// Hidden-layer knots over the initial output range, widened since training
/// shifts hidden activations; clamping handles anything that still escapes.
fn hidden_knots(outputs: ArrayView2<f64>, spec: &KanSpec) -> Result<Vec<KnotVector>> {
    outputs
        .axis_iter(Axis(1))
        .map(|col| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &v in col {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if lo >= hi {
                lo -= 0.5;
                hi += 0.5;
            }
            let margin = 0.25 * (hi - lo) + 0.5;
            spline::build_knots(lo - margin, hi + margin, spec.grid_size, spec.degree)
        })
        .collect()
}

fn init_layer(
    m: usize,
    knots: Vec<KnotVector>,
    activation: Activation,
    rng: &mut ChaCha8Rng,
) -> KanLayer {
    let d = knots.len();
    let k = knots[0].num_basis();
    let base_scale = 1.0 / (d as f64).sqrt();
    let spline_scale = 0.1 / (k as f64).sqrt();
    let w_base = Array2::from_shape_fn((m, d), |_| rng.random_range(-base_scale..base_scale));
    let w_spline =
        Array2::from_shape_fn((m, d * k), |_| rng.random_range(-spline_scale..spline_scale));
    KanLayer {
        w_base,
        w_spline,
        knots,
        activation,
    }
}

/// Gradient-descent training with an epoch-level safeguard: an epoch that
/// raises the full-data training loss is rolled back and the learning rate
/// halved, so the recorded loss history is non-increasing.
///
/// Layer-1 basis expansions depend only on the fixed training matrix and are
/// computed once up front.
pub fn train(
    model: KanModel,
    x: ArrayView2<f64>,
    y: &Target,
    cfg: &TrainConfig,
) -> Result<(KanModel, Vec<f64>)> {
    if cfg.epochs < 1 {
        return Err(Error::InvalidSize {
            what: "epochs",
            min: 1,
            got: cfg.epochs,
        });
    }
    if !(cfg.learning_rate > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "learning_rate must be positive, got {}",
            cfg.learning_rate
        )));
    }
    let n = x.nrows();
    if n == 0 {
        return Err(Error::EmptyEvaluationSet);
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            what: "target rows",
            expected: n,
            got: y.len(),
        });
    }

    let mut model = model;
    let x_owned = x.to_owned();
    // Expansions of the fixed training input never change across epochs.
    let l1_cache = model.layers[0].trace(&x_owned)?;

    let full_loss = |m: &KanModel| -> Result<f64> {
        let mut out = m.layers[0].output_from(&l1_cache);
        for layer in &m.layers[1..] {
            out = layer.trace(&out)?.output;
        }
        Ok(m.loss_from_output(out.view(), y)? + cfg.l2_penalty * m.weight_square_sum())
    };

    let mut lr = cfg.learning_rate;
    let mut velocity: Option<Vec<LayerGradients>> = None;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut prev_loss = full_loss(&model)?;
    if !prev_loss.is_finite() {
        return Err(Error::NonFiniteLoss { epoch: 0 });
    }
    let mut history = Vec::with_capacity(cfg.epochs + 1);
    history.push(prev_loss);

    let full_batch = cfg.batch_size == 0 || cfg.batch_size >= n;

    for epoch in 1..=cfg.epochs {
        let snapshot = model.clone();
        let velocity_snapshot = velocity.clone();

        if full_batch {
            let trace = trace_with_cache(&model, &l1_cache)?;
            let g_out = model.output_gradient(trace.output(), y)?;
            let grads = model.backward_from_trace(&trace, g_out, cfg.l2_penalty);
            apply_step(&mut model, &grads, lr, cfg.momentum, &mut velocity);
        } else {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            for chunk in order.chunks(cfg.batch_size) {
                let xb = x_owned.select(Axis(0), chunk);
                let yb = y.select(chunk);
                let (_, grads) = model.backward(xb.view(), &yb, cfg.l2_penalty)?;
                apply_step(&mut model, &grads, lr, cfg.momentum, &mut velocity);
            }
        }

        let loss = full_loss(&model)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        if loss > prev_loss {
            model = snapshot;
            velocity = velocity_snapshot;
            lr *= 0.5;
            history.push(prev_loss);
        } else {
            prev_loss = loss;
            history.push(loss);
        }
    }

    Ok((model, history))
}

/// Full trace reusing the precomputed layer-1 expansions.
fn trace_with_cache(model: &KanModel, l1_cache: &LayerTrace) -> Result<ForwardTrace> {
    let mut first = l1_cache.clone();
    first.output = model.layers[0].output_from(l1_cache);
    let mut traces = vec![first];
    for layer in &model.layers[1..] {
        let input = traces.last().expect("nonempty").output.clone();
        traces.push(layer.trace(&input)?);
    }
    Ok(ForwardTrace { layers: traces })
}

fn apply_step(
    model: &mut KanModel,
    grads: &Gradients,
    lr: f64,
    momentum: f64,
    velocity: &mut Option<Vec<LayerGradients>>,
) {
    if momentum == 0.0 {
        for (layer, g) in model.layers.iter_mut().zip(&grads.layers) {
            layer.w_base.scaled_add(-lr, &g.w_base);
            layer.w_spline.scaled_add(-lr, &g.w_spline);
        }
        return;
    }
    let vel = velocity.get_or_insert_with(|| {
        grads
            .layers
            .iter()
            .map(|g| LayerGradients {
                w_base: Array2::zeros(g.w_base.dim()),
                w_spline: Array2::zeros(g.w_spline.dim()),
            })
            .collect()
    });
    for ((layer, g), v) in model
        .layers
        .iter_mut()
        .zip(&grads.layers)
        .zip(vel.iter_mut())
    {
        v.w_base = momentum * &v.w_base - lr * &g.w_base;
        v.w_spline = momentum * &v.w_spline - lr * &g.w_spline;
        layer.w_base += &v.w_base;
        layer.w_spline += &v.w_spline;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn random_matrix(rows: usize, cols: usize, scale: f64, rng: &mut ChaCha8Rng) -> Array2<f64> {
        Array2::from_shape_fn((rows, cols), |_| rng.random_range(-scale..scale))
    }

    /// Random model over [-2, 2]^d inputs with knots covering [-3, 3], so
    /// finite-difference probes never cross the clamping boundary.
    fn random_model(
        task: Task,
        d: usize,
        hidden: Option<usize>,
        grid: usize,
        seed: u64,
    ) -> KanModel {
        let spec = KanSpec {
            hidden,
            degree: 3,
            grid_size: grid,
            activation: Activation::Silu,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut anchor = Array2::zeros((2, d));
        for j in 0..d {
            anchor[[0, j]] = -3.0;
            anchor[[1, j]] = 3.0;
        }
        let mut model = KanModel::init(task, anchor.view(), &spec, seed).unwrap();
        // Re-randomize weights at a livelier scale than init for gradient tests.
        for layer in model.layers_mut() {
            let (m, dims) = layer.w_base().dim();
            *layer.w_base_mut() = random_matrix(m, dims, 0.8, &mut rng);
            let (m, dk) = layer.w_spline().dim();
            *layer.w_spline_mut() = random_matrix(m, dk, 0.5, &mut rng);
        }
        model
    }

    fn random_inputs(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
        Array2::from_shape_fn((n, d), |_| rng.random_range(-2.0..2.0))
    }

    fn random_target(task: Task, n: usize, rng: &mut ChaCha8Rng) -> Target {
        match task {
            Task::Regression => {
                Target::Regression((0..n).map(|_| rng.random_range(-2.0..2.0)).collect())
            }
            Task::Classification { n_classes } => Target::Classification {
                labels: (0..n).map(|_| rng.random_range(0..n_classes)).collect(),
                n_classes,
            },
        }
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / (a.abs() + b.abs()).max(1e-6)
    }

    /// Central finite difference of the loss along one parameter, the
    /// independent oracle for backward().
    fn fd_param_grad(
        model: &KanModel,
        x: ArrayView2<f64>,
        y: &Target,
        l2: f64,
        layer: usize,
        spline: bool,
        idx: (usize, usize),
        h: f64,
    ) -> f64 {
        let mut plus = model.clone();
        let mut minus = model.clone();
        {
            let w = if spline {
                plus.layers_mut()[layer].w_spline_mut()
            } else {
                plus.layers_mut()[layer].w_base_mut()
            };
            w[[idx.0, idx.1]] += h;
        }
        {
            let w = if spline {
                minus.layers_mut()[layer].w_spline_mut()
            } else {
                minus.layers_mut()[layer].w_base_mut()
            };
            w[[idx.0, idx.1]] -= h;
        }
        (plus.loss(x, y, l2).unwrap() - minus.loss(x, y, l2).unwrap()) / (2.0 * h)
    }

    #[test]
    fn zero_weights_give_zero_output() {
        let mut model = random_model(Task::Regression, 3, None, 4, 1);
        for layer in model.layers_mut() {
            layer.w_base_mut().fill(0.0);
            layer.w_spline_mut().fill(0.0);
        }
        let x = array![[0.1, -0.5, 1.0], [2.0, 0.0, -1.0]];
        let (out, _) = model.forward(x.view()).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_configuration_reproduces_input() {
        let spec = KanSpec {
            hidden: None,
            degree: 2,
            grid_size: 3,
            activation: Activation::Identity,
        };
        let x = array![[0.2, -0.4], [1.5, 0.9], [-1.0, 0.0]];
        let mut model =
            KanModel::init(Task::Classification { n_classes: 2 }, x.view(), &spec, 7).unwrap();
        model.layers_mut()[0].w_spline_mut().fill(0.0);
        model.layers_mut()[0].w_base_mut().fill(0.0);
        model.layers_mut()[0].w_base_mut()[[0, 0]] = 1.0;
        model.layers_mut()[0].w_base_mut()[[1, 1]] = 1.0;
        let (out, _) = model.forward(x.view()).unwrap();
        assert_abs_diff_eq!(out[[0, 0]], 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(out[[1, 1]], 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(out[[2, 0]], -1.0, epsilon = 1e-15);
    }

    /// Naive per-sample, per-term summation of the layer equation; the
    /// independent oracle for the batched matrix form.
    fn naive_forward(model: &KanModel, x: &Array2<f64>) -> Array2<f64> {
        let mut input = x.clone();
        for layer in model.layers() {
            let n = input.nrows();
            let m = layer.output_dim();
            let k = layer.basis_size();
            let mut out = Array2::zeros((n, m));
            for i in 0..n {
                for p in 0..m {
                    let mut acc = 0.0;
                    for j in 0..layer.input_dim() {
                        acc += layer.w_base()[[p, j]] * layer.activation().apply(input[[i, j]]);
                        let ev = layer.knots()[j].eval(input[[i, j]]);
                        for b in 0..k {
                            acc += layer.w_spline()[[p, j * k + b]] * ev.values[b];
                        }
                    }
                    out[[i, p]] = acc;
                }
            }
            input = out;
        }
        input
    }

    #[test]
    fn batched_forward_matches_naive_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..3 {
            let model = random_model(Task::Classification { n_classes: 2 }, 2, None, 1, seed);
            let x = random_inputs(3, 2, &mut rng);
            let (out, _) = model.forward(x.view()).unwrap();
            let naive = naive_forward(&model, &x);
            for (a, b) in out.iter().zip(naive.iter()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn perfect_predictions_give_zero_loss_and_uniform_logits_give_ln_c() {
        let model = random_model(Task::Regression, 2, None, 3, 2);
        let x = array![[0.3, -0.3], [1.0, 0.5]];
        let (out, _) = model.forward(x.view()).unwrap();
        let y = Target::Regression(out.column(0).to_vec());
        assert_abs_diff_eq!(model.loss(x.view(), &y, 0.0).unwrap(), 0.0, epsilon = 1e-12);

        let mut clf = random_model(Task::Classification { n_classes: 4 }, 2, None, 3, 3);
        for layer in clf.layers_mut() {
            layer.w_base_mut().fill(0.0);
            layer.w_spline_mut().fill(0.0);
        }
        let y = Target::Classification {
            labels: vec![0, 3],
            n_classes: 4,
        };
        let loss = clf.loss(x.view(), &y, 0.0).unwrap();
        assert_abs_diff_eq!(loss, (4.0_f64).ln(), epsilon = 1e-12);
    }

    #[test]
    fn label_out_of_range_is_rejected() {
        let model = random_model(Task::Classification { n_classes: 2 }, 2, None, 3, 4);
        let x = array![[0.0, 0.0]];
        let y = Target::Classification {
            labels: vec![2],
            n_classes: 2,
        };
        assert!(matches!(
            model.loss(x.view(), &y, 0.0),
            Err(Error::LabelOutOfRange { .. })
        ));
    }

    #[test]
    fn zero_model_zero_targets_give_zero_gradients() {
        let mut model = random_model(Task::Regression, 3, None, 4, 6);
        for layer in model.layers_mut() {
            layer.w_base_mut().fill(0.0);
            layer.w_spline_mut().fill(0.0);
        }
        let x = array![[0.1, 0.2, 0.3], [-0.5, 0.0, 1.0]];
        let y = Target::Regression(vec![0.0, 0.0]);
        let (_, grads) = model.backward(x.view(), &y, 0.0).unwrap();
        for g in &grads.layers {
            assert!(g.w_base.iter().all(|&v| v == 0.0));
            assert!(g.w_spline.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn parameter_gradients_match_finite_differences() {
        let h = 1e-5;
        let cases: Vec<(Task, Option<usize>)> = vec![
            (Task::Regression, None),
            (Task::Regression, Some(4)),
            (Task::Classification { n_classes: 3 }, None),
            (Task::Classification { n_classes: 2 }, Some(3)),
        ];
        for (case_idx, (task, hidden)) in cases.into_iter().enumerate() {
            let seed = 100 + case_idx as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = 3;
            let model = random_model(task, d, hidden, 3, seed);
            let x = random_inputs(6, d, &mut rng);
            let y = random_target(task, 6, &mut rng);
            let l2 = if case_idx % 2 == 0 { 0.0 } else { 1e-3 };
            let (_, grads) = model.backward(x.view(), &y, l2).unwrap();
            let mut max_rel = 0.0_f64;
            for (li, lg) in grads.layers.iter().enumerate() {
                for ((r, c), &g) in lg.w_base.indexed_iter() {
                    let fd = fd_param_grad(&model, x.view(), &y, l2, li, false, (r, c), h);
                    max_rel = max_rel.max(rel_err(g, fd));
                }
                for ((r, c), &g) in lg.w_spline.indexed_iter() {
                    let fd = fd_param_grad(&model, x.view(), &y, l2, li, true, (r, c), h);
                    max_rel = max_rel.max(rel_err(g, fd));
                }
            }
            assert!(max_rel < 1e-4, "case {case_idx}: max rel err {max_rel}");
        }
    }

    #[test]
    fn duplicated_batch_leaves_mean_gradients_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let model = random_model(Task::Regression, 3, None, 4, 8);
        let x = random_inputs(5, 3, &mut rng);
        let y = Target::Regression((0..5).map(|_| rng.random_range(-1.0..1.0)).collect());
        let (_, g1) = model.backward(x.view(), &y, 0.0).unwrap();

        let doubled = ndarray::concatenate![Axis(0), x, x];
        let mut y2 = y.regression_values().unwrap().to_vec();
        y2.extend_from_slice(y.regression_values().unwrap());
        let (_, g2) = model
            .backward(doubled.view(), &Target::Regression(y2), 0.0)
            .unwrap();
        for (a, b) in g1.layers.iter().zip(&g2.layers) {
            for (x1, x2) in a.w_base.iter().zip(b.w_base.iter()) {
                assert_abs_diff_eq!(x1, x2, epsilon = 1e-10);
            }
            for (x1, x2) in a.w_spline.iter().zip(b.w_spline.iter()) {
                assert_abs_diff_eq!(x1, x2, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn linear_configuration_input_gradient_is_constant() {
        let spec = KanSpec {
            hidden: None,
            degree: 3,
            grid_size: 4,
            activation: Activation::Identity,
        };
        let x = array![[0.5, 0.5, 0.5], [-2.0, 1.0, 0.0], [1.4, -0.7, 2.0]];
        let mut model = KanModel::init(Task::Regression, x.view(), &spec, 1).unwrap();
        model.layers_mut()[0].w_spline_mut().fill(0.0);
        model.layers_mut()[0].w_base_mut().fill(0.0);
        model.layers_mut()[0].w_base_mut()[[0, 0]] = 3.0;
        let grads = model.input_gradients(x.view()).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(grads[[i, 0]], 3.0, epsilon = 1e-12);
            assert_abs_diff_eq!(grads[[i, 1]], 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(grads[[i, 2]], 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn input_gradients_match_finite_differences() {
        let h = 1e-5;
        for seed in 0..4 {
            let task = if seed % 2 == 0 {
                Task::Regression
            } else {
                Task::Classification { n_classes: 3 }
            };
            let hidden = if seed < 2 { None } else { Some(4) };
            let model = random_model(task, 4, hidden, 3, 200 + seed);
            let mut rng = ChaCha8Rng::seed_from_u64(300 + seed);
            let x = random_inputs(5, 4, &mut rng);
            let grads = model.input_gradients(x.view()).unwrap();

            // The oracle differentiates the scalar the op is defined on: the
            // single output for regression, the (frozen) argmax logit per
            // sample for classification.
            let (out, _) = model.forward(x.view()).unwrap();
            let mut max_rel = 0.0_f64;
            for i in 0..x.nrows() {
                let target_class = match task {
                    Task::Regression => 0,
                    Task::Classification { .. } => {
                        let row = out.row(i);
                        let mut best = 0;
                        for p in 1..row.len() {
                            if row[p] > row[best] {
                                best = p;
                            }
                        }
                        best
                    }
                };
                for j in 0..x.ncols() {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[[i, j]] += h;
                    xm[[i, j]] -= h;
                    let (op, _) = model.forward(xp.view()).unwrap();
                    let (om, _) = model.forward(xm.view()).unwrap();
                    let fd = (op[[i, target_class]] - om[[i, target_class]]) / (2.0 * h);
                    max_rel = max_rel.max(rel_err(grads[[i, j]], fd));
                }
            }
            assert!(max_rel < 1e-4, "seed {seed}: max rel err {max_rel}");
        }
    }

    #[test]
    fn duplicate_rows_get_duplicate_input_gradients() {
        let model = random_model(Task::Regression, 3, Some(4), 3, 9);
        let x = array![[0.3, -0.2, 1.1], [0.3, -0.2, 1.1]];
        let g = model.input_gradients(x.view()).unwrap();
        for j in 0..3 {
            assert_eq!(g[[0, j]], g[[1, j]]);
        }
    }

    #[test]
    fn training_fits_noiseless_linear_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 80;
        let x = random_inputs(n, 3, &mut rng);
        let y = Target::Regression(x.column(0).iter().map(|v| 2.0 * v).collect());
        let spec = KanSpec::default();
        let model = KanModel::init(Task::Regression, x.view(), &spec, 21).unwrap();
        let cfg = TrainConfig {
            epochs: 200,
            learning_rate: 0.3,
            ..Default::default()
        };
        let (trained, history) = train(model, x.view(), &y, &cfg).unwrap();
        let final_loss = trained.loss(x.view(), &y, 0.0).unwrap();
        assert!(final_loss < 0.01, "final training MSE {final_loss}");
        assert!(history.last().unwrap() <= history.first().unwrap());
        assert!(history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn training_separates_linear_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let n = 100;
        let mut x = Array2::from_shape_fn((n, 2), |_| rng.random_range(-1.0..1.0));
        let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
        for i in 0..n {
            // Blobs at x0 = ±2 with radius 1: separable with a margin.
            let shift = if labels[i] == 0 { -2.0 } else { 2.0 };
            x[[i, 0]] += shift;
        }
        let y = Target::Classification {
            labels: labels.clone(),
            n_classes: 2,
        };
        let spec = KanSpec::default();
        let model =
            KanModel::init(Task::Classification { n_classes: 2 }, x.view(), &spec, 31).unwrap();
        let cfg = TrainConfig {
            epochs: 250,
            learning_rate: 0.5,
            ..Default::default()
        };
        let (trained, _) = train(model, x.view(), &y, &cfg).unwrap();
        let (out, _) = trained.forward(x.view()).unwrap();
        let correct = (0..n)
            .filter(|&i| {
                let pred = if out[[i, 1]] > out[[i, 0]] { 1 } else { 0 };
                pred == labels[i]
            })
            .count();
        assert!(correct as f64 / n as f64 >= 0.95);
    }

    #[test]
    fn zero_epochs_is_rejected() {
        let model = random_model(Task::Regression, 2, None, 3, 1);
        let x = array![[0.0, 0.0]];
        let y = Target::Regression(vec![0.0]);
        let cfg = TrainConfig {
            epochs: 0,
            ..Default::default()
        };
        assert!(matches!(
            train(model, x.view(), &y, &cfg),
            Err(Error::InvalidSize { what: "epochs", .. })
        ));
    }

    #[test]
    fn training_is_bitwise_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let x = random_inputs(40, 3, &mut rng);
        let y = Target::Regression(x.column(1).to_vec());
        let cfg = TrainConfig {
            epochs: 50,
            learning_rate: 0.2,
            batch_size: 16,
            momentum: 0.9,
            seed: 5,
            ..Default::default()
        };
        let spec = KanSpec::default();
        let run = |seed| {
            let model = KanModel::init(Task::Regression, x.view(), &spec, seed).unwrap();
            train(model, x.view(), &y, &cfg).unwrap()
        };
        let (m1, h1) = run(9);
        let (m2, h2) = run(9);
        assert_eq!(m1, m2);
        assert_eq!(h1, h2);
    }

    #[test]
    fn divergence_is_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(88);
        let x = random_inputs(20, 2, &mut rng);
        let y = Target::Regression(vec![1e150; 20]);
        let spec = KanSpec::default();
        let model = KanModel::init(Task::Regression, x.view(), &spec, 88).unwrap();
        let cfg = TrainConfig {
            epochs: 5,
            learning_rate: 1e30,
            ..Default::default()
        };
        assert!(matches!(
            train(model, x.view(), &y, &cfg),
            Err(Error::NonFiniteLoss { .. })
        ));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let model = random_model(Task::Classification { n_classes: 3 }, 3, Some(5), 4, 55);
        let json = serde_json::to_string(&model).unwrap();
        let back: KanModel = serde_json::from_str(&json).unwrap();
        assert_eq!(model, back);
    }
}
