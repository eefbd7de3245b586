//! Clamped B-spline bases: construction, evaluation, and differentiation.
//!
//! Every KAN computation reduces to evaluating a fixed basis `B_1..B_K` and its
//! derivatives at scalar inputs. Evaluation uses the stable Cox–de Boor
//! recurrence over the active knot span, so the basis values are nonnegative,
//! sum to one inside the domain, and have local support of size `degree + 1`.

use crate::error::{Error, Result};
use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

/// A clamped, nondecreasing knot vector over `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotVector {
    knots: Vec<f64>,
    degree: usize,
    lo: f64,
    hi: f64,
}

/// Basis values and derivatives at a single (clamped) evaluation point.
#[derive(Debug, Clone)]
pub struct BasisEval {
    /// `B_k(x)` for `k = 0..K`.
    pub values: Vec<f64>,
    /// `B'_k(x)` for `k = 0..K`.
    pub derivatives: Vec<f64>,
    /// The evaluation point after clamping to the domain.
    pub x: f64,
}

/// Clamped uniform knot vector with `grid_size` interior intervals.
///
/// The resulting basis has `K = grid_size + degree` functions.
pub fn build_knots(lo: f64, hi: f64, grid_size: usize, degree: usize) -> Result<KnotVector> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidRange { lo, hi });
    }
    if grid_size < 1 {
        return Err(Error::InvalidSize {
            what: "grid_size",
            min: 1,
            got: grid_size,
        });
    }
    let mut knots = Vec::with_capacity(grid_size + 2 * degree + 1);
    knots.extend(std::iter::repeat(lo).take(degree + 1));
    let step = (hi - lo) / grid_size as f64;
    for i in 1..grid_size {
        knots.push(lo + step * i as f64);
    }
    knots.extend(std::iter::repeat(hi).take(degree + 1));
    Ok(KnotVector {
        knots,
        degree,
        lo,
        hi,
    })
}

/// Knots over the observed range of a training column.
///
/// A constant column (min == max) gets its domain widened to `[min-0.5, max+0.5]`
/// so the knot vector never degenerates.
pub fn build_knots_from_samples(values: &[f64], grid_size: usize, degree: usize) -> Result<KnotVector> {
    if values.is_empty() {
        return Err(Error::InvalidSize {
            what: "samples",
            min: 1,
            got: 0,
        });
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo >= hi {
        lo -= 0.5;
        hi += 0.5;
    }
    build_knots(lo, hi, grid_size, degree)
}

impl KnotVector {
    /// Number of basis functions `K = len(knots) - degree - 1`.
    pub fn num_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Widen the domain symmetrically, keeping the interior grid count.
    ///
    /// Used for hidden-layer inputs whose range drifts during training.
    pub fn widened(&self, margin: f64) -> Result<KnotVector> {
        let grid = self.num_basis() - self.degree;
        build_knots(self.lo - margin, self.hi + margin, grid, self.degree)
    }

    /// Active knot span for a clamped `x`: largest `mu` with
    /// `knots[mu] <= x < knots[mu+1]`, taking the last nonempty span at `x == hi`.
    fn span(&self, x: f64) -> usize {
        let k = self.num_basis();
        let mut mu = self.degree;
        while mu < k - 1 && x >= self.knots[mu + 1] {
            mu += 1;
        }
        mu
    }

    /// Nonzero basis values of the given degree at `x` in span `mu`.
    ///
    /// Returns `deg + 1` values for basis indices `mu-deg ..= mu`.
    fn basis_funs(&self, mu: usize, x: f64, deg: usize) -> Vec<f64> {
        let mut vals = vec![0.0; deg + 1];
        vals[0] = 1.0;
        let mut left = vec![0.0; deg + 1];
        let mut right = vec![0.0; deg + 1];
        for j in 1..=deg {
            left[j] = x - self.knots[mu + 1 - j];
            right[j] = self.knots[mu + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                let denom = right[r + 1] + left[j - r];
                let temp = if denom != 0.0 { vals[r] / denom } else { 0.0 };
                vals[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            vals[j] = saved;
        }
        vals
    }

    /// Evaluate all `K` basis functions and their derivatives at `x`.
    ///
    /// `x` outside `[lo, hi]` is clamped to the boundary first, so evaluation
    /// is total and the partition of unity holds everywhere.
    pub fn eval(&self, x: f64) -> BasisEval {
        let x = x.clamp(self.lo, self.hi);
        let k = self.num_basis();
        let p = self.degree;
        let mu = self.span(x);

        let mut values = vec![0.0; k];
        for (r, v) in self.basis_funs(mu, x, p).into_iter().enumerate() {
            values[mu - p + r] = v;
        }

        let mut derivatives = vec![0.0; k];
        if p > 0 {
            // Degree p-1 basis over the same knots has K+1 functions; the
            // nonzero ones at x are mu-(p-1) ..= mu.
            let mut lower = vec![0.0; k + 1];
            for (r, v) in self.basis_funs(mu, x, p - 1).into_iter().enumerate() {
                lower[mu - (p - 1) + r] = v;
            }
            for i in mu - p..=mu {
                let d1 = self.knots[i + p] - self.knots[i];
                let d2 = self.knots[i + p + 1] - self.knots[i + 1];
                let a = if d1 != 0.0 { lower[i] / d1 } else { 0.0 };
                let b = if d2 != 0.0 { lower[i + 1] / d2 } else { 0.0 };
                derivatives[i] = p as f64 * (a - b);
            }
        }

        BasisEval {
            values,
            derivatives,
            x,
        }
    }

    /// True when `x` falls strictly outside the domain (and would be clamped).
    pub fn is_clamped(&self, x: f64) -> bool {
        x < self.lo || x > self.hi
    }
}

/// Row-wise basis expansion: row `i` of the output is the concatenation
/// `b_1(X[i,0]) ‖ … ‖ b_d(X[i,d-1])`.
///
/// All features must share the same basis size `K`.
pub fn expand_batch(kvs: &[KnotVector], x: ArrayView2<f64>) -> Result<Array2<f64>> {
    let (values, _) = expand_batch_with_derivatives(kvs, x)?;
    Ok(values)
}

/// Basis expansion plus the matching derivative expansion, in one pass.
///
/// Derivatives are zero for inputs that were clamped to the domain boundary
/// (the basis is constant in `x` beyond it).
pub fn expand_batch_with_derivatives(
    kvs: &[KnotVector],
    x: ArrayView2<f64>,
) -> Result<(Array2<f64>, Array2<f64>)> {
    let d = x.ncols();
    if kvs.len() != d {
        return Err(Error::DimensionMismatch {
            what: "knot vectors",
            expected: d,
            got: kvs.len(),
        });
    }
    let k = match kvs.first() {
        Some(kv) => kv.num_basis(),
        None => 0,
    };
    if kvs.iter().any(|kv| kv.num_basis() != k) {
        return Err(Error::DimensionMismatch {
            what: "basis functions per feature",
            expected: k,
            got: kvs.iter().map(|kv| kv.num_basis()).max().unwrap_or(0),
        });
    }
    let n = x.nrows();
    let mut values = Array2::zeros((n, d * k));
    let mut derivs = Array2::zeros((n, d * k));
    for i in 0..n {
        for j in 0..d {
            let raw = x[[i, j]];
            let ev = kvs[j].eval(raw);
            let clamped = kvs[j].is_clamped(raw);
            for b in 0..k {
                values[[i, j * k + b]] = ev.values[b];
                derivs[[i, j * k + b]] = if clamped { 0.0 } else { ev.derivatives[b] };
            }
        }
    }
    Ok((values, derivs))
}
