//! Feature selection for supervised tabular learning built on Kolmogorov-Arnold
//! networks, with classical baseline selectors and a leakage-safe cross-validation
//! benchmark pipeline.
//!
//! The KAN machinery (B-spline bases, layers, training, analytic gradients) lives
//! in [`spline`] and [`kan`]. Four KAN-derived importance measures (L1/L2 spline
//! norms, knockout risk deltas, input-gradient sensitivity) live in [`importance`].
//! Classical selectors (mutual information, LASSO, random-forest impurity,
//! SVM-RFE, permutation importance) live in [`baselines`], downstream predictors
//! in [`predictors`], and the selection-to-prediction protocol in [`pipeline`].

pub mod baselines;
pub mod data;
pub mod error;
pub mod importance;
pub mod kan;
pub mod metrics;
pub mod pipeline;
pub mod predictors;
pub mod report;
pub mod spline;
pub mod tree;

pub use error::{Error, Result};

/// Deterministic seed derivation: mixes a master seed with a stream of tags so
/// that independent pipeline jobs get independent, reproducible RNG streams.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut state = master;
    for &t in tags {
        state = splitmix64(state ^ splitmix64(t));
    }
    splitmix64(state)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit hash of a string tag, for use with [`derive_seed`].
pub fn tag_hash(tag: &str) -> u64 {
    // FNV-1a
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in tag.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
