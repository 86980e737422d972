//! Weighted antitonic least squares by pool-adjacent-violators.
//!
//! The fit minimizes `sum_i w_i (theta_i - v_i)^2` subject to
//! `theta_1 >= theta_2 >= ... >= theta_k`. It is computed by running the
//! standard isotonic sweep on the negated sequence: each new point is pushed
//! as its own block and blocks are merged while they violate the order.
//!
//! Blocks carry the weighted *sum* rather than the mean, so a block mean is
//! a single division of exactly accumulated integers when the inputs are
//! indicator counts. Equal rational means therefore round to identical
//! floats, which keeps point masses derived from adjacent columns exactly zero
//! where the CDF does not move.

use crate::error::{Error, Result};

/// Values with strictly positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSequence {
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedSequence {
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::InvalidArgument(
                "values and weights differ in length".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("values"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidArgument(
                "weights must be positive and finite".into(),
            ));
        }
        Ok(Self { values, weights })
    }

    pub fn unit(values: Vec<f64>) -> Result<Self> {
        let weights = vec![1.0; values.len()];
        Self::new(values, weights)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Nonincreasing weighted least-squares fit of `seq`.
pub fn antitonic_fit(seq: &WeightedSequence) -> Vec<f64> {
    let sums: Vec<f64> = seq
        .values
        .iter()
        .zip(&seq.weights)
        .map(|(v, w)| v * w)
        .collect();
    let mut out = vec![0.0; seq.len()];
    let mut scratch = PavScratch::default();
    antitonic_fit_sums(&sums, &seq.weights, &mut scratch, &mut out);
    out
}

#[derive(Debug, Clone, Copy)]
struct Block {
    sum: f64,
    weight: f64,
    len: usize,
}

impl Block {
    #[inline]
    fn mean(&self) -> f64 {
        self.sum / self.weight
    }
}

/// Reusable block stack, so per-threshold fits do not allocate.
#[derive(Debug, Default)]
pub(crate) struct PavScratch {
    blocks: Vec<Block>,
}

/// Antitonic fit from per-point weighted sums `s_i = w_i v_i` and weights.
///
/// Writes the fitted values into `out`.
pub(crate) fn antitonic_fit_sums(sums: &[f64], weights: &[f64], scratch: &mut PavScratch, out: &mut [f64]) {
    debug_assert_eq!(sums.len(), weights.len());
    debug_assert_eq!(sums.len(), out.len());
    let blocks = &mut scratch.blocks;
    blocks.clear();
    // Isotonic sweep on the negated sequence.
    for (&s, &w) in sums.iter().zip(weights) {
        let mut cur = Block {
            sum: -s,
            weight: w,
            len: 1,
        };
        while let Some(prev) = blocks.last() {
            if prev.mean() > cur.mean() {
                cur.sum += prev.sum;
                cur.weight += prev.weight;
                cur.len += prev.len;
                blocks.pop();
            } else {
                break;
            }
        }
        blocks.push(cur);
    }
    let mut i = 0;
    for b in blocks.iter() {
        let value = -b.mean();
        out[i..i + b.len].fill(value);
        i += b.len;
    }
}

/// Reference min-max evaluation of the antitonic fit for unit weights:
/// `theta_j = min_{k <= j} max_{l >= j} mean(v_k..=v_l)`.
///
/// Cubic in the length; intended as a test oracle.
pub fn minmax_oracle(indicators: &[f64]) -> Vec<f64> {
    weighted_minmax_oracle(indicators, &vec![1.0; indicators.len()])
}

/// Weighted generalization of [`minmax_oracle`], with block means weighted by `weights`.
pub fn weighted_minmax_oracle(values: &[f64], weights: &[f64]) -> Vec<f64> {
    let k = values.len();
    let mut prefix_sum = vec![0.0; k + 1];
    let mut prefix_weight = vec![0.0; k + 1];
    for i in 0..k {
        prefix_sum[i + 1] = prefix_sum[i] + values[i] * weights[i];
        prefix_weight[i + 1] = prefix_weight[i] + weights[i];
    }
    let block_mean =
        |a: usize, b: usize| (prefix_sum[b + 1] - prefix_sum[a]) / (prefix_weight[b + 1] - prefix_weight[a]);
    (0..k)
        .map(|j| {
            (0..=j)
                .map(|a| (j..k).map(|b| block_mean(a, b)).fold(f64::NEG_INFINITY, f64::max))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}
