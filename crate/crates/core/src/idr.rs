//! Basic EasyUQ: isotonic distributional regression on a single real covariate.

use crate::error::{Error, Result};
use crate::pav::{antitonic_fit_sums, PavScratch};
use crate::types::{unique_thresholds, IdrModel, StepCdf, TrainingData};

/// Fits conditional CDFs that are antitonic in the model output.
///
/// For every unique outcome threshold the indicators `1{y_i <= t}` are
/// pooled over tied model outputs and fitted by antitonic PAV. Indicator
/// counts are updated incrementally as the threshold increases, so the whole
/// fit costs one PAV sweep per threshold.
pub fn fit(data: &TrainingData) -> Result<IdrModel> {
    if data.is_empty() {
        return Err(Error::EmptySample);
    }
    let x = data.x();
    let y = data.y();
    let n = data.len();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));

    let mut unique_x: Vec<f64> = Vec::new();
    let mut counts: Vec<f64> = Vec::new();
    let mut group = vec![0usize; n];
    for &i in &order {
        if unique_x.last() != Some(&x[i]) {
            unique_x.push(x[i]);
            counts.push(0.0);
        }
        let r = unique_x.len() - 1;
        counts[r] += 1.0;
        group[i] = r;
    }

    let thresholds = unique_thresholds(y)?;
    let k = unique_x.len();
    let m = thresholds.len();

    // Cases bucketed by the index of their outcome among the thresholds.
    let mut bucket_start = vec![0usize; m + 1];
    let threshold_of: Vec<usize> = y
        .iter()
        .map(|&v| thresholds.position(v).expect("outcome is a threshold"))
        .collect();
    for &j in &threshold_of {
        bucket_start[j + 1] += 1;
    }
    for j in 0..m {
        bucket_start[j + 1] += bucket_start[j];
    }
    let mut fill = bucket_start.clone();
    let mut bucket = vec![0usize; n];
    for i in 0..n {
        let j = threshold_of[i];
        bucket[fill[j]] = group[i];
        fill[j] += 1;
    }

    let mut sums = vec![0.0; k];
    let mut column = vec![0.0; k];
    let mut scratch = PavScratch::default();
    let mut cdf = vec![0.0; k * m];
    for j in 0..m {
        for &r in &bucket[bucket_start[j]..bucket_start[j + 1]] {
            sums[r] += 1.0;
        }
        antitonic_fit_sums(&sums, &counts, &mut scratch, &mut column);
        for (r, &v) in column.iter().enumerate() {
            cdf[r * m + j] = v;
        }
    }

    Ok(IdrModel::new_unchecked(unique_x, thresholds, cdf))
}

/// Where a query covariate falls relative to the fitted covariate values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Position {
    Row(usize),
    /// Strictly between rows `lower` and `lower + 1`; `lambda` weighs the lower row.
    Between { lower: usize, lambda: f64 },
}

pub(crate) fn locate(model: &IdrModel, x: f64) -> Position {
    let ux = model.unique_x();
    let k = ux.len();
    if x <= ux[0] {
        return Position::Row(0);
    }
    if x >= ux[k - 1] {
        return Position::Row(k - 1);
    }
    let upper = ux.partition_point(|&v| v < x);
    if ux[upper] == x {
        return Position::Row(upper);
    }
    let lower = upper - 1;
    let lambda = (ux[upper] - x) / (ux[upper] - ux[lower]);
    Position::Between { lower, lambda }
}

/// Predictive step CDF at model output `x`.
///
/// Between fitted covariate values the CDF is interpolated linearly in `x`;
/// outside their range the nearest boundary row is used.
pub fn predict(model: &IdrModel, x: f64) -> Result<StepCdf> {
    if !x.is_finite() {
        return Err(Error::NonFinite("query model output"));
    }
    Ok(match locate(model, x) {
        Position::Row(r) => model.row_cdf(r),
        Position::Between { lower, lambda } => {
            let mu = 1.0 - lambda;
            let a = model.row(lower);
            let b = model.row(lower + 1);
            // Each product is monotone in its input, so the sum stays nondecreasing.
            let mut cumulative: Vec<f64> = a
                .iter()
                .zip(b)
                .map(|(&p, &q)| (lambda * p + mu * q).min(1.0))
                .collect();
            if let Some(last) = cumulative.last_mut() {
                *last = 1.0;
            }
            StepCdf::new_unchecked(model.thresholds().clone(), cumulative)
        }
    })
}

/// Predictions at every query point.
pub fn predict_many(model: &IdrModel, xs: &[f64]) -> Result<Vec<StepCdf>> {
    xs.iter().map(|&x| predict(model, x)).collect()
}

/// Lower `alpha`-quantile of a predictive step CDF.
pub fn quantile(cdf: &StepCdf, alpha: f64) -> Result<f64> {
    cdf.quantile(alpha)
}
