//! Domain types shared across the crate.
//!
//! All types are immutable after construction. Threshold sets are reference
//! counted so that the many predictive distributions issued by one fitted
//! model share a single copy of the outcome grid.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kernel::Kernel;

/// Tolerance on the final cumulative value of a [`StepCdf`].
pub const CUMULATIVE_TOL: f64 = 1e-12;

/// Paired single-valued model outputs `x` and observed outcomes `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingData {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl TrainingData {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidArgument(format!(
                "x has {} values but y has {}",
                x.len(),
                y.len()
            )));
        }
        if x.is_empty() {
            return Err(Error::EmptySample);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("model output"));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("outcome"));
        }
        Ok(Self { x, y })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let (x, y) = pairs.iter().copied().unzip();
        Self::new(x, y)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Copy of the data with case `i` removed; `None` if that would leave it empty.
    pub fn without(&self, i: usize) -> Option<Self> {
        if self.len() <= 1 || i >= self.len() {
            return None;
        }
        let mut x = self.x.clone();
        let mut y = self.y.clone();
        x.remove(i);
        y.remove(i);
        Some(Self { x, y })
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let x = indices.iter().map(|&i| self.x[i]).collect();
        let y = indices.iter().map(|&i| self.y[i]).collect();
        Self::new(x, y)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.x.iter().copied().zip(self.y.iter().copied())
    }
}

/// Strictly increasing outcome values at which predictive CDFs may jump.
#[derive(Clone, PartialEq)]
pub struct ThresholdSet(Arc<[f64]>);

impl ThresholdSet {
    /// Wraps values that are already known to be finite and strictly increasing.
    pub(crate) fn from_sorted_unchecked(values: Vec<f64>) -> Self {
        debug_assert!(values.windows(2).all(|w| w[0] < w[1]));
        Self(values.into())
    }

    pub fn from_sorted(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("thresholds"));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "thresholds must be strictly increasing".into(),
            ));
        }
        Ok(Self(values.into()))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of a threshold equal to `y`, by exact comparison.
    pub fn position(&self, y: f64) -> Option<usize> {
        self.0.binary_search_by(|t| t.total_cmp(&y)).ok()
    }

    pub fn first(&self) -> f64 {
        self.0[0]
    }

    pub fn last(&self) -> f64 {
        self.0[self.0.len() - 1]
    }
}

impl fmt::Debug for ThresholdSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Sorted, deduplicated copy of `values`. Ties are exact floating-point equality.
pub fn unique_thresholds(values: &[f64]) -> Result<ThresholdSet> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("thresholds"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    Ok(ThresholdSet::from_sorted_unchecked(sorted))
}

/// A discrete predictive distribution with jumps at a [`ThresholdSet`].
///
/// Stored as cumulative probabilities; point masses are derived on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCdf {
    thresholds: ThresholdSet,
    cumulative: Vec<f64>,
}

impl StepCdf {
    pub fn new(thresholds: ThresholdSet, cumulative: Vec<f64>) -> Result<Self> {
        validate_cumulative(&cumulative, thresholds.len())?;
        Ok(Self {
            thresholds,
            cumulative,
        })
    }

    pub(crate) fn new_unchecked(thresholds: ThresholdSet, cumulative: Vec<f64>) -> Self {
        debug_assert!(validate_cumulative(&cumulative, thresholds.len()).is_ok());
        Self {
            thresholds,
            cumulative,
        }
    }

    /// Builds the distribution from point masses, one per threshold.
    pub fn from_masses(thresholds: ThresholdSet, masses: &[f64]) -> Result<Self> {
        if masses.len() != thresholds.len() {
            return Err(Error::InvalidArgument(format!(
                "{} masses for {} thresholds",
                masses.len(),
                thresholds.len()
            )));
        }
        if masses.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidArgument("masses must be nonnegative".into()));
        }
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = masses
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        let total = acc;
        if (total - 1.0).abs() > CUMULATIVE_TOL * masses.len().max(1) as f64 {
            return Err(Error::InvalidArgument(format!(
                "masses sum to {total}, expected 1"
            )));
        }
        for c in cumulative.iter_mut() {
            *c = c.min(1.0);
        }
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        Self::new(thresholds, cumulative)
    }

    /// Point mass located at a single value.
    pub fn point_mass(at: f64) -> Result<Self> {
        Self::new(ThresholdSet::from_sorted(vec![at])?, vec![1.0])
    }

    pub fn thresholds(&self) -> &ThresholdSet {
        &self.thresholds
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Point masses `F(t_j) - F(t_{j-1})`, with `F(t_0) = 0`.
    pub fn masses(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.cumulative
            .iter()
            .map(|&c| {
                let w = (c - prev).max(0.0);
                prev = c;
                w
            })
            .collect()
    }

    /// Thresholds carrying strictly positive mass, paired with that mass.
    pub fn support(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mut prev = 0.0;
        self.thresholds
            .values()
            .iter()
            .zip(self.cumulative.iter())
            .filter_map(move |(&t, &c)| {
                let w = c - prev;
                prev = c;
                (w > 0.0).then_some((t, w))
            })
    }

    /// Value of the right-continuous CDF at `y`.
    pub fn cdf(&self, y: f64) -> f64 {
        let t = self.thresholds.values();
        let count = t.partition_point(|&v| v <= y);
        if count == 0 {
            0.0
        } else {
            self.cumulative[count - 1]
        }
    }

    /// Lower quantile `min { t_j : F(t_j) >= alpha }`.
    pub fn quantile(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "quantile level {alpha} outside (0, 1)"
            )));
        }
        let j = self.cumulative.partition_point(|&c| c < alpha);
        let j = j.min(self.cumulative.len() - 1);
        Ok(self.thresholds.values()[j])
    }
}

fn validate_cumulative(cumulative: &[f64], m: usize) -> Result<()> {
    if cumulative.len() != m {
        return Err(Error::InvalidArgument(format!(
            "{} cumulative values for {m} thresholds",
            cumulative.len()
        )));
    }
    if m == 0 {
        return Err(Error::EmptySample);
    }
    if cumulative.iter().any(|c| !(0.0..=1.0).contains(c)) {
        return Err(Error::InvalidArgument(
            "cumulative probabilities must lie in [0, 1]".into(),
        ));
    }
    if cumulative.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument(
            "cumulative probabilities must be nondecreasing".into(),
        ));
    }
    if (cumulative[m - 1] - 1.0).abs() > CUMULATIVE_TOL {
        return Err(Error::InvalidArgument(
            "last cumulative probability must equal 1".into(),
        ));
    }
    Ok(())
}

/// Fitted EasyUQ model: one predictive CDF per distinct model output.
///
/// Row `r` of the CDF matrix holds the cumulative probabilities at every
/// threshold for covariate `unique_x[r]`. Columns are nonincreasing in `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdrModel {
    unique_x: Vec<f64>,
    thresholds: ThresholdSet,
    cdf: Vec<f64>,
}

impl IdrModel {
    pub(crate) fn new_unchecked(unique_x: Vec<f64>, thresholds: ThresholdSet, cdf: Vec<f64>) -> Self {
        debug_assert_eq!(cdf.len(), unique_x.len() * thresholds.len());
        Self {
            unique_x,
            thresholds,
            cdf,
        }
    }

    /// Assembles a model from stored parts, checking every invariant.
    pub fn from_parts(unique_x: Vec<f64>, thresholds: Vec<f64>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let invalid = |msg: String| Error::InvalidModel(msg);
        if unique_x.is_empty() {
            return Err(invalid("no covariate values".into()));
        }
        if unique_x.iter().any(|v| !v.is_finite()) || unique_x.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("covariate values must be finite and strictly increasing".into()));
        }
        let thresholds =
            ThresholdSet::from_sorted(thresholds).map_err(|e| invalid(e.to_string()))?;
        if rows.len() != unique_x.len() {
            return Err(invalid(format!(
                "{} rows for {} covariate values",
                rows.len(),
                unique_x.len()
            )));
        }
        let m = thresholds.len();
        let mut cdf = Vec::with_capacity(rows.len() * m);
        for (r, row) in rows.iter().enumerate() {
            validate_cumulative(row, m).map_err(|e| invalid(format!("row {r}: {e}")))?;
            cdf.extend_from_slice(row);
        }
        for r in 1..rows.len() {
            if rows[r].iter().zip(&rows[r - 1]).any(|(a, b)| a > b) {
                return Err(invalid(format!("rows {} and {r} violate stochastic order", r - 1)));
            }
        }
        Ok(Self {
            unique_x,
            thresholds,
            cdf,
        })
    }

    pub fn unique_x(&self) -> &[f64] {
        &self.unique_x
    }

    pub fn thresholds(&self) -> &ThresholdSet {
        &self.thresholds
    }

    /// Number of distinct covariate values.
    pub fn n_covariates(&self) -> usize {
        self.unique_x.len()
    }

    /// Number of thresholds.
    pub fn n_thresholds(&self) -> usize {
        self.thresholds.len()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let m = self.thresholds.len();
        &self.cdf[r * m..(r + 1) * m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.cdf.chunks_exact(self.thresholds.len())
    }

    pub fn row_cdf(&self, r: usize) -> StepCdf {
        StepCdf::new_unchecked(self.thresholds.clone(), self.row(r).to_vec())
    }

    /// Index of the row stored for covariate `x`, by exact comparison.
    pub fn row_index(&self, x: f64) -> Option<usize> {
        self.unique_x.binary_search_by(|v| v.total_cmp(&x)).ok()
    }
}

#[derive(Serialize, Deserialize)]
struct IdrModelJson {
    unique_x: Vec<f64>,
    thresholds: Vec<f64>,
    cdf: Vec<Vec<f64>>,
}

impl Serialize for IdrModel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        IdrModelJson {
            unique_x: self.unique_x.clone(),
            thresholds: self.thresholds.values().to_vec(),
            cdf: self.rows().map(<[f64]>::to_vec).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IdrModel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = IdrModelJson::deserialize(deserializer)?;
        IdrModel::from_parts(raw.unique_x, raw.thresholds, raw.cdf).map_err(serde::de::Error::custom)
    }
}

/// Student-t degrees of freedom; `Infinite` is the Gaussian limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DegreesOfFreedom {
    Finite(f64),
    Infinite,
}

impl DegreesOfFreedom {
    /// Numeric value, with the Gaussian limit mapped to `f64::INFINITY`.
    pub fn value(self) -> f64 {
        match self {
            DegreesOfFreedom::Finite(v) => v,
            DegreesOfFreedom::Infinite => f64::INFINITY,
        }
    }

    pub fn from_value(v: f64) -> Result<Self> {
        if v == f64::INFINITY {
            Ok(DegreesOfFreedom::Infinite)
        } else if v.is_finite() && v > 0.0 {
            Ok(DegreesOfFreedom::Finite(v))
        } else {
            Err(Error::InvalidArgument(format!(
                "degrees of freedom must be positive, got {v}"
            )))
        }
    }
}

impl fmt::Display for DegreesOfFreedom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DegreesOfFreedom::Finite(v) => write!(f, "{v}"),
            DegreesOfFreedom::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for DegreesOfFreedom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "gaussian" => Ok(DegreesOfFreedom::Infinite),
            _ => {
                let v: f64 = s.parse().map_err(|_| {
                    Error::InvalidArgument(format!("invalid degrees of freedom '{s}'"))
                })?;
                Self::from_value(v)
            }
        }
    }
}

impl Serialize for DegreesOfFreedom {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DegreesOfFreedom::Finite(v) => serializer.serialize_f64(*v),
            DegreesOfFreedom::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for DegreesOfFreedom {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(v) => DegreesOfFreedom::from_value(v),
            Raw::Text(s) => s.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// Degrees of freedom searched when tuning the kernel.
pub const NU_GRID: [DegreesOfFreedom; 7] = [
    DegreesOfFreedom::Finite(2.0),
    DegreesOfFreedom::Finite(3.0),
    DegreesOfFreedom::Finite(4.0),
    DegreesOfFreedom::Finite(5.0),
    DegreesOfFreedom::Finite(10.0),
    DegreesOfFreedom::Finite(20.0),
    DegreesOfFreedom::Infinite,
];

/// Student-t (or Gaussian) kernel with bandwidth `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub nu: DegreesOfFreedom,
    pub h: f64,
}

impl KernelSpec {
    pub fn new(nu: DegreesOfFreedom, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "bandwidth must be positive and finite, got {h}"
            )));
        }
        if let DegreesOfFreedom::Finite(v) = nu {
            DegreesOfFreedom::from_value(v)?;
        }
        Ok(Self { nu, h })
    }

    pub fn gaussian(h: f64) -> Result<Self> {
        Self::new(DegreesOfFreedom::Infinite, h)
    }

    pub fn student_t(nu: f64, h: f64) -> Result<Self> {
        Self::new(DegreesOfFreedom::from_value(nu)?, h)
    }
}

impl std::str::FromStr for KernelSpec {
    type Err = Error;

    /// Parses `"nu,h"`, e.g. `"inf,0.6"` or `"5,0.49"`.
    fn from_str(s: &str) -> Result<Self> {
        let (nu, h) = s.split_once(',').ok_or_else(|| {
            Error::InvalidArgument(format!("kernel must be given as 'nu,h', got '{s}'"))
        })?;
        let h: f64 = h
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("invalid bandwidth '{}'", h.trim())))?;
        Self::new(nu.parse()?, h)
    }
}

/// Location-scale kernel mixture: the Smooth EasyUQ predictive distribution.
///
/// Components with zero weight are not stored.
#[derive(Debug, Clone)]
pub struct MixtureDistribution {
    locations: Vec<f64>,
    weights: Vec<f64>,
    kernel: KernelSpec,
    pub(crate) unit: Kernel,
}

impl PartialEq for MixtureDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.locations == other.locations && self.weights == other.weights && self.kernel == other.kernel
    }
}

impl MixtureDistribution {
    pub fn new(locations: Vec<f64>, weights: Vec<f64>, kernel: KernelSpec) -> Result<Self> {
        if locations.len() != weights.len() {
            return Err(Error::InvalidArgument(
                "locations and weights differ in length".into(),
            ));
        }
        if locations.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("mixture locations"));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidArgument("weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        let (locations, weights) = locations
            .into_iter()
            .zip(weights)
            .filter(|(_, w)| *w > 0.0)
            .unzip();
        Ok(Self::new_unchecked(locations, weights, kernel))
    }

    pub(crate) fn new_unchecked(locations: Vec<f64>, weights: Vec<f64>, kernel: KernelSpec) -> Self {
        Self {
            locations,
            weights,
            kernel,
            unit: Kernel::new(kernel.nu),
        }
    }

    pub fn locations(&self) -> &[f64] {
        &self.locations
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    pub fn n_components(&self) -> usize {
        self.locations.len()
    }
}
