//! Split-based evaluation of (Smooth) EasyUQ on top of a point predictor.
//!
//! For every split the data are shuffled and cut into training, validation
//! and test parts. Each hyperparameter setting is learned on the training
//! part, EasyUQ is fitted to the predictor's training outputs, and the
//! kernel is tuned on the validation part. The best setting is re-learned on
//! training plus validation data and scored on the test part.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::idr;
use crate::scoring::{crps_mixture, crps_step, logs_mixture, ScoreKind};
use crate::smoothing::smooth;
use crate::tuning::{moderated_search, Objective, TuningResult};
use crate::types::{KernelSpec, TrainingData};

/// Named numeric hyperparameters of a point predictor.
pub type Hyperparameters = BTreeMap<String, f64>;

/// Feature table with one outcome column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    outcome_name: String,
    features: Vec<Vec<f64>>,
    outcomes: Vec<f64>,
}

impl Dataset {
    pub fn new(feature_names: Vec<String>, outcome_name: String, features: Vec<Vec<f64>>, outcomes: Vec<f64>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::EmptySample);
        }
        if features.len() != outcomes.len() {
            return Err(Error::InvalidArgument("feature rows and outcomes differ in length".into()));
        }
        if feature_names.is_empty() {
            return Err(Error::InvalidArgument("dataset needs at least one feature column".into()));
        }
        if features.iter().any(|r| r.len() != feature_names.len()) {
            return Err(Error::InvalidArgument("ragged feature rows".into()));
        }
        if features.iter().flatten().chain(&outcomes).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset"));
        }
        Ok(Self {
            feature_names,
            outcome_name,
            features,
            outcomes,
        })
    }

    /// Single feature `x` with outcome `y`.
    pub fn from_training(data: &TrainingData) -> Self {
        Self {
            feature_names: vec!["x".into()],
            outcome_name: "y".into(),
            features: data.x().iter().map(|&x| vec![x]).collect(),
            outcomes: data.y().to_vec(),
        }
    }

    /// Reads a CSV with a header row. The outcome column is `outcome` if
    /// given, else a column named `y`, else the last column; every other
    /// column is a feature.
    pub fn from_csv<R: Read>(reader: R, outcome: Option<&str>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        if headers.len() < 2 {
            return Err(Error::Parse {
                line: 1,
                message: "expected a header with at least one feature and one outcome column".into(),
            });
        }
        let target = match outcome {
            Some(name) => headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("no column named '{name}'"),
            })?,
            None => headers.iter().position(|h| h == "y").unwrap_or(headers.len() - 1),
        };
        let mut features = Vec::new();
        let mut outcomes = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != headers.len() {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} fields, found {}", headers.len(), record.len()),
                });
            }
            let mut row = Vec::with_capacity(headers.len() - 1);
            for (j, field) in record.iter().enumerate() {
                let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("invalid number '{field}' in column '{}'", headers[j]),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line,
                        message: format!("non-finite value in column '{}'", headers[j]),
                    });
                }
                if j == target {
                    outcomes.push(v);
                } else {
                    row.push(v);
                }
            }
            features.push(row);
        }
        let mut names = headers;
        let outcome_name = names.remove(target);
        Self::new(names, outcome_name, features, outcomes)
    }

    pub fn from_csv_path(path: &Path, outcome: Option<&str>) -> Result<Self> {
        Self::from_csv(std::fs::File::open(path)?, outcome)
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn outcome_name(&self) -> &str {
        &self.outcome_name
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    /// Copy with the outcomes replaced.
    pub fn with_outcomes(&self, outcomes: Vec<f64>) -> Result<Self> {
        Self::new(self.feature_names.clone(), self.outcome_name.clone(), self.features.clone(), outcomes)
    }

    fn rows(&self, indices: &[usize]) -> (Vec<Vec<f64>>, Vec<f64>) {
        indices
            .iter()
            .map(|&i| (self.features[i].clone(), self.outcomes[i]))
            .unzip()
    }
}

/// A point predictor that can be learned for given hyperparameters.
pub trait PointPredictor: Sync {
    fn name(&self) -> &str;

    fn learn(&self, features: &[Vec<f64>], outcomes: &[f64], hyper: &Hyperparameters) -> Result<Box<dyn FittedPredictor>>;
}

pub trait FittedPredictor: Send + Sync {
    fn predict(&self, features: &[Vec<f64>]) -> Result<Vec<f64>>;
}

fn hyper(h: &Hyperparameters, key: &str, default: f64) -> f64 {
    h.get(key).copied().unwrap_or(default)
}

fn check_known(h: &Hyperparameters, known: &[&str], predictor: &str) -> Result<()> {
    match h.keys().find(|k| !known.contains(&k.as_str())) {
        Some(k) => Err(Error::Predictor(format!("{predictor} has no hyperparameter '{k}'"))),
        None => Ok(()),
    }
}

/// Model output `scale * feature + offset` of the first feature column.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPredictor;

struct Affine {
    scale: f64,
    offset: f64,
}

impl FittedPredictor for Affine {
    fn predict(&self, features: &[Vec<f64>]) -> Result<Vec<f64>> {
        Ok(features.iter().map(|r| self.scale * r[0] + self.offset).collect())
    }
}

impl PointPredictor for IdentityPredictor {
    fn name(&self) -> &str {
        "identity"
    }

    fn learn(&self, _: &[Vec<f64>], _: &[f64], h: &Hyperparameters) -> Result<Box<dyn FittedPredictor>> {
        check_known(h, &["scale", "offset"], self.name())?;
        Ok(Box::new(Affine {
            scale: hyper(h, "scale", 1.0),
            offset: hyper(h, "offset", 0.0),
        }))
    }
}

/// Least squares with intercept; hyperparameter `lambda` adds a ridge
/// penalty on the slopes.
#[derive(Debug, Clone, Copy, Default)]
pub struct LinearPredictor;

struct Linear {
    coef: DVector<f64>,
}

impl FittedPredictor for Linear {
    fn predict(&self, features: &[Vec<f64>]) -> Result<Vec<f64>> {
        Ok(features
            .iter()
            .map(|r| self.coef[0] + r.iter().zip(self.coef.iter().skip(1)).map(|(a, b)| a * b).sum::<f64>())
            .collect())
    }
}

impl PointPredictor for LinearPredictor {
    fn name(&self) -> &str {
        "linear"
    }

    fn learn(&self, features: &[Vec<f64>], outcomes: &[f64], h: &Hyperparameters) -> Result<Box<dyn FittedPredictor>> {
        check_known(h, &["lambda"], self.name())?;
        let lambda = hyper(h, "lambda", 0.0);
        if !(lambda >= 0.0) {
            return Err(Error::Predictor(format!("lambda must be nonnegative, got {lambda}")));
        }
        let n = features.len();
        let p = features.first().map_or(0, Vec::len) + 1;
        let design = DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { features[i][j - 1] });
        let target = DVector::from_column_slice(outcomes);
        let mut gram = design.transpose() * &design;
        for j in 1..p {
            gram[(j, j)] += lambda;
        }
        let rhs = design.transpose() * target;
        let coef = match gram.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => gram
                .svd(true, true)
                .solve(&rhs, 1e-12)
                .map_err(|e| Error::Predictor(e.to_string()))?,
        };
        Ok(Box::new(Linear { coef }))
    }
}

/// Mean outcome of the `k` nearest training rows in Euclidean distance.
#[derive(Debug, Clone, Copy, Default)]
pub struct KnnPredictor;

struct Knn {
    k: usize,
    features: Vec<Vec<f64>>,
    outcomes: Vec<f64>,
}

impl FittedPredictor for Knn {
    fn predict(&self, features: &[Vec<f64>]) -> Result<Vec<f64>> {
        let mut dist: Vec<(f64, usize)> = Vec::with_capacity(self.features.len());
        Ok(features
            .iter()
            .map(|q| {
                dist.clear();
                dist.extend(self.features.iter().enumerate().map(|(i, r)| {
                    (r.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i)
                }));
                let k = self.k.min(dist.len());
                dist.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                dist[..k].iter().map(|&(_, i)| self.outcomes[i]).sum::<f64>() / k as f64
            })
            .collect())
    }
}

impl PointPredictor for KnnPredictor {
    fn name(&self) -> &str {
        "knn"
    }

    fn learn(&self, features: &[Vec<f64>], outcomes: &[f64], h: &Hyperparameters) -> Result<Box<dyn FittedPredictor>> {
        check_known(h, &["k"], self.name())?;
        let k = hyper(h, "k", 5.0);
        if !(k >= 1.0 && k.fract() == 0.0) {
            return Err(Error::Predictor(format!("k must be a positive integer, got {k}")));
        }
        if features.is_empty() {
            return Err(Error::Predictor("no training rows".into()));
        }
        Ok(Box::new(Knn {
            k: k as usize,
            features: features.to_vec(),
            outcomes: outcomes.to_vec(),
        }))
    }
}

/// Built-in predictor by name: `identity`, `linear` (alias `ols`) or `knn`.
pub fn builtin_predictor(name: &str) -> Result<Box<dyn PointPredictor>> {
    match name.trim().to_ascii_lowercase().as_str() {
        "identity" => Ok(Box::new(IdentityPredictor)),
        "linear" | "ols" | "ridge" => Ok(Box::new(LinearPredictor)),
        "knn" => Ok(Box::new(KnnPredictor)),
        other => Err(Error::InvalidArgument(format!("unknown predictor '{other}'"))),
    }
}

/// Parses settings separated by `;`, each a comma-separated list of
/// `name=value`. An empty string yields one setting with defaults.
pub fn parse_hypergrid(s: &str) -> Result<Vec<Hyperparameters>> {
    s.split(';')
        .map(|setting| {
            setting
                .split(',')
                .map(str::trim)
                .filter(|kv| !kv.is_empty())
                .map(|kv| {
                    let (k, v) = kv
                        .split_once('=')
                        .ok_or_else(|| Error::InvalidArgument(format!("expected name=value, got '{kv}'")))?;
                    let v: f64 = v
                        .trim()
                        .parse()
                        .map_err(|_| Error::InvalidArgument(format!("invalid value in '{kv}'")))?;
                    Ok((k.trim().to_string(), v))
                })
                .collect()
        })
        .collect()
}

/// How the data are split repeatedly into training, validation and test parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub n_splits: usize,
    /// Training, validation and test fractions.
    pub fractions: (f64, f64, f64),
    pub seed: u64,
}

impl Default for SplitPlan {
    fn default() -> Self {
        Self {
            n_splits: 20,
            fractions: (0.72, 0.18, 0.10),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitPlan {
    pub fn new(n_splits: usize, seed: u64) -> Result<Self> {
        let plan = Self {
            n_splits,
            seed,
            ..Self::default()
        };
        plan.validate()?;
        Ok(plan)
    }

    fn validate(&self) -> Result<()> {
        let (a, b, c) = self.fractions;
        if self.n_splits == 0 {
            return Err(Error::InvalidArgument("need at least one split".into()));
        }
        if !(a > 0.0 && b > 0.0 && c > 0.0) || ((a + b + c) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument("split fractions must be positive and sum to 1".into()));
        }
        Ok(())
    }

    /// Index sets of split `s` for a dataset of `n` rows: a seeded shuffle
    /// cut into contiguous slices.
    pub fn split(&self, n: usize, s: usize) -> Result<SplitIndices> {
        self.validate()?;
        let n_train = (self.fractions.0 * n as f64).round() as usize;
        let n_val = (self.fractions.1 * n as f64).round() as usize;
        if n_train == 0 || n_val == 0 || n_train + n_val >= n {
            return Err(Error::InvalidArgument(format!("{n} rows are too few to split")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(s as u64);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        Ok(SplitIndices {
            train: perm[..n_train].to_vec(),
            validation: perm[n_train..n_train + n_val].to_vec(),
            test: perm[n_train + n_val..].to_vec(),
        })
    }
}

/// Validation result of one hyperparameter setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperRow {
    pub hyperparameters: Hyperparameters,
    pub validation_score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fallback_used: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub split: usize,
    pub indices: SplitIndices,
    pub candidates: Vec<HyperRow>,
    pub selected: usize,
    pub hyperparameters: Hyperparameters,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_logs: Option<f64>,
    pub test_crps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitFailure {
    pub split: usize,
    pub error: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Smooth,
    Basic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkflowReport {
    pub method: Method,
    pub predictor: String,
    pub plan: SplitPlan,
    /// Score used to select hyperparameters on the validation part.
    pub selection_score: ScoreKind,
    pub splits: Vec<SplitRecord>,
    pub failures: Vec<SplitFailure>,
    /// Mean of the per-split test means; absent for the basic method.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grand_mean_logs: Option<f64>,
    pub grand_mean_crps: f64,
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    values.sum::<f64>() / n as f64
}

struct Prepared {
    indices: SplitIndices,
    train: (Vec<Vec<f64>>, Vec<f64>),
    validation: (Vec<Vec<f64>>, Vec<f64>),
    refit: (Vec<Vec<f64>>, Vec<f64>),
    test: (Vec<Vec<f64>>, Vec<f64>),
}

fn prepare(dataset: &Dataset, plan: &SplitPlan, s: usize) -> Result<Prepared> {
    let indices = plan.split(dataset.len(), s)?;
    let refit_idx: Vec<usize> = indices.train.iter().chain(&indices.validation).copied().collect();
    Ok(Prepared {
        train: dataset.rows(&indices.train),
        validation: dataset.rows(&indices.validation),
        refit: dataset.rows(&refit_idx),
        test: dataset.rows(&indices.test),
        indices,
    })
}

/// Learns the predictor and returns EasyUQ training data built from its
/// outputs, with the fitted predictor.
fn learn_pair(
    predictor: &dyn PointPredictor,
    part: &(Vec<Vec<f64>>, Vec<f64>),
    hyper: &Hyperparameters,
) -> Result<(Box<dyn FittedPredictor>, TrainingData)> {
    let fitted = predictor.learn(&part.0, &part.1, hyper)?;
    let outputs = fitted.predict(&part.0).map_err(|e| Error::Predictor(e.to_string()))?;
    let data = TrainingData::new(outputs, part.1.clone()).map_err(|e| Error::Predictor(e.to_string()))?;
    Ok((fitted, data))
}

fn outputs(fitted: &dyn FittedPredictor, part: &(Vec<Vec<f64>>, Vec<f64>)) -> Result<Vec<f64>> {
    let out = fitted.predict(&part.0).map_err(|e| Error::Predictor(e.to_string()))?;
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Predictor("non-finite model output".into()));
    }
    Ok(out)
}

fn select_min(rows: &[HyperRow]) -> usize {
    let mut best = 0;
    for (i, row) in rows.iter().enumerate() {
        if row.validation_score < rows[best].validation_score {
            best = i;
        }
    }
    best
}

fn check_inputs(dataset: &Dataset, hypergrid: &[Hyperparameters], plan: &SplitPlan) -> Result<()> {
    if dataset.is_empty() {
        return Err(Error::EmptySample);
    }
    if hypergrid.is_empty() {
        return Err(Error::InvalidArgument("empty hyperparameter grid".into()));
    }
    plan.split(dataset.len(), 0).map(|_| ())
}

fn smooth_split(
    dataset: &Dataset,
    predictor: &dyn PointPredictor,
    hypergrid: &[Hyperparameters],
    plan: &SplitPlan,
    s: usize,
) -> Result<SplitRecord> {
    let p = prepare(dataset, plan, s)?;
    let mut candidates = Vec::with_capacity(hypergrid.len());
    for hyper in hypergrid {
        let (fitted, train) = learn_pair(predictor, &p.train, hyper)?;
        let model = idr::fit(&train)?;
        let val = TrainingData::new(outputs(fitted.as_ref(), &p.validation)?, p.validation.1.clone())?;
        let objective = Objective::holdout(&model, &val, ScoreKind::Logs)?;
        let tuned: TuningResult = moderated_search(&objective, train.y())?;
        candidates.push(HyperRow {
            hyperparameters: hyper.clone(),
            validation_score: tuned.criterion_value,
            kernel: Some(tuned.best),
            fallback_used: Some(tuned.fallback_used),
        });
    }
    let selected = select_min(&candidates);
    let hyperparameters = candidates[selected].hyperparameters.clone();
    let spec = candidates[selected].kernel.expect("smooth candidates carry a kernel");

    let (fitted, refit) = learn_pair(predictor, &p.refit, &hyperparameters)?;
    let model = idr::fit(&refit)?;
    let test_x = outputs(fitted.as_ref(), &p.test)?;
    let mut logs = Vec::with_capacity(test_x.len());
    let mut crps = Vec::with_capacity(test_x.len());
    for (&x, &y) in test_x.iter().zip(&p.test.1) {
        let mix = smooth(&idr::predict(&model, x)?, spec);
        logs.push(logs_mixture(&mix, y));
        crps.push(crps_mixture(&mix, y)?);
    }
    Ok(SplitRecord {
        split: s,
        indices: p.indices,
        candidates,
        selected,
        hyperparameters,
        kernel: Some(spec),
        test_logs: Some(mean(logs.into_iter())),
        test_crps: mean(crps.into_iter()),
    })
}

fn basic_split(
    dataset: &Dataset,
    predictor: &dyn PointPredictor,
    hypergrid: &[Hyperparameters],
    plan: &SplitPlan,
    s: usize,
) -> Result<SplitRecord> {
    let p = prepare(dataset, plan, s)?;
    let mut candidates = Vec::with_capacity(hypergrid.len());
    for hyper in hypergrid {
        let (fitted, train) = learn_pair(predictor, &p.train, hyper)?;
        let model = idr::fit(&train)?;
        let val_x = outputs(fitted.as_ref(), &p.validation)?;
        let scores = val_x
            .iter()
            .zip(&p.validation.1)
            .map(|(&x, &y)| Ok(crps_step(&idr::predict(&model, x)?, y)))
            .collect::<Result<Vec<_>>>()?;
        candidates.push(HyperRow {
            hyperparameters: hyper.clone(),
            validation_score: mean(scores.into_iter()),
            kernel: None,
            fallback_used: None,
        });
    }
    let selected = select_min(&candidates);
    let hyperparameters = candidates[selected].hyperparameters.clone();
    let (fitted, refit) = learn_pair(predictor, &p.refit, &hyperparameters)?;
    let model = idr::fit(&refit)?;
    let test_x = outputs(fitted.as_ref(), &p.test)?;
    let crps = test_x
        .iter()
        .zip(&p.test.1)
        .map(|(&x, &y)| Ok(crps_step(&idr::predict(&model, x)?, y)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SplitRecord {
        split: s,
        indices: p.indices,
        candidates,
        selected,
        hyperparameters,
        kernel: None,
        test_logs: None,
        test_crps: mean(crps.into_iter()),
    })
}

/// Runs split `s` of `plan` alone.
pub fn run_split(
    method: Method,
    dataset: &Dataset,
    predictor: &dyn PointPredictor,
    hypergrid: &[Hyperparameters],
    plan: &SplitPlan,
    s: usize,
) -> Result<SplitRecord> {
    check_inputs(dataset, hypergrid, plan)?;
    match method {
        Method::Smooth => smooth_split(dataset, predictor, hypergrid, plan, s),
        Method::Basic => basic_split(dataset, predictor, hypergrid, plan, s),
    }
}

fn run(
    method: Method,
    dataset: &Dataset,
    predictor: &dyn PointPredictor,
    hypergrid: &[Hyperparameters],
    plan: &SplitPlan,
) -> Result<WorkflowReport> {
    check_inputs(dataset, hypergrid, plan)?;
    let outcomes: Vec<Result<SplitRecord>> = (0..plan.n_splits)
        .into_par_iter()
        .map(|s| run_split(method, dataset, predictor, hypergrid, plan, s))
        .collect();
    let mut splits = Vec::new();
    let mut failures = Vec::new();
    for (s, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(record) => splits.push(record),
            Err(err) => failures.push(SplitFailure {
                split: s,
                error: err.to_string(),
            }),
        }
    }
    if splits.is_empty() {
        let first = failures.first().map_or(String::new(), |f| f.error.clone());
        return Err(Error::Predictor(format!("every split failed; first error: {first}")));
    }
    let grand_mean_crps = mean(splits.iter().map(|r| r.test_crps));
    let grand_mean_logs = match method {
        Method::Smooth => Some(mean(splits.iter().map(|r| r.test_logs.unwrap_or(f64::NAN)))),
        Method::Basic => None,
    };
    Ok(WorkflowReport {
        method,
        predictor: predictor.name().to_string(),
        plan: *plan,
        selection_score: match method {
            Method::Smooth => ScoreKind::Logs,
            Method::Basic => ScoreKind::Crps,
        },
        splits,
        failures,
        grand_mean_logs,
        grand_mean_crps,
    })
}

/// Smooth EasyUQ on top of `predictor`, with hyperparameters selected by the
/// validation LogS and the kernel re-used verbatim after refitting.
pub fn run_algorithm1(
    dataset: &Dataset,
    predictor: &dyn PointPredictor,
    hypergrid: &[Hyperparameters],
    plan: &SplitPlan,
) -> Result<WorkflowReport> {
    run(Method::Smooth, dataset, predictor, hypergrid, plan)
}

/// The same pipeline with unsmoothed EasyUQ, selected and scored by CRPS.
pub fn evaluate_basic_easyuq(
    dataset: &Dataset,
    predictor: &dyn PointPredictor,
    hypergrid: &[Hyperparameters],
    plan: &SplitPlan,
) -> Result<WorkflowReport> {
    run(Method::Basic, dataset, predictor, hypergrid, plan)
}
