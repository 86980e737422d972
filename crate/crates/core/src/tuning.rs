//! Kernel parameter selection for Smooth EasyUQ.
//!
//! Bandwidths are searched with Brent's method on `ln h` over
//! `[1e-4 * range(y), range(y)]`, separately for every degrees-of-freedom value
//! on the grid. The one-fit criterion scores each training case against its
//! fitted predictive distribution after deleting the point mass at the case's
//! own outcome.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::idr;
use crate::kernel::Kernel;
use crate::scoring::{crps_mixture, ScoreKind};
use crate::smoothing::{log_sum_exp, smooth};
use crate::types::{DegreesOfFreedom, IdrModel, KernelSpec, MixtureDistribution, StepCdf, TrainingData, NU_GRID};

/// Lower end of the bandwidth bracket relative to the outcome range.
pub const H_FLOOR_FRACTION: f64 = 1e-4;

/// An optimal bandwidth below this multiple of the floor counts as degenerate.
pub const DEGENERATION_FACTOR: f64 = 10.0;

/// Brent tolerance on `ln h`.
pub const LOG_H_TOL: f64 = 1e-3;

/// Remaining mass below which a one-fit case is skipped.
const MIN_REMAINING_MASS: f64 = 1e-12;

/// Values treated as "large" when the objective is not finite.
const LARGE: f64 = 1e300;

/// Best bandwidth for one degrees-of-freedom value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuRow {
    pub nu: DegreesOfFreedom,
    pub h: f64,
    pub criterion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningResult {
    pub best: KernelSpec,
    pub criterion_value: f64,
    pub per_nu: Vec<NuRow>,
    pub fallback_used: bool,
    /// Cases left without mass by the one-fit removal.
    pub skipped_cases: usize,
    /// Bandwidth search interval `(h_floor, h_ceil)`.
    pub bracket: (f64, f64),
}

/// Cases scored against fixed discrete predictive distributions, optionally
/// with the point mass at the outcome removed.
#[derive(Debug, Clone)]
pub struct Objective {
    supports: Vec<Vec<(f64, f64)>>,
    cases: Vec<Case>,
    score: ScoreKind,
    skipped: usize,
}

#[derive(Debug, Clone, Copy)]
struct Case {
    support: usize,
    y: f64,
    removed: Option<usize>,
    remaining: f64,
}

impl Objective {
    /// One-fit objective: every training case is scored against the fitted
    /// row at its covariate with the mass at its own outcome deleted.
    pub fn one_fit(model: &IdrModel, data: &TrainingData, score: ScoreKind) -> Result<Self> {
        let supports: Vec<Vec<(f64, f64)>> = (0..model.n_covariates())
            .map(|r| model.row_cdf(r).support().collect())
            .collect();
        let mut cases = Vec::with_capacity(data.len());
        let mut skipped = 0;
        for (x, y) in data.pairs() {
            let r = model
                .row_index(x)
                .ok_or_else(|| Error::InvalidModel(format!("covariate {x} not in fitted model")))?;
            let support = &supports[r];
            let removed = support.iter().position(|&(t, _)| t == y);
            let remaining: f64 = support
                .iter()
                .enumerate()
                .filter(|&(j, _)| Some(j) != removed)
                .map(|(_, &(_, w))| w)
                .sum();
            if remaining <= MIN_REMAINING_MASS {
                skipped += 1;
                continue;
            }
            cases.push(Case {
                support: r,
                y,
                removed,
                remaining,
            });
        }
        if cases.is_empty() {
            return Err(Error::OneFitUndefined);
        }
        Ok(Self {
            supports,
            cases,
            score,
            skipped,
        })
    }

    /// Out-of-sample objective: predictions of `model` at the validation
    /// covariates, scored at the validation outcomes.
    pub fn holdout(model: &IdrModel, validation: &TrainingData, score: ScoreKind) -> Result<Self> {
        let cdfs = idr::predict_many(model, validation.x())?;
        Self::direct(&cdfs, validation.y(), score)
    }

    /// Scores each discrete distribution at the matching outcome without removal.
    pub fn direct(cdfs: &[StepCdf], outcomes: &[f64], score: ScoreKind) -> Result<Self> {
        if cdfs.len() != outcomes.len() {
            return Err(Error::InvalidArgument("distributions and outcomes differ in length".into()));
        }
        if cdfs.is_empty() {
            return Err(Error::EmptySample);
        }
        if outcomes.iter().any(|y| !y.is_finite()) {
            return Err(Error::NonFinite("outcomes"));
        }
        let supports = cdfs.iter().map(|c| c.support().collect()).collect();
        let cases = outcomes
            .iter()
            .enumerate()
            .map(|(i, &y)| Case {
                support: i,
                y,
                removed: None,
                remaining: 1.0,
            })
            .collect();
        Ok(Self {
            supports,
            cases,
            score,
            skipped: 0,
        })
    }

    pub fn n_cases(&self) -> usize {
        self.cases.len()
    }

    pub fn skipped_cases(&self) -> usize {
        self.skipped
    }

    pub fn score(&self) -> ScoreKind {
        self.score
    }

    /// Mean score of the smoothed distributions under `spec`.
    pub fn evaluate(&self, spec: KernelSpec) -> Result<f64> {
        let kernel = Kernel::new(spec.nu);
        let mut total = 0.0;
        for case in &self.cases {
            let support = &self.supports[case.support];
            total += match self.score {
                ScoreKind::Logs => -removed_ln_density(support, case, &kernel, spec.h),
                ScoreKind::Crps => {
                    let (locations, weights) = support
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| Some(j) != case.removed)
                        .map(|(_, &(t, w))| (t, w / case.remaining))
                        .unzip();
                    crps_mixture(&MixtureDistribution::new_unchecked(locations, weights, spec), case.y)?
                }
            };
        }
        Ok(total / self.cases.len() as f64)
    }
}

fn removed_ln_density(support: &[(f64, f64)], case: &Case, kernel: &Kernel, h: f64) -> f64 {
    let inv_h = 1.0 / h;
    let kept = || {
        support
            .iter()
            .enumerate()
            .filter(move |&(j, _)| Some(j) != case.removed)
            .map(|(_, &p)| p)
    };
    let sum: f64 = kept().map(|(t, w)| w * kernel.pdf((case.y - t) * inv_h)).sum();
    let ln_sum = if sum > 1e-280 {
        sum.ln()
    } else {
        log_sum_exp(kept().map(|(t, w)| w.ln() + kernel.ln_pdf((case.y - t) * inv_h)))
    };
    ln_sum - h.ln() - case.remaining.ln()
}

/// One-fit criterion with the logarithmic score.
pub fn one_fit_criterion(model: &IdrModel, data: &TrainingData, spec: KernelSpec) -> Result<f64> {
    Objective::one_fit(model, data, ScoreKind::Logs)?.evaluate(spec)
}

/// Leave-one-out cross-validation criterion with the logarithmic score.
/// Refits the model once per case.
pub fn loo_cv_criterion(data: &TrainingData, spec: KernelSpec) -> Result<f64> {
    if data.len() < 2 {
        return Err(Error::InvalidArgument(
            "leave-one-out cross-validation needs at least two cases".into(),
        ));
    }
    let mut total = 0.0;
    for (i, (x, y)) in data.pairs().enumerate() {
        let rest = data.without(i).ok_or(Error::EmptySample)?;
        let model = idr::fit(&rest)?;
        let mix = smooth(&idr::predict(&model, x)?, spec);
        total += crate::scoring::logs_mixture(&mix, y);
    }
    Ok(total / data.len() as f64)
}

/// Minimizes `f` on `[lo, hi]` by Brent's method, then compares the result
/// with both endpoints so that monotone objectives return the boundary.
///
/// Non-finite objective values are treated as very large.
pub fn brent_minimize<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidArgument("non-finite bracket".into()));
    }
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!("empty bracket [{lo}, {hi}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mut g = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            v
        } else if v == f64::NEG_INFINITY {
            -LARGE
        } else {
            LARGE
        }
    };

    const GOLDEN: f64 = 0.381_966_011_250_105_1;
    let eps = f64::EPSILON.sqrt();
    let (mut a, mut b) = (lo, hi);
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = g(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..500 {
        let xm = 0.5 * (a + b);
        let tol1 = eps * x.abs() + tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let mut r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            r = e;
            e = d;
            if p.abs() < (0.5 * q * r).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = g(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    let mut best = (x, fx);
    for end in [lo, hi] {
        let fe = g(end);
        if fe < best.1 {
            best = (end, fe);
        }
    }
    Ok(best)
}

/// Bandwidth search interval for outcomes `y`.
pub fn bandwidth_bracket(y: &[f64]) -> Result<(f64, f64)> {
    let (lo, hi) = y
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if !(range > 0.0 && range.is_finite()) {
        return Err(Error::DegenerateSample("outcomes have zero range".into()));
    }
    Ok((H_FLOOR_FRACTION * range, range))
}

/// Brent search over `ln h` for a single degrees-of-freedom value.
pub fn search_bandwidth(objective: &Objective, nu: DegreesOfFreedom, bracket: (f64, f64)) -> Result<NuRow> {
    let mut failure = None;
    let (ln_h, _) = brent_minimize(
        |ln_h| match KernelSpec::new(nu, ln_h.exp()).and_then(|s| objective.evaluate(s)) {
            Ok(v) => v,
            Err(err) => {
                failure.get_or_insert(err);
                f64::INFINITY
            }
        },
        bracket.0.ln(),
        bracket.1.ln(),
        LOG_H_TOL,
    )?;
    if let Some(err) = failure {
        return Err(err);
    }
    let h = ln_h.exp().clamp(bracket.0, bracket.1);
    Ok(NuRow {
        nu,
        h,
        criterion: objective.evaluate(KernelSpec::new(nu, h)?)?,
    })
}

/// Searches every `nu` in `grid` and returns the overall minimizer.
pub fn grid_search(objective: &Objective, grid: &[DegreesOfFreedom], bracket: (f64, f64)) -> Result<TuningResult> {
    let per_nu = grid
        .par_iter()
        .map(|&nu| search_bandwidth(objective, nu, bracket))
        .collect::<Result<Vec<_>>>()?;
    select(per_nu, objective.skipped_cases(), bracket)
}

fn select(per_nu: Vec<NuRow>, skipped_cases: usize, bracket: (f64, f64)) -> Result<TuningResult> {
    let best = per_nu
        .iter()
        .copied()
        .reduce(|a, b| if b.criterion < a.criterion { b } else { a })
        .ok_or_else(|| Error::InvalidArgument("empty degrees-of-freedom grid".into()))?;
    Ok(TuningResult {
        best: KernelSpec::new(best.nu, best.h)?,
        criterion_value: best.criterion,
        per_nu,
        fallback_used: false,
        skipped_cases,
        bracket,
    })
}

/// Multiple one-fit grid search over the full degrees-of-freedom grid.
pub fn multiple_one_fit_grid_search(model: &IdrModel, data: &TrainingData) -> Result<TuningResult> {
    let objective = Objective::one_fit(model, data, ScoreKind::Logs)?;
    grid_search(&objective, &NU_GRID, bandwidth_bracket(data.y())?)
}

/// Moderated grid search with the one-fit criterion.
pub fn moderated_grid_search(model: &IdrModel, data: &TrainingData) -> Result<TuningResult> {
    let objective = Objective::one_fit(model, data, ScoreKind::Logs)?;
    moderated_search(&objective, data.y())
}

/// Moderated search for an arbitrary objective. If the optimal bandwidth
/// for `nu = 2` or the Gaussian kernel degenerates towards zero, returns a
/// Gaussian kernel with Silverman's bandwidth computed from `outcomes`;
/// otherwise searches the full grid.
pub fn moderated_search(objective: &Objective, outcomes: &[f64]) -> Result<TuningResult> {
    let bracket = bandwidth_bracket(outcomes)?;
    let probes = [DegreesOfFreedom::Finite(2.0), DegreesOfFreedom::Infinite];
    let probe_rows = probes
        .par_iter()
        .map(|&nu| search_bandwidth(objective, nu, bracket))
        .collect::<Result<Vec<_>>>()?;
    let floor = DEGENERATION_FACTOR * bracket.0;
    if probe_rows.iter().any(|row| row.h < floor) {
        let h = silverman_bandwidth(outcomes)?;
        let best = KernelSpec::gaussian(h)?;
        return Ok(TuningResult {
            best,
            criterion_value: objective.evaluate(best)?,
            per_nu: probe_rows,
            fallback_used: true,
            skipped_cases: objective.skipped_cases(),
            bracket,
        });
    }
    let rest: Vec<DegreesOfFreedom> = NU_GRID.into_iter().filter(|nu| !probes.contains(nu)).collect();
    let mut rows = rest
        .par_iter()
        .map(|&nu| search_bandwidth(objective, nu, bracket))
        .collect::<Result<Vec<_>>>()?;
    rows.insert(0, probe_rows[0]);
    rows.push(probe_rows[1]);
    select(rows, objective.skipped_cases(), bracket)
}

/// Silverman's rule of thumb `0.9 min(sd, IQR / 1.34) n^(-1/5)`.
///
/// When the interquartile range is zero the standard deviation alone is used.
pub fn silverman_bandwidth(sample: &[f64]) -> Result<f64> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::DegenerateSample("Silverman's rule needs at least two values".into()));
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("sample"));
    }
    let mean = sample.iter().sum::<f64>() / n as f64;
    let sd = (sample.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    if !(sd > 0.0) {
        return Err(Error::DegenerateSample("sample has zero spread".into()));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = type7_quantile(&sorted, 0.75) - type7_quantile(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Ok(0.9 * spread * (n as f64).powf(-0.2))
}

/// Linearly interpolated sample quantile of a sorted sample.
fn type7_quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    match sorted.get(i + 1) {
        Some(&next) => sorted[i] + frac * (next - sorted[i]),
        None => sorted[i],
    }
}
