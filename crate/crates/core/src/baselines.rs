//! Reference methods: the Single Gaussian baseline and smoothed raw ensembles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::ScoreKind;
use crate::smoothing::smooth;
use crate::tuning::{bandwidth_bracket, grid_search, Objective, TuningResult};
use crate::types::{unique_thresholds, KernelSpec, MixtureDistribution, StepCdf, TrainingData, NU_GRID};

/// Gaussian centred at the model output with a constant standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleGaussianModel {
    pub sigma: f64,
}

/// Fits the LogS-optimal constant variance, which is the mean squared residual.
pub fn fit_single_gaussian(data: &TrainingData) -> Result<SingleGaussianModel> {
    if data.is_empty() {
        return Err(Error::EmptySample);
    }
    let mse = data.pairs().map(|(x, y)| (y - x).powi(2)).sum::<f64>() / data.len() as f64;
    if !(mse > 0.0) {
        return Err(Error::DegenerateSample("all residuals are zero".into()));
    }
    Ok(SingleGaussianModel { sigma: mse.sqrt() })
}

/// Single-component Gaussian mixture at `x`.
pub fn predict_single_gaussian(model: &SingleGaussianModel, x: f64) -> Result<MixtureDistribution> {
    if !x.is_finite() {
        return Err(Error::NonFinite("model output"));
    }
    MixtureDistribution::new(vec![x], vec![1.0], KernelSpec::gaussian(model.sigma)?)
}

/// Empirical distribution of ensemble members, weighting ties by count.
pub fn ensemble_step_cdf(members: &[f64]) -> Result<StepCdf> {
    let thresholds = unique_thresholds(members)?;
    let mut counts = vec![0.0; thresholds.len()];
    for &m in members {
        let j = thresholds.position(m).expect("member is a threshold");
        counts[j] += 1.0;
    }
    let k = members.len() as f64;
    let mut acc = 0.0;
    let cumulative = counts
        .iter()
        .map(|c| {
            acc += c;
            acc / k
        })
        .collect();
    StepCdf::new(thresholds, cumulative)
}

/// Smoothed ensemble: the member distribution convolved with a kernel.
pub fn smooth_ensemble(members: &[f64], spec: KernelSpec) -> Result<MixtureDistribution> {
    Ok(smooth(&ensemble_step_cdf(members)?, spec))
}

/// Selects the kernel for smoothing raw ensembles by a grid search over the
/// degrees of freedom with the logarithmic score on training cases.
pub fn tune_ensemble_smoothing(ensembles: &[Vec<f64>], outcomes: &[f64]) -> Result<TuningResult> {
    let cdfs = ensembles
        .iter()
        .map(|m| ensemble_step_cdf(m))
        .collect::<Result<Vec<_>>>()?;
    let objective = Objective::direct(&cdfs, outcomes, ScoreKind::Logs)?;
    let pooled: Vec<f64> = ensembles.iter().flatten().chain(outcomes).copied().collect();
    grid_search(&objective, &NU_GRID, bandwidth_bracket(&pooled)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::crps_mixture;
    use std::f64::consts::PI;

    #[test]
    fn sigma_examples() {
        let d = TrainingData::from_pairs(&[(0.0, 1.0), (0.0, -1.0)]).unwrap();
        assert_eq!(fit_single_gaussian(&d).unwrap().sigma, 1.0);
        let d = TrainingData::from_pairs(&[(1.0, 3.0), (1.0, -1.0), (0.0, 2.0), (0.0, -2.0)]).unwrap();
        assert_eq!(fit_single_gaussian(&d).unwrap().sigma, 2.0);
        let d = TrainingData::from_pairs(&[(1.0, 1.0), (2.0, 2.0)]).unwrap();
        assert!(fit_single_gaussian(&d).is_err());
    }

    #[test]
    fn prediction_examples() {
        let m = SingleGaussianModel { sigma: 1.0 };
        let p = predict_single_gaussian(&m, 0.0).unwrap();
        assert!((p.density(0.0) - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        let p = predict_single_gaussian(&m, 3.7).unwrap();
        assert!((p.quantile(0.5).unwrap() - 3.7).abs() < 1e-8);
        // Gaussian CRPS at the centre is sigma (sqrt 2 - 1) / sqrt pi.
        let m = SingleGaussianModel { sigma: 1.7 };
        let q = crps_mixture(&predict_single_gaussian(&m, 2.0).unwrap(), 2.0).unwrap();
        assert!((q - 1.7 * (2f64.sqrt() - 1.0) / PI.sqrt()).abs() < 1e-7);
    }

    #[test]
    fn ensemble_examples() {
        let c = ensemble_step_cdf(&[1.0, 1.0, 2.0]).unwrap();
        assert_eq!(c.thresholds().values(), [1.0, 2.0]);
        assert_eq!(c.cumulative(), [2.0 / 3.0, 1.0]);
        for (m, e) in c.masses().iter().zip([2.0 / 3.0, 1.0 / 3.0]) {
            assert!((m - e).abs() <= 1e-15);
        }
        let c = ensemble_step_cdf(&[4.0; 5]).unwrap();
        assert_eq!(c.masses(), vec![1.0]);
        let c = ensemble_step_cdf(&[3.0, 1.0, 2.0, 0.0]).unwrap();
        assert_eq!(c.masses(), vec![0.25; 4]);
        assert_eq!(c.cumulative().last(), Some(&1.0));
        assert!(ensemble_step_cdf(&[]).is_err());
    }

    #[test]
    fn ensemble_tuning_picks_minimal_row() {
        let ensembles: Vec<Vec<f64>> = (0..40)
            .map(|i| (0..8).map(|j| (i as f64 * 0.37 + j as f64 * 0.61).sin() + i as f64 * 0.1).collect())
            .collect();
        let outcomes: Vec<f64> = (0..40).map(|i| i as f64 * 0.1 + (i as f64 * 1.3).cos() * 0.5).collect();
        let r = tune_ensemble_smoothing(&ensembles, &outcomes).unwrap();
        let min = r.per_nu.iter().map(|row| row.criterion).fold(f64::INFINITY, f64::min);
        assert_eq!(r.criterion_value, min);
    }
}
