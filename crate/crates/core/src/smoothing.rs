//! Smooth EasyUQ: kernel smoothing of discrete predictive distributions.
//!
//! Convolving a step CDF with a kernel `K_h` yields a mixture that places a
//! translate of `K_h` at every threshold, weighted by that threshold's point
//! mass. Smoothing is linear in the masses, so it preserves stochastic order
//! and commutes with the linear interpolation used between covariate values.

use crate::error::{Error, Result};
use crate::idr;
use crate::kernel::Kernel;
use crate::types::{DegreesOfFreedom, IdrModel, KernelSpec, MixtureDistribution, StepCdf};

/// Half-width of the quantile search bracket, in bandwidths, before tail inflation.
pub const BRACKET_HALF_WIDTH: f64 = 50.0;

/// Bracket expansions attempted before a quantile search gives up.
pub const MAX_BRACKET_EXPANSIONS: usize = 60;

/// Quantile search tolerance in outcome units.
pub const QUANTILE_TOL: f64 = 1e-9;

/// Scaled kernel density `(1/h) kappa_nu(u/h)`.
pub fn kernel_density(spec: KernelSpec, u: f64) -> f64 {
    Kernel::new(spec.nu).pdf(u / spec.h) / spec.h
}

/// Tail inflation of the quantile bracket for heavy-tailed kernels.
pub fn tail_inflation(nu: DegreesOfFreedom) -> f64 {
    match nu {
        DegreesOfFreedom::Infinite => 1.0,
        DegreesOfFreedom::Finite(v) if v <= 5.0 => 10.0,
        DegreesOfFreedom::Finite(_) => 3.0,
    }
}

/// Kernel mixture whose CDF is the convolution of `cdf` with the kernel.
pub fn smooth(cdf: &StepCdf, spec: KernelSpec) -> MixtureDistribution {
    let (locations, weights) = cdf.support().unzip();
    MixtureDistribution::new_unchecked(locations, weights, spec)
}

/// Smooth EasyUQ prediction at model output `x`.
pub fn predict_smooth(model: &IdrModel, x: f64, spec: KernelSpec) -> Result<MixtureDistribution> {
    Ok(smooth(&idr::predict(model, x)?, spec))
}

impl MixtureDistribution {
    /// Predictive density at `y`.
    pub fn density(&self, y: f64) -> f64 {
        let h = self.kernel().h;
        let inv_h = 1.0 / h;
        let k = &self.unit;
        self.locations()
            .iter()
            .zip(self.weights())
            .map(|(&loc, &w)| w * k.pdf((y - loc) * inv_h))
            .sum::<f64>()
            * inv_h
    }

    /// Log density at `y`, stable when every component underflows.
    pub fn ln_density(&self, y: f64) -> f64 {
        let d = self.density(y);
        if d > 1e-280 {
            return d.ln();
        }
        let h = self.kernel().h;
        let k = &self.unit;
        let terms = self
            .locations()
            .iter()
            .zip(self.weights())
            .map(|(&loc, &w)| w.ln() + k.ln_pdf((y - loc) / h));
        log_sum_exp(terms) - h.ln()
    }

    /// Predictive CDF at `y`.
    pub fn cdf(&self, y: f64) -> f64 {
        let inv_h = 1.0 / self.kernel().h;
        let k = &self.unit;
        let v: f64 = self
            .locations()
            .iter()
            .zip(self.weights())
            .map(|(&loc, &w)| w * k.cdf((y - loc) * inv_h))
            .sum();
        v.clamp(0.0, 1.0)
    }

    /// Survival function `1 - cdf(y)`, summed from component tails.
    pub fn sf(&self, y: f64) -> f64 {
        let inv_h = 1.0 / self.kernel().h;
        let k = &self.unit;
        let v: f64 = self
            .locations()
            .iter()
            .zip(self.weights())
            .map(|(&loc, &w)| w * k.sf((y - loc) * inv_h))
            .sum();
        v.clamp(0.0, 1.0)
    }

    /// Smallest and largest component locations.
    pub fn location_range(&self) -> (f64, f64) {
        let locs = self.locations();
        (locs[0], locs[locs.len() - 1])
    }

    /// Interval expected to hold all but a negligible share of the mass.
    pub fn bracket(&self) -> (f64, f64) {
        let spec = self.kernel();
        let span = BRACKET_HALF_WIDTH * spec.h * tail_inflation(spec.nu);
        let (lo, hi) = self.location_range();
        (lo - span, hi + span)
    }

    /// Quantile at level `alpha` by bracketed bisection.
    pub fn quantile(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "quantile level {alpha} outside (0, 1)"
            )));
        }
        let (mut lo, mut hi) = self.bracket();
        let mut width = hi - lo;
        let mut expansions = 0;
        while self.cdf(lo) > alpha || self.cdf(hi) < alpha {
            if expansions == MAX_BRACKET_EXPANSIONS {
                return Err(Error::Bracketing(alpha));
            }
            width *= 2.0;
            if self.cdf(lo) > alpha {
                lo -= width;
            }
            if self.cdf(hi) < alpha {
                hi += width;
            }
            expansions += 1;
        }
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let c = self.cdf(mid);
            if c < alpha {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= QUANTILE_TOL && (c - alpha).abs() <= 1e-12 {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

pub(crate) fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + terms.map(|t| (t - max).exp()).sum::<f64>().ln()
}
