//! Proper scoring rules: CRPS for step and mixture distributions, the
//! logarithmic score for mixtures, and mean-score aggregation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, Piece};
use crate::types::{MixtureDistribution, StepCdf};

/// Absolute tolerance of the mixture CRPS quadrature.
pub const CRPS_QUADRATURE_TOL: f64 = 1e-9;

const MAX_QUADRATURE_INTERVALS: usize = 50_000;

/// Breakpoints closer than this many bandwidths are merged.
const BREAKPOINT_SPACING: f64 = 4.0;

/// Distance, in bandwidths, from the outermost component to the tail pieces.
const TAIL_OFFSET: f64 = 8.0;

/// Which proper scoring rule to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    /// Logarithmic score.
    #[default]
    Logs,
    Crps,
}

impl fmt::Display for ScoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScoreKind::Logs => "logs",
            ScoreKind::Crps => "crps",
        })
    }
}

impl FromStr for ScoreKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "logs" | "log" => Ok(ScoreKind::Logs),
            "crps" => Ok(ScoreKind::Crps),
            other => Err(Error::InvalidArgument(format!("unknown score '{other}'"))),
        }
    }
}

/// Scores a mixture at `y` with the chosen rule.
pub fn score_mixture(kind: ScoreKind, mix: &MixtureDistribution, y: f64) -> Result<f64> {
    match kind {
        ScoreKind::Logs => Ok(logs_mixture(mix, y)),
        ScoreKind::Crps => crps_mixture(mix, y),
    }
}

/// Mean of a collection of case scores.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    pub mean_score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_case: Option<Vec<f64>>,
    pub n_cases: usize,
    /// Cases with an infinite score.
    pub n_infinite: usize,
}

impl ScoreReport {
    pub fn without_cases(mut self) -> Self {
        self.per_case = None;
        self
    }
}

/// Arithmetic mean of `scores`; an infinite case makes the mean infinite.
pub fn mean_score(scores: &[f64]) -> Result<ScoreReport> {
    if scores.is_empty() {
        return Err(Error::EmptySample);
    }
    let sum: f64 = scores.iter().sum();
    Ok(ScoreReport {
        mean_score: sum / scores.len() as f64,
        per_case: Some(scores.to_vec()),
        n_cases: scores.len(),
        n_infinite: scores.iter().filter(|s| s.is_infinite()).count(),
    })
}

/// CRPS of a step CDF, from the representation
/// `E|X - y| - E|X - X'| / 2` with prefix sums over the sorted support.
pub fn crps_step(cdf: &StepCdf, y: f64) -> f64 {
    let mut abs_dev = 0.0;
    let mut half_spread = 0.0;
    // Running sum_{l<j} w_l (t_j - t_l), updated without cancellation.
    let mut lower_dev = 0.0;
    let mut lower_mass = 0.0;
    let mut prev_t = f64::NAN;
    for (t, w) in cdf.support() {
        if lower_mass > 0.0 {
            lower_dev += lower_mass * (t - prev_t);
        }
        abs_dev += w * (t - y).abs();
        half_spread += w * lower_dev;
        lower_mass += w;
        prev_t = t;
    }
    (abs_dev - half_spread).max(0.0)
}

/// CRPS of a kernel mixture by adaptive quadrature of
/// `int (F(z) - 1{y <= z})^2 dz`.
///
/// The integral splits at `y`; the upper part integrates the squared
/// survival function so that neither side loses precision to cancellation.
pub fn crps_mixture(mix: &MixtureDistribution, y: f64) -> Result<f64> {
    let spec = mix.kernel();
    let nu = spec.nu.value();
    if nu <= 1.0 {
        return Err(Error::InfiniteFirstMoment(nu));
    }
    if !y.is_finite() {
        return Err(Error::NonFinite("outcome"));
    }
    let h = spec.h;
    let (first, last) = mix.location_range();
    let lo = first - TAIL_OFFSET * h;
    let hi = last + TAIL_OFFSET * h;

    let mut points = vec![lo];
    let mut prev = first;
    points.push(first);
    for &loc in mix.locations() {
        if loc - prev >= BREAKPOINT_SPACING * h {
            points.push(loc);
            prev = loc;
        }
    }
    if last > prev {
        points.push(last);
    }
    points.push(hi);
    let split = points.partition_point(|&p| p < y);
    if split == 0 || split == points.len() || points[split] != y {
        points.insert(split, y);
    }

    let mut pieces = Vec::with_capacity(points.len() + 1);
    pieces.push(Piece::Lower {
        end: points[0],
        scale: h,
    });
    for w in points.windows(2) {
        pieces.push(Piece::Finite(w[0], w[1]));
    }
    pieces.push(Piece::Upper {
        start: points[points.len() - 1],
        scale: h,
    });

    let integrand = |z: f64| {
        if z < y {
            let f = mix.cdf(z);
            f * f
        } else {
            let s = mix.sf(z);
            s * s
        }
    };
    let tol = CRPS_QUADRATURE_TOL.max(1e-15 * (hi - lo).max(y.abs()));
    let value = integrate(integrand, &pieces, tol, MAX_QUADRATURE_INTERVALS)?;
    Ok(value.max(0.0))
}

/// Logarithmic score `-ln f(y)`; `+inf` when the density vanishes.
pub fn logs_mixture(mix: &MixtureDistribution, y: f64) -> f64 {
    let ln_d = mix.ln_density(y);
    if ln_d == f64::NEG_INFINITY || ln_d.is_nan() {
        f64::INFINITY
    } else {
        -ln_d
    }
}
