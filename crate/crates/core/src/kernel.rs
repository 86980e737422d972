//! Standardized Student-t and Gaussian kernels.
//!
//! Student-t CDFs use the finite trigonometric series for integer degrees of
//! freedom (every value on the tuning grid) and the regularized incomplete
//! beta function otherwise. The Gaussian CDF goes through `erfc`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use statrs::function::beta::beta_reg;
use libm::erfc;
use statrs::function::gamma::ln_gamma;

use crate::types::DegreesOfFreedom;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Largest integer degrees of freedom handled by the closed-form series.
const MAX_SERIES_NU: u32 = 200;

#[derive(Debug, Clone, Copy)]
enum Kind {
    Gaussian,
    StudentT {
        nu: f64,
        norm: f64,
        ln_norm: f64,
        /// `(nu + 1) / 2`
        half_power: f64,
        integer: Option<u32>,
    },
}

/// A unit-scale symmetric kernel with precomputed normalizing constants.
#[derive(Debug, Clone, Copy)]
pub struct Kernel {
    kind: Kind,
}

impl Kernel {
    pub fn new(nu: DegreesOfFreedom) -> Self {
        let kind = match nu {
            DegreesOfFreedom::Infinite => Kind::Gaussian,
            DegreesOfFreedom::Finite(nu) => {
                let ln_norm = ln_gamma((nu + 1.0) / 2.0) - 0.5 * (PI * nu).ln() - ln_gamma(nu / 2.0);
                let integer = (nu.fract() == 0.0 && nu <= MAX_SERIES_NU as f64).then_some(nu as u32);
                Kind::StudentT {
                    nu,
                    norm: ln_norm.exp(),
                    ln_norm,
                    half_power: (nu + 1.0) / 2.0,
                    integer,
                }
            }
        };
        Self { kind }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self.kind, Kind::Gaussian)
    }

    #[inline]
    pub fn pdf(&self, u: f64) -> f64 {
        match self.kind {
            Kind::Gaussian => FRAC_1_SQRT_2PI * (-0.5 * u * u).exp(),
            Kind::StudentT {
                nu,
                norm,
                half_power,
                integer,
                ..
            } => {
                let base = 1.0 + u * u / nu;
                match integer {
                    // (nu + 1) / 2 is an integer for odd nu and a half-integer for even nu.
                    Some(k) if k % 2 == 1 => norm / base.powi(((k + 1) / 2) as i32),
                    Some(k) => norm / (base.powi((k / 2) as i32) * base.sqrt()),
                    None => norm * base.powf(-half_power),
                }
            }
        }
    }

    #[inline]
    pub fn ln_pdf(&self, u: f64) -> f64 {
        match self.kind {
            Kind::Gaussian => -LN_SQRT_2PI - 0.5 * u * u,
            Kind::StudentT {
                nu,
                ln_norm,
                half_power,
                ..
            } => ln_norm - half_power * (u * u / nu).ln_1p(),
        }
    }

    #[inline]
    pub fn cdf(&self, u: f64) -> f64 {
        match self.kind {
            Kind::Gaussian => 0.5 * erfc(-u * FRAC_1_SQRT_2),
            Kind::StudentT { nu, integer, .. } => match integer {
                Some(k) => student_t_cdf_series(u, k),
                None => student_t_cdf_beta(u, nu),
            },
        }
    }

    /// Survival function `1 - cdf(u)`, evaluated without cancellation near 1.
    #[inline]
    pub fn sf(&self, u: f64) -> f64 {
        self.cdf(-u)
    }

    /// Degrees of freedom, infinite for the Gaussian.
    pub fn nu(&self) -> f64 {
        match self.kind {
            Kind::Gaussian => f64::INFINITY,
            Kind::StudentT { nu, .. } => nu,
        }
    }
}

/// Student-t CDF for integer degrees of freedom via the finite series in
/// `theta = atan(t / sqrt(nu))`.
fn student_t_cdf_series(t: f64, nu: u32) -> f64 {
    let nu_f = f64::from(nu);
    let at = t.abs();
    if at == f64::INFINITY {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    let denom = nu_f + at * at;
    let sin = at / denom.sqrt();
    let cos2 = nu_f / denom;
    // Probability of |T| <= |t|.
    let inner = if nu % 2 == 1 {
        let theta = (at / nu_f.sqrt()).atan();
        let mut sum = 0.0;
        if nu > 1 {
            let mut term = 1.0;
            sum = 1.0;
            for k in 1..=((nu - 3) / 2) {
                let k = f64::from(k);
                term *= cos2 * (2.0 * k) / (2.0 * k + 1.0);
                sum += term;
            }
            sum *= sin * cos2.sqrt();
        }
        2.0 / PI * (theta + sum)
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..=((nu - 2) / 2) {
            let k = f64::from(k);
            term *= cos2 * (2.0 * k - 1.0) / (2.0 * k);
            sum += term;
        }
        sin * sum
    };
    let inner = inner.min(1.0);
    if t >= 0.0 {
        0.5 + 0.5 * inner
    } else {
        0.5 - 0.5 * inner
    }
}

fn student_t_cdf_beta(t: f64, nu: f64) -> f64 {
    if t.is_infinite() {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    let x = nu / (nu + t * t);
    let tail = 0.5 * beta_reg(nu / 2.0, 0.5, x);
    if t < 0.0 {
        tail
    } else {
        1.0 - tail
    }
}
