//! Gamma simulation testbed and the empirical consistency experiment.
//!
//! Covariates are `X ~ Uniform(0, 10)` and outcomes
//! `Y | X ~ Gamma(shape = sqrt(X), scale = min(max(X, 2), 8))`.
//!
//! Sampling is reproducible per seed: the generator is ChaCha8
//! (`rand_chacha::ChaCha8Rng::seed_from_u64`). Each case draws `X` as `10 U`
//! with `U` uniform on the open interval (0, 1), then `Y` with
//! `rand_distr::Gamma`, which uses the Marsaglia-Tsang squeeze method for
//! shape at least 1 and, for shape below 1, draws with shape + 1 and
//! multiplies by `U^(1/shape)`.

use std::io::Write;
use std::path::Path;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_lr;

use crate::error::{Error, Result};
use crate::idr;
use crate::quadrature::{integrate, Piece};
use crate::smoothing::smooth;
use crate::types::{DegreesOfFreedom, KernelSpec, TrainingData};

/// Lower and upper end of the covariate support.
pub const X_RANGE: (f64, f64) = (0.0, 10.0);

/// Bandwidth constant `c` in `h_n = c n^(-1/3)`.
pub const CONSISTENCY_BANDWIDTH_CONSTANT: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("sample size must be at least 1".into()));
        }
        Ok(Self { n, seed })
    }
}

/// Gamma shape at covariate `x`.
pub fn shape(x: f64) -> f64 {
    x.sqrt()
}

/// Gamma scale at covariate `x`.
pub fn scale(x: f64) -> f64 {
    x.clamp(2.0, 8.0)
}

/// Draws `config.n` pairs from the simulation model.
pub fn simulate(config: SimConfig) -> Result<TrainingData> {
    if config.n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut x = Vec::with_capacity(config.n);
    let mut y = Vec::with_capacity(config.n);
    for _ in 0..config.n {
        let u: f64 = rng.sample(Open01);
        let xi = X_RANGE.1 * u;
        let gamma = Gamma::new(shape(xi), scale(xi)).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        x.push(xi);
        y.push(gamma.sample(&mut rng));
    }
    TrainingData::new(x, y)
}

/// True conditional CDF of `Y` given `X = x`.
pub fn true_cdf(x: f64, y: f64) -> Result<f64> {
    if !(x > X_RANGE.0 && x < X_RANGE.1) {
        return Err(Error::InvalidArgument(format!("covariate {x} outside (0, 10)")));
    }
    if y.is_nan() {
        return Err(Error::NonFinite("outcome"));
    }
    if y <= 0.0 {
        return Ok(0.0);
    }
    if y == f64::INFINITY {
        return Ok(1.0);
    }
    Ok(gamma_lr(shape(x), y / scale(x)))
}

/// True conditional quantile by bisection on [`true_cdf`].
pub fn true_quantile(x: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("level {alpha} outside (0, 1)")));
    }
    let mut lo = 0.0;
    let mut hi = scale(x) * (shape(x) + 1.0);
    let mut expansions = 0;
    while true_cdf(x, hi)? < alpha {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 200 {
            return Err(Error::Bracketing(alpha));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if true_cdf(x, mid)? < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Outcome distribution of `Y` given that `X` falls in `[a, b]`: the average
/// of [`true_cdf`] over the interval.
pub fn binned_true_cdf(a: f64, b: f64, y: f64) -> Result<f64> {
    if !(a < b) || a < X_RANGE.0 || b > X_RANGE.1 {
        return Err(Error::InvalidArgument(format!("invalid covariate bin [{a}, {b}]")));
    }
    if y <= 0.0 {
        return Ok(0.0);
    }
    // Kinks of the scale clamp are used as breakpoints.
    let mut cuts = vec![a];
    cuts.extend([2.0, 8.0].into_iter().filter(|&c| c > a && c < b));
    cuts.push(b);
    let pieces: Vec<Piece> = cuts.windows(2).map(|w| Piece::Finite(w[0], w[1])).collect();
    let f = |x: f64| gamma_lr(shape(x), y / scale(x));
    Ok(integrate(f, &pieces, 1e-12 * (b - a), 10_000)? / (b - a))
}

/// Result of comparing binned empirical outcome distributions with the
/// true binned CDF.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DkwReport {
    /// Per bin: (lower edge, upper edge, cases, sup deviation, band half-width).
    pub bins: Vec<(f64, f64, usize, f64, f64)>,
    pub passed: bool,
}

/// Dvoretzky-Kiefer-Wolfowitz check on `n_bins` equal-width covariate bins,
/// with a Bonferroni correction so that the whole family holds at
/// `confidence`.
pub fn dkw_band_check(data: &TrainingData, n_bins: usize, confidence: f64) -> Result<DkwReport> {
    if n_bins == 0 || !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidArgument("need at least one bin and confidence in (0, 1)".into()));
    }
    let width = (X_RANGE.1 - X_RANGE.0) / n_bins as f64;
    let mut groups = vec![Vec::new(); n_bins];
    for (x, y) in data.pairs() {
        let b = (((x - X_RANGE.0) / width) as usize).min(n_bins - 1);
        groups[b].push(y);
    }
    let alpha = (1.0 - confidence) / n_bins as f64;
    let bins = groups
        .into_par_iter()
        .enumerate()
        .map(|(b, mut ys)| {
            let lo = X_RANGE.0 + b as f64 * width;
            let hi = lo + width;
            if ys.is_empty() {
                return Ok((lo, hi, 0, 0.0, f64::INFINITY));
            }
            ys.sort_by(f64::total_cmp);
            let m = ys.len() as f64;
            let mut sup: f64 = 0.0;
            for (i, &y) in ys.iter().enumerate() {
                let f = binned_true_cdf(lo, hi, y)?;
                sup = sup.max((f - i as f64 / m).abs()).max(((i + 1) as f64 / m - f).abs());
            }
            let band = ((2.0 / alpha).ln() / (2.0 * m)).sqrt();
            Ok((lo, hi, ys.len(), sup, band))
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = bins.iter().all(|&(_, _, _, sup, band)| sup <= band);
    Ok(DkwReport { bins, passed })
}

/// Evaluation grid of the consistency experiment: covariates inside (1, 9)
/// and, at each, outcomes spanning the true 1% to 99% quantiles.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalGrid {
    pub points: Vec<(f64, Vec<f64>)>,
}

impl EvalGrid {
    pub fn interior(n_x: usize, n_y: usize) -> Result<Self> {
        if n_x < 1 || n_y < 2 {
            return Err(Error::InvalidArgument("grid needs at least one x and two y values".into()));
        }
        let points = (0..n_x)
            .map(|i| {
                let x = 1.0 + 8.0 * (i as f64 + 0.5) / n_x as f64;
                let lo = true_quantile(x, 0.01)?;
                let hi = true_quantile(x, 0.99)?;
                let ys = (0..n_y)
                    .map(|j| lo + (hi - lo) * j as f64 / (n_y - 1) as f64)
                    .collect();
                Ok((x, ys))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { points })
    }
}

impl Default for EvalGrid {
    fn default() -> Self {
        Self::interior(40, 60).expect("default grid is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub n: usize,
    pub seed: u64,
    pub sup_error_basic: f64,
    pub sup_error_smooth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTable {
    pub rows: Vec<ErrorRow>,
}

/// Median sup errors for one sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorSummary {
    pub n: usize,
    pub median_basic: f64,
    pub median_smooth: f64,
}

impl ErrorTable {
    pub fn medians(&self) -> Vec<ErrorSummary> {
        let mut sizes: Vec<usize> = self.rows.iter().map(|r| r.n).collect();
        sizes.sort_unstable();
        sizes.dedup();
        sizes
            .into_iter()
            .map(|n| {
                let pick = |f: fn(&ErrorRow) -> f64| {
                    median(self.rows.iter().filter(|r| r.n == n).map(f).collect())
                };
                ErrorSummary {
                    n,
                    median_basic: pick(|r| r.sup_error_basic),
                    median_smooth: pick(|r| r.sup_error_smooth),
                }
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m == 0 {
        f64::NAN
    } else if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Bandwidth `c n^(-1/3)` used for sample size `n`.
pub fn consistency_bandwidth(n: usize) -> f64 {
    CONSISTENCY_BANDWIDTH_CONSTANT * (n as f64).powf(-1.0 / 3.0)
}

/// Sup errors of basic and Gaussian-smoothed EasyUQ against the true
/// conditional CDF over `grid`, for every size and seed.
pub fn consistency_experiment(sizes: &[usize], seeds: &[u64], grid: &EvalGrid) -> Result<ErrorTable> {
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("sizes must be strictly increasing".into()));
    }
    let truth: Vec<Vec<f64>> = grid
        .points
        .iter()
        .map(|(x, ys)| ys.iter().map(|&y| true_cdf(*x, y)).collect())
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(sizes.len() * seeds.len());
    for &n in sizes {
        let spec = KernelSpec::new(DegreesOfFreedom::Infinite, consistency_bandwidth(n))?;
        // Seeds run one at a time; a fitted model at the largest size is large.
        for &seed in seeds {
            let data = simulate(SimConfig::new(n, seed)?)?;
            let model = idr::fit(&data)?;
            let errors = grid
                .points
                .par_iter()
                .zip(&truth)
                .map(|((x, ys), true_row)| {
                    let step = idr::predict(&model, *x)?;
                    let mix = smooth(&step, spec);
                    let mut basic: f64 = 0.0;
                    let mut smooth_err: f64 = 0.0;
                    for (&y, &f) in ys.iter().zip(true_row) {
                        basic = basic.max((step.cdf(y) - f).abs());
                        smooth_err = smooth_err.max((mix.cdf(y) - f).abs());
                    }
                    Ok((basic, smooth_err))
                })
                .collect::<Result<Vec<_>>>()?;
            let (b, s) = errors
                .into_iter()
                .fold((0.0f64, 0.0f64), |(b, s), (eb, es)| (b.max(eb), s.max(es)));
            rows.push(ErrorRow {
                n,
                seed,
                sup_error_basic: b,
                sup_error_smooth: s,
            });
        }
    }
    Ok(ErrorTable { rows })
}

/// Writes `(x, y)` pairs as CSV with a header row.
pub fn write_data_csv<W: Write>(data: &TrainingData, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x", "y"])?;
    for (x, y) in data.pairs() {
        w.write_record([format!("{x:e}"), format!("{y:e}")])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_data_csv_file(data: &TrainingData, path: &Path) -> Result<()> {
    write_data_csv(data, std::fs::File::create(path)?)
}
