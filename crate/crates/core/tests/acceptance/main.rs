//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with a
//! nonzero status if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use easyuq::baselines::{fit_single_gaussian, predict_single_gaussian};
use easyuq::pav::{antitonic_fit, minmax_oracle, weighted_minmax_oracle, WeightedSequence};
use easyuq::scoring::{crps_mixture, crps_step, logs_mixture};
use easyuq::simulation::{consistency_experiment, dkw_band_check, simulate, true_cdf, EvalGrid, SimConfig};
use easyuq::smoothing::smooth;
use easyuq::tuning::{
    bandwidth_bracket, moderated_grid_search, moderated_search, multiple_one_fit_grid_search, one_fit_criterion,
    Objective, DEGENERATION_FACTOR,
};
use easyuq::workflow::{run_algorithm1, run_split, Dataset, Hyperparameters, IdentityPredictor, Method, SplitPlan};
use easyuq::{idr, IdrModel, KernelSpec, ScoreKind, StepCdf, TrainingData, NU_GRID};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(elapsed: Duration, budget_secs: u64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < budget_secs as f64, || {
        format!("took {:.1} s, budget {budget_secs} s", elapsed.as_secs_f64())
    })
}

/// Random dataset with frequent ties in both coordinates.
fn random_data(rng: &mut ChaCha8Rng, max_n: usize) -> TrainingData {
    let n = rng.random_range(1..=max_n);
    let x_levels = rng.random_range(1..=n.max(2));
    let tie_y = rng.random_bool(0.5);
    let pairs: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let x = rng.random_range(0..x_levels) as f64 * 0.5 + rng.random_range(-2.0..2.0f64).floor();
            let y = if tie_y {
                rng.random_range(0..6) as f64
            } else {
                x * rng.random_range(0.0..2.0) + rng.random_range(-3.0..3.0)
            };
            (x, y)
        })
        .collect();
    TrainingData::from_pairs(&pairs).unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for bits in 0u32..1 << 10 {
        let seq: Vec<f64> = (0..10).map(|i| f64::from((bits >> i) & 1)).collect();
        let fit = antitonic_fit(&WeightedSequence::unit(seq.clone()).unwrap());
        worst = worst.max(max_abs_diff(&fit, &minmax_oracle(&seq)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let k = rng.random_range(1..=30);
        let values: Vec<f64> = (0..k).map(|_| rng.random_range(-5.0..5.0)).collect();
        let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..3.0)).collect();
        let fit = antitonic_fit(&WeightedSequence::new(values.clone(), weights.clone()).unwrap());
        worst = worst.max(max_abs_diff(&fit, &weighted_minmax_oracle(&values, &weights)));
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    within_budget(start.elapsed(), 30)?;
    Ok(format!("max deviation {worst:.1e}, {:.1} s", start.elapsed().as_secs_f64()))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let slack = 1e-12;
    let mut checks = 0u64;
    for d in 0..1000 {
        let data = random_data(&mut rng, 50);
        let model = idr::fit(&data).map_err(|e| e.to_string())?;
        for r in 1..model.n_covariates() {
            let (above, below) = (model.row(r), model.row(r - 1));
            ensure(above.iter().zip(below).all(|(a, b)| *a <= b + slack), || {
                format!("dataset {d}: column antitonicity violated at row {r}")
            })?;
        }
        let (lo, hi) = (model.unique_x()[0] - 1.0, model.unique_x()[model.n_covariates() - 1] + 1.0);
        for _ in 0..100 {
            let (a, b): (f64, f64) = (rng.random_range(lo..hi), rng.random_range(lo..hi));
            let (x1, x2) = (a.min(b), a.max(b));
            let f1 = idr::predict(&model, x1).map_err(|e| e.to_string())?;
            let f2 = idr::predict(&model, x2).map_err(|e| e.to_string())?;
            ensure(
                f1.cumulative().iter().zip(f2.cumulative()).all(|(p, q)| *q <= p + slack),
                || format!("dataset {d}: step predictions at {x1} and {x2} not ordered"),
            )?;
            let nu = NU_GRID[rng.random_range(0..NU_GRID.len())];
            let h = 10f64.powf(rng.random_range(-2.0..1.0));
            let spec = KernelSpec::new(nu, h).unwrap();
            let (m1, m2) = (smooth(&f1, spec), smooth(&f2, spec));
            let span = (model.thresholds().first() - 3.0 * h, model.thresholds().last() + 3.0 * h);
            for _ in 0..50 {
                let y = rng.random_range(span.0..span.1);
                ensure(m2.cdf(y) <= m1.cdf(y) + slack, || {
                    format!("dataset {d}: smoothed predictions at {x1} and {x2} not ordered at y = {y}")
                })?;
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} smoothed comparisons, no violations"))
}

/// Random antitonic CDF matrix over the model's covariates and thresholds.
fn random_antitonic(rng: &mut ChaCha8Rng, model: &IdrModel) -> IdrModel {
    let m = model.n_thresholds();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(model.n_covariates());
    for _ in 0..model.n_covariates() {
        let mut row: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
        row.sort_by(f64::total_cmp);
        row[m - 1] = 1.0;
        if let Some(prev) = rows.last() {
            for (v, p) in row.iter_mut().zip(prev) {
                *v = v.min(*p);
            }
        }
        rows.push(row);
    }
    IdrModel::from_parts(model.unique_x().to_vec(), model.thresholds().values().to_vec(), rows).unwrap()
}

fn in_sample_crps(model: &IdrModel, data: &TrainingData) -> f64 {
    data.pairs()
        .map(|(x, y)| crps_step(&model.row_cdf(model.row_index(x).unwrap()), y))
        .sum::<f64>()
        / data.len() as f64
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let slack = 1e-12;
    for d in 0..100 {
        let data = random_data(&mut rng, 60);
        let model = idr::fit(&data).map_err(|e| e.to_string())?;
        let best = in_sample_crps(&model, &data);
        // Unconditional empirical CDF in every row.
        let ecdf = easyuq::baselines::ensemble_step_cdf(data.y()).unwrap();
        let uncond = data.y().iter().map(|&y| crps_step(&ecdf, y)).sum::<f64>() / data.len() as f64;
        ensure(best <= uncond + slack, || format!("dataset {d}: EasyUQ {best} > empirical {uncond}"))?;
        for a in 0..100 {
            let random = random_antitonic(&mut rng, &model);
            // Half the alternatives are small perturbations of the fit.
            let alt = if a % 2 == 0 {
                random
            } else {
                let eps = 10f64.powf(rng.random_range(-6.0..-1.0));
                let rows = model
                    .rows()
                    .zip(random.rows())
                    .map(|(p, q)| p.iter().zip(q).map(|(u, v)| (1.0 - eps) * u + eps * v).collect())
                    .collect();
                IdrModel::from_parts(model.unique_x().to_vec(), model.thresholds().values().to_vec(), rows).unwrap()
            };
            let score = in_sample_crps(&alt, &data);
            ensure(best <= score + slack, || format!("dataset {d}: alternative {a} scores {score} < {best}"))?;
        }
    }
    Ok("100 datasets, 10,000 alternatives, no violations".into())
}

fn gaussian_crps(mu: f64, sigma: f64, y: f64) -> f64 {
    let z = (y - mu) / sigma;
    let pdf = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let cdf = 0.5 * libm::erfc(-z / std::f64::consts::SQRT_2);
    sigma * (z * (2.0 * cdf - 1.0) + 2.0 * pdf - 1.0 / std::f64::consts::PI.sqrt())
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let (x, y): (f64, f64) = (rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
        let c = crps_step(&StepCdf::point_mass(x).unwrap(), y);
        ensure(c == (x - y).abs(), || format!("point mass at {x}, y = {y}: {c}"))?;
    }
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let mu = rng.random_range(-10.0..10.0);
        let h = 10f64.powf(rng.random_range(-2.0..1.0));
        let y = mu + h * rng.random_range(-6.0..6.0);
        let mix = smooth(&StepCdf::point_mass(mu).unwrap(), KernelSpec::gaussian(h).unwrap());
        let q = crps_mixture(&mix, y).map_err(|e| e.to_string())?;
        worst = worst.max((q - gaussian_crps(mu, h, y)).abs());
    }
    ensure(worst <= 1e-7, || format!("Gaussian CRPS deviation {worst:e}"))?;
    let mut worst_limit: f64 = 0.0;
    for _ in 0..200 {
        let data = random_data(&mut rng, 20);
        let model = idr::fit(&data).unwrap();
        let x = data.x()[0];
        let cdf = idr::predict(&model, x).unwrap();
        let y = rng.random_range(-5.0..8.0);
        let nu = NU_GRID[rng.random_range(0..NU_GRID.len())];
        let q = crps_mixture(&smooth(&cdf, KernelSpec::new(nu, 1e-6).unwrap()), y).map_err(|e| e.to_string())?;
        worst_limit = worst_limit.max((q - crps_step(&cdf, y)).abs());
    }
    ensure(worst_limit <= 1e-4, || format!("h = 1e-6 deviation {worst_limit:e}"))?;
    let logs = logs_mixture(&smooth(&StepCdf::point_mass(0.0).unwrap(), KernelSpec::gaussian(1.0).unwrap()), 0.0);
    ensure((logs - 0.918939).abs() <= 1e-6 && (logs - 0.5 * (2.0 * std::f64::consts::PI).ln()).abs() <= 1e-9, || {
        format!("standard LogS at centre {logs}")
    })?;
    Ok(format!(
        "Gaussian dev {worst:.1e}, small-h dev {worst_limit:.1e}, LogS {logs:.9}"
    ))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for d in 0..200 {
        let data = random_data(&mut rng, 50);
        let transformed = TrainingData::new(data.x().iter().map(|x| x.exp()).collect(), data.y().to_vec()).unwrap();
        let a = idr::fit(&data).unwrap();
        let b = idr::fit(&transformed).unwrap();
        ensure(a.n_covariates() == b.n_covariates() && a.thresholds() == b.thresholds(), || {
            format!("dataset {d}: shapes differ")
        })?;
        for (ra, rb) in a.rows().zip(b.rows()) {
            worst = worst.max(max_abs_diff(ra, rb));
        }
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.1e}"))
}

fn criterion_6() -> Outcome {
    let p = true_cdf(4.0, 8.0).map_err(|e| e.to_string())?;
    let exact = 1.0 - 3.0 * (-2f64).exp();
    ensure((p - exact).abs() <= 1e-10, || format!("true_cdf(4, 8) = {p}, expected {exact}"))?;
    let data = simulate(SimConfig::new(50_000, 6).unwrap()).map_err(|e| e.to_string())?;
    let report = dkw_band_check(&data, 20, 0.99).map_err(|e| e.to_string())?;
    let ratio = report
        .bins
        .iter()
        .map(|b| b.3 / b.4)
        .fold(0.0, f64::max);
    ensure(report.passed, || format!("DKW band exceeded (worst deviation/band = {ratio:.3})"))?;
    Ok(format!("|true_cdf(4, 8) - exact| = {:.1e}, worst deviation/band = {ratio:.3}", (p - exact).abs()))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let grid = EvalGrid::default();
    let seeds: Vec<u64> = (0..10).collect();
    let table = consistency_experiment(&[250, 1000, 4000], &seeds, &grid).map_err(|e| e.to_string())?;
    ensure(table.rows.iter().all(|r| r.sup_error_basic >= 0.0 && r.sup_error_smooth >= 0.0), || {
        "negative error".into()
    })?;
    let med = table.medians();
    let fmt = |f: fn(&easyuq::simulation::ErrorSummary) -> f64| {
        med.iter().map(|m| format!("{:.4}", f(m))).collect::<Vec<_>>().join(" > ")
    };
    let decreasing = med.windows(2).all(|w| {
        w[1].median_basic < w[0].median_basic && w[1].median_smooth < w[0].median_smooth
    });
    ensure(decreasing, || {
        format!("medians not decreasing: basic {}, smooth {}", fmt(|m| m.median_basic), fmt(|m| m.median_smooth))
    })?;
    within_budget(start.elapsed(), 300)?;
    Ok(format!(
        "basic {}, smooth {}, {:.1} s",
        fmt(|m| m.median_basic),
        fmt(|m| m.median_smooth),
        start.elapsed().as_secs_f64()
    ))
}

/// Three outcome values with heavy ties.
fn discrete_data(rng: &mut ChaCha8Rng, n: usize, jitter: f64) -> TrainingData {
    let pairs: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let x: f64 = rng.random_range(0.0..3.0);
            let p = (x / 3.0).clamp(0.05, 0.95);
            let y = (0..2).filter(|_| rng.random_bool(p)).count() as f64;
            (x, y + jitter * rng.random::<f64>())
        })
        .collect();
    TrainingData::from_pairs(&pairs).unwrap()
}

fn criterion_8() -> Outcome {
    let data = simulate(SimConfig::new(500, 8).unwrap()).map_err(|e| e.to_string())?;
    let model = idr::fit(&data).map_err(|e| e.to_string())?;
    let result = multiple_one_fit_grid_search(&model, &data).map_err(|e| e.to_string())?;
    let (floor, ceil) = bandwidth_bracket(data.y()).unwrap();
    let nu = result.best.nu;
    let at = |h: f64| one_fit_criterion(&model, &data, KernelSpec::new(nu, h).unwrap()).unwrap();
    let (c_lo, c_hi) = (at(floor), at(ceil));
    ensure(result.best.h > floor && result.best.h < ceil, || {
        format!("h = {} not inside ({floor}, {ceil})", result.best.h)
    })?;
    ensure(result.criterion_value < c_lo && result.criterion_value < c_hi, || {
        format!("criterion {} not below ends {c_lo} and {c_hi}", result.criterion_value)
    })?;

    // Exactly discrete outcomes, tuned on held-out cases.
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let train = discrete_data(&mut rng, 300, 0.0);
    let validation = discrete_data(&mut rng, 100, 0.0);
    let dmodel = idr::fit(&train).unwrap();
    let objective = Objective::holdout(&dmodel, &validation, ScoreKind::Logs).unwrap();
    let holdout = moderated_search(&objective, train.y()).map_err(|e| e.to_string())?;
    // Three clusters whose within-tie spread is far below the bracket floor,
    // tuned with the one-fit criterion.
    let jittered = discrete_data(&mut rng, 300, 1e-7);
    let jmodel = idr::fit(&jittered).unwrap();
    let one_fit = moderated_grid_search(&jmodel, &jittered).map_err(|e| e.to_string())?;
    for (label, r) in [("held-out", &holdout), ("one-fit", &one_fit)] {
        ensure(r.fallback_used && r.best.nu == easyuq::DegreesOfFreedom::Infinite, || {
            format!("{label} discrete search did not fall back: {:?}", r.per_nu)
        })?;
        ensure(r.per_nu.iter().any(|row| row.h < DEGENERATION_FACTOR * r.bracket.0), || {
            format!("{label}: no degenerate probe")
        })?;
    }
    Ok(format!(
        "best nu = {}, h = {:.4} in ({floor:.4}, {ceil:.2}); fallback h = {:.4} (held-out), {:.4} (one-fit)",
        nu, result.best.h, holdout.best.h, one_fit.best.h
    ))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for d in 0..100 {
        let n = rng.random_range(2..200);
        let pairs: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                let x: f64 = rng.random_range(-5.0..5.0);
                (x, x + rng.random_range(0.1..4.0) * (rng.random::<f64>() - 0.5))
            })
            .collect();
        let data = TrainingData::from_pairs(&pairs).unwrap();
        let sigma = fit_single_gaussian(&data).map_err(|e| e.to_string())?.sigma;
        let mse = pairs.iter().rev().map(|&(x, y)| (y - x) * (y - x)).sum::<f64>() / n as f64;
        ensure((sigma * sigma - mse).abs() <= 1e-12 * mse.max(1.0), || {
            format!("dataset {d}: sigma^2 {} vs mse {mse}", sigma * sigma)
        })?;
        if d < 20 {
            let step = sigma * 1e-3;
            let mean_logs = |s: f64| {
                let m = easyuq::baselines::SingleGaussianModel { sigma: s };
                pairs
                    .iter()
                    .map(|&(x, y)| logs_mixture(&predict_single_gaussian(&m, x).unwrap(), y))
                    .sum::<f64>()
                    / n as f64
            };
            let (arg, _) = (0..=1500)
                .map(|i| 0.5 * sigma + i as f64 * step)
                .map(|s| (s, mean_logs(s)))
                .fold((f64::NAN, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
            ensure((arg - sigma).abs() <= step, || format!("dataset {d}: grid minimizer {arg} vs {sigma}"))?;
        }
    }
    Ok("100 datasets match the mean squared residual; grid minimizers agree".into())
}

fn criterion_10() -> Outcome {
    let data = simulate(SimConfig::new(2000, 10).unwrap()).map_err(|e| e.to_string())?;
    let dataset = Dataset::from_training(&data);
    let grid: Vec<Hyperparameters> = [1.0, -1.0]
        .iter()
        .map(|&s| [("scale".to_string(), s)].into_iter().collect())
        .collect();
    let plan = SplitPlan::new(20, 10).unwrap();
    let start = Instant::now();
    let report = run_algorithm1(&dataset, &IdentityPredictor, &grid, &plan).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(report.splits.len() == 20 && report.failures.is_empty(), || {
        format!("{} splits, failures {:?}", report.splits.len(), report.failures)
    })?;
    let crps_mean = report.splits.iter().map(|s| s.test_crps).sum::<f64>() / 20.0;
    let logs_mean = report.splits.iter().map(|s| s.test_logs.unwrap()).sum::<f64>() / 20.0;
    ensure(report.grand_mean_crps == crps_mean && report.grand_mean_logs == Some(logs_mean), || {
        "grand mean differs from mean of split means".into()
    })?;
    for record in &report.splits {
        let best = record
            .candidates
            .iter()
            .map(|c| c.validation_score)
            .fold(f64::INFINITY, f64::min);
        ensure(record.candidates[record.selected].validation_score == best, || {
            format!("split {}: selected row is not minimal", record.split)
        })?;
    }
    within_budget(elapsed, 120)?;

    // Canary: scrambling the test outcomes of a split must not change what it selects.
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for record in report.splits.iter().take(4) {
        let mut outcomes = dataset.outcomes().to_vec();
        for &i in &record.indices.test {
            outcomes[i] = rng.random_range(0.0..200.0);
        }
        let perturbed = dataset.with_outcomes(outcomes).unwrap();
        let rerun = run_split(Method::Smooth, &perturbed, &IdentityPredictor, &grid, &plan, record.split)
            .map_err(|e| e.to_string())?;
        ensure(
            rerun.hyperparameters == record.hyperparameters
                && rerun.kernel == record.kernel
                && rerun.candidates == record.candidates,
            || format!("split {}: selection changed after perturbing test outcomes", record.split),
        )?;
        ensure(rerun.test_crps != record.test_crps, || {
            format!("split {}: perturbation did not reach the test scores", record.split)
        })?;
    }
    Ok(format!(
        "grand mean CRPS {:.4}, LogS {:.4}; 20 splits in {:.1} s",
        report.grand_mean_crps,
        logs_mean,
        elapsed.as_secs_f64()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("PAV equals min-max formula", criterion_1),
        ("stochastic monotonicity", criterion_2),
        ("in-sample CRPS optimality", criterion_3),
        ("scoring oracles", criterion_4),
        ("monotone transform invariance", criterion_5),
        ("simulation fidelity", criterion_6),
        ("consistency trend", criterion_7),
        ("tuning behaviour", criterion_8),
        ("single Gaussian closed form", criterion_9),
        ("workflow integrity", criterion_10),
    ];
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        let start = Instant::now();
        match f() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
        eprintln!("  ({:.1} s)", start.elapsed().as_secs_f64());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
