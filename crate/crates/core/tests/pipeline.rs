use easyuq::idr;
use easyuq::scoring::{crps_mixture, crps_step};
use easyuq::simulation::{simulate, SimConfig};
use easyuq::smoothing::smooth;
use easyuq::tuning::{
    bandwidth_bracket, brent_minimize, loo_cv_criterion, moderated_grid_search, multiple_one_fit_grid_search,
    one_fit_criterion, LOG_H_TOL,
};
use easyuq::workflow::{
    evaluate_basic_easyuq, parse_hypergrid, run_algorithm1, Dataset, IdentityPredictor, SplitPlan,
    WorkflowReport,
};
use easyuq::{DegreesOfFreedom, IdrModel, KernelSpec, TrainingData};
use proptest::prelude::*;

fn sim(n: usize, seed: u64) -> TrainingData {
    simulate(SimConfig::new(n, seed).unwrap()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn basic_workflow_matches_direct_fit() {
    let data = sim(400, 3);
    let ds = Dataset::from_training(&data);
    let plan = SplitPlan::new(3, 5).unwrap();
    let grid = parse_hypergrid("").unwrap();
    let report = evaluate_basic_easyuq(&ds, &IdentityPredictor, &grid, &plan).unwrap();
    for record in &report.splits {
        let idx = plan.split(data.len(), record.split).unwrap();
        let refit: Vec<usize> = idx.train.iter().chain(&idx.validation).copied().collect();
        let model = idr::fit(&data.subset(&refit).unwrap()).unwrap();
        let test = data.subset(&idx.test).unwrap();
        let direct = test
            .pairs()
            .map(|(x, y)| crps_step(&idr::predict(&model, x).unwrap(), y))
            .sum::<f64>()
            / test.len() as f64;
        assert!(rel(record.test_crps, direct) < 1e-12, "{} vs {direct}", record.test_crps);
    }
}

#[test]
fn smooth_and_basic_crps_are_close() {
    let ds = Dataset::from_training(&sim(500, 8));
    let plan = SplitPlan::new(4, 1).unwrap();
    let grid = parse_hypergrid("").unwrap();
    let smooth_report = run_algorithm1(&ds, &IdentityPredictor, &grid, &plan).unwrap();
    let basic = evaluate_basic_easyuq(&ds, &IdentityPredictor, &grid, &plan).unwrap();
    assert!(smooth_report.failures.is_empty());
    assert!(rel(smooth_report.grand_mean_crps, basic.grand_mean_crps) < 0.15);
    assert!(smooth_report.grand_mean_logs.unwrap().is_finite());
}

#[test]
fn smooth_crps_uses_selected_kernel() {
    let data = sim(300, 12);
    let ds = Dataset::from_training(&data);
    let plan = SplitPlan::new(2, 2).unwrap();
    let report = run_algorithm1(&ds, &IdentityPredictor, &parse_hypergrid("").unwrap(), &plan).unwrap();
    let record = &report.splits[0];
    let idx = &record.indices;
    let refit: Vec<usize> = idx.train.iter().chain(&idx.validation).copied().collect();
    let model = idr::fit(&data.subset(&refit).unwrap()).unwrap();
    let spec = record.kernel.unwrap();
    let test = data.subset(&idx.test).unwrap();
    let direct = test
        .pairs()
        .map(|(x, y)| crps_mixture(&smooth(&idr::predict(&model, x).unwrap(), spec), y).unwrap())
        .sum::<f64>()
        / test.len() as f64;
    assert!(rel(record.test_crps, direct) < 1e-12);
}

#[test]
fn workflow_is_deterministic() {
    let ds = Dataset::from_training(&sim(250, 21));
    let plan = SplitPlan::new(3, 77).unwrap();
    let grid = parse_hypergrid("scale=1;scale=0.5").unwrap();
    let a = run_algorithm1(&ds, &IdentityPredictor, &grid, &plan).unwrap();
    let b = run_algorithm1(&ds, &IdentityPredictor, &grid, &plan).unwrap();
    assert_eq!(a, b);
    let c = run_algorithm1(&ds, &IdentityPredictor, &grid, &SplitPlan::new(3, 78).unwrap()).unwrap();
    assert_ne!(a.splits[0].indices, c.splits[0].indices);
}

#[test]
fn single_grid_entry_is_always_selected() {
    let ds = Dataset::from_training(&sim(200, 4));
    let plan = SplitPlan::new(2, 0).unwrap();
    let grid = parse_hypergrid("scale=1").unwrap();
    let r = evaluate_basic_easyuq(&ds, &IdentityPredictor, &grid, &plan).unwrap();
    for s in &r.splits {
        assert_eq!(s.selected, 0);
        assert_eq!(s.candidates.len(), 1);
        assert_eq!(s.hyperparameters, grid[0]);
    }
}

#[test]
fn reports_and_models_round_trip_through_json() {
    let data = sim(150, 6);
    let model = idr::fit(&data).unwrap();
    let text = easyuq::json::to_string(&model).unwrap();
    let back: IdrModel = serde_json::from_str(&text).unwrap();
    assert_eq!(back, model);

    let ds = Dataset::from_training(&data);
    let plan = SplitPlan::new(2, 9).unwrap();
    let report = run_algorithm1(&ds, &IdentityPredictor, &parse_hypergrid("").unwrap(), &plan).unwrap();
    let text = easyuq::json::to_string_pretty(&report).unwrap();
    let back: WorkflowReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, report);
}

#[test]
fn moderated_equals_multiple_on_continuous_data() {
    let data = sim(300, 15);
    let model = idr::fit(&data).unwrap();
    let multiple = multiple_one_fit_grid_search(&model, &data).unwrap();
    let moderated = moderated_grid_search(&model, &data).unwrap();
    assert!(!moderated.fallback_used);
    assert_eq!(moderated.best, multiple.best);
    assert_eq!(moderated.criterion_value, multiple.criterion_value);
}

#[test]
fn one_fit_and_cross_validation_agree_in_scale() {
    let data = sim(50, 30);
    let model = idr::fit(&data).unwrap();
    let (lo, hi) = bandwidth_bracket(data.y()).unwrap();
    let nu = DegreesOfFreedom::Infinite;
    let minimise = |f: &dyn Fn(KernelSpec) -> f64| {
        brent_minimize(|t| f(KernelSpec::new(nu, t.exp()).unwrap()), lo.ln(), hi.ln(), LOG_H_TOL)
            .unwrap()
            .0
            .exp()
    };
    let h_of = minimise(&|k| one_fit_criterion(&model, &data, k).unwrap());
    let h_cv = minimise(&|k| loo_cv_criterion(&data, k).unwrap());
    let ratio = h_of / h_cv;
    assert!((0.5..=2.0).contains(&ratio), "one-fit h {h_of}, cv h {h_cv}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn splits_partition_the_sample(n in 10usize..400, s in 0usize..20, seed in any::<u64>()) {
        let plan = SplitPlan::new(20, seed).unwrap();
        let idx = plan.split(n, s).unwrap();
        let mut all: Vec<usize> = idx.train.iter().chain(&idx.validation).chain(&idx.test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        prop_assert!(!idx.train.is_empty() && !idx.validation.is_empty() && !idx.test.is_empty());
    }

    #[test]
    fn simulated_data_stays_in_range(n in 1usize..200, seed in any::<u64>()) {
        let d = sim(n, seed);
        prop_assert_eq!(d.len(), n);
        prop_assert!(d.x().iter().all(|&x| x > 0.0 && x < 10.0));
        prop_assert!(d.y().iter().all(|&y| y > 0.0 && y.is_finite()));
    }
}

#[test]
fn simulated_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sim.csv");
    let data = sim(120, 44);
    easyuq::simulation::write_data_csv_file(&data, &path).unwrap();
    assert_eq!(easyuq::io::read_training_csv_path(&path).unwrap(), data);
    let ds = Dataset::from_csv_path(&path, None).unwrap();
    assert_eq!(ds.outcomes(), data.y());
}
