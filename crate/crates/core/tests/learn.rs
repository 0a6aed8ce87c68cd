use robust_nav::experiment::{initial_belief, load_or_simulate, prepare_streams, ExperimentConfig};
use robust_nav::filter::{FilterConfig, GaussianBelief, NavModel, StateSpaceModel};
use robust_nav::learn::{
    learn_tolerance, run_phase, BankExecution, BankSettings, LearnError, ToleranceGrid,
};
use robust_nav::nav::ImuSample;
use robust_nav::sim::AlignedMeasurement;

struct Fixture {
    model: NavModel,
    imu: Vec<ImuSample>,
    meas: Vec<AlignedMeasurement>,
    init: GaussianBelief,
}

/// First `len` samples of a default flight, with the default training denial
/// (15 s onward) reachable when `len` is large enough.
fn fixture(seed: u64, len: usize) -> Fixture {
    let cfg = ExperimentConfig::default();
    let model = NavModel::new(cfg.noise.clone(), cfg.jacobians).unwrap();
    let streams = prepare_streams(&cfg, load_or_simulate(&cfg, seed).unwrap()).unwrap();
    let init = initial_belief(&cfg, &model, &streams.flight).unwrap();
    Fixture {
        model,
        imu: streams.flight.imu[..len].to_vec(),
        meas: streams.measurements[..len].to_vec(),
        init,
    }
}

fn settings(execution: BankExecution) -> BankSettings {
    BankSettings {
        execution,
        ..BankSettings::default()
    }
}

#[test]
fn singleton_grid_returns_its_value() {
    let f = fixture(1, 120);
    let grid = ToleranceGrid::new(vec![0.3]).unwrap();
    let out = learn_tolerance(&f.model, &f.imu, &f.meas, &grid, &f.init, &settings(BankExecution::Parallel)).unwrap();
    assert_eq!(out.report.c_hat, 0.3);
    assert_eq!(out.report.n, 119);
}

#[test]
fn parallel_and_sequential_banks_agree_exactly() {
    let f = fixture(2, 300);
    let grid = ToleranceGrid::spaced(2e-4, 1.0, 8, Default::default()).unwrap();
    let par = learn_tolerance(&f.model, &f.imu, &f.meas, &grid, &f.init, &settings(BankExecution::Parallel)).unwrap();
    let seq = learn_tolerance(&f.model, &f.imu, &f.meas, &grid, &f.init, &settings(BankExecution::Sequential)).unwrap();
    assert_eq!(par.report.losses, seq.report.losses);
    assert_eq!(par.report.c_hat, seq.report.c_hat);
}

#[test]
fn online_loss_equals_post_hoc_loss() {
    let f = fixture(3, 250);
    let grid = ToleranceGrid::new(vec![0.0, 0.05, 0.7]).unwrap();
    let out = learn_tolerance(&f.model, &f.imu, &f.meas, &grid, &f.init, &settings(BankExecution::Sequential)).unwrap();
    let n = f.meas.len() - 1;
    let c = f.model.measurement_matrix();
    for (tol, loss) in grid.values().iter().zip(&out.report.losses) {
        let run = run_phase(&f.model, &f.imu[..n], &f.meas[..n], &FilterConfig::with_tolerance(*tol), &f.init).unwrap();
        let preds = run.predictions().unwrap();
        assert_eq!(preds.len(), n + 1);
        let post_hoc: f64 = (1..=n)
            .map(|k| (f.meas[k].y_dvector() - c * preds[k].to_dvector()).norm_squared())
            .sum::<f64>()
            / n as f64;
        let online = loss.unwrap();
        assert!((online - post_hoc).abs() <= 1e-12 * post_hoc, "c = {tol}: {online} vs {post_hoc}");
    }
}

#[test]
fn selected_tolerance_minimizes_the_loss() {
    let f = fixture(4, 1200);
    let grid = ToleranceGrid::default();
    let out = learn_tolerance(&f.model, &f.imu, &f.meas, &grid, &f.init, &settings(BankExecution::Parallel)).unwrap();
    let best = out.report.losses[out.report.c_hat_index()].unwrap();
    for loss in out.report.losses.iter().flatten() {
        assert!(best <= *loss);
    }
    assert!(grid.values().contains(&out.report.c_hat));
}

#[test]
fn ties_go_to_the_smallest_tolerance() {
    // θ for these tolerances is ~1e-150, so 1 − θλ rounds to 1 and both
    // candidates run bit-identical filters.
    let f = fixture(5, 100);
    let grid = ToleranceGrid::new(vec![1e-300, 2e-300, 3e-300]).unwrap();
    let out = learn_tolerance(&f.model, &f.imu, &f.meas, &grid, &f.init, &settings(BankExecution::Parallel)).unwrap();
    let losses: Vec<f64> = out.report.losses.iter().map(|l| l.unwrap()).collect();
    assert_eq!(losses[0], losses[1]);
    assert_eq!(losses[1], losses[2]);
    assert_eq!(out.report.c_hat, 1e-300);
}

#[test]
fn a_priori_filter_hands_over_the_prediction_at_n() {
    let f = fixture(6, 200);
    let grid = ToleranceGrid::new(vec![0.1]).unwrap();
    let out = learn_tolerance(&f.model, &f.imu, &f.meas, &grid, &f.init, &settings(BankExecution::Parallel)).unwrap();
    let n = out.report.n;
    assert_eq!(out.a_priori.steps.len(), n);
    let ekf = run_phase(&f.model, &f.imu[..n], &f.meas[..n], &FilterConfig::default(), &f.init).unwrap();
    assert_eq!(out.a_priori.final_belief(), ekf.final_belief());
    assert!(out.a_priori.steps.iter().all(|s| s.theta == 0.0));
}

#[test]
fn empty_phase_keeps_the_initial_belief() {
    let f = fixture(7, 10);
    let run = run_phase(&f.model, &[], &[], &FilterConfig::default(), &f.init).unwrap();
    assert_eq!(run.final_belief(), f.init);
    assert_eq!(run.predictions().unwrap().len(), 1);
}

#[test]
fn malformed_inputs_are_rejected() {
    let f = fixture(8, 50);
    let grid = ToleranceGrid::default();
    let s = settings(BankExecution::Sequential);
    assert!(matches!(
        learn_tolerance(&f.model, &f.imu, &f.meas[..49], &grid, &f.init, &s),
        Err(LearnError::LengthMismatch { imu: 50, meas: 49 })
    ));
    assert!(matches!(
        learn_tolerance(&f.model, &f.imu[..1], &f.meas[..1], &grid, &f.init, &s),
        Err(LearnError::TooShort(1))
    ));
    let bad = BankSettings {
        a_priori_tolerance: -1.0,
        ..s
    };
    assert!(learn_tolerance(&f.model, &f.imu, &f.meas, &grid, &f.init, &bad).is_err());
}

#[test]
fn learning_is_deterministic() {
    let grid = ToleranceGrid::spaced(2e-4, 1.0, 6, Default::default()).unwrap();
    let run = || {
        let f = fixture(9, 400);
        learn_tolerance(&f.model, &f.imu, &f.meas, &grid, &f.init, &settings(BankExecution::Parallel))
            .unwrap()
            .report
    };
    let (a, b) = (run(), run());
    assert_eq!(a.losses, b.losses);
    assert_eq!(a.c_hat, b.c_hat);
}
