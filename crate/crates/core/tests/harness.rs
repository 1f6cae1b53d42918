use duelsim::datasets::{arithmetic_matrix, DatasetSpec};
use duelsim::env::FeedbackMode;
use duelsim::harness::{run_many_on, run_one, run_one_with_policy, write_results, ExperimentConfig};
use duelsim::policies::{Fixed, PolicyKind};

fn config(policy: PolicyKind, horizon: u64, runs: u32, stride: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::desk(DatasetSpec::Arithmetic(10), policy);
    c.horizon = horizon;
    c.runs = runs;
    c.stride = stride;
    c
}

#[test]
fn winner_self_play_has_no_regret() {
    let m = arithmetic_matrix::<f64>(10).unwrap();
    let c = config(PolicyKind::RucbDelay, 1000, 1, 10);
    let trace = run_one_with_policy(&c, &m, &mut Fixed::new(0, 0), 3).unwrap();
    assert!(trace.regret.iter().all(|&r| r == 0.0));
}

#[test]
fn constant_pair_regret_is_linear() {
    let m = arithmetic_matrix::<f64>(10).unwrap();
    let c = config(PolicyKind::RucbDelay, 1000, 1, 10);
    let trace = run_one_with_policy(&c, &m, &mut Fixed::new(0, 9), 3).unwrap();
    for (&t, &r) in trace.times.iter().zip(&trace.regret) {
        assert!((r - 0.1125 * t as f64).abs() < 1e-9 * t as f64, "t={t} r={r}");
    }
}

#[test]
fn same_seed_same_trace() {
    let m = arithmetic_matrix::<f64>(5).unwrap();
    for kind in PolicyKind::ALL {
        let c = config(kind, 3000, 1, 50);
        assert_eq!(run_one(&c, &m, 9).unwrap(), run_one(&c, &m, 9).unwrap(), "{kind}");
    }
}

#[test]
fn runs_are_independent_of_batch() {
    let m = arithmetic_matrix::<f64>(5).unwrap();
    let mut c = config(PolicyKind::RucbBaseline, 2000, 4, 100);
    c.base_seed = 40;
    let batch = run_many_on(&c, &m).unwrap();
    for (r, trace) in batch.runs.iter().enumerate() {
        assert_eq!(trace.seed, 40 + r as u64);
        assert_eq!(trace, &run_one(&c, &m, 40 + r as u64).unwrap());
    }
}

#[test]
fn traces_are_non_decreasing_with_expected_length() {
    let m = arithmetic_matrix::<f64>(6).unwrap();
    for kind in PolicyKind::ALL {
        let c = config(kind, 2345, 2, 100);
        let e = run_many_on(&c, &m).unwrap();
        for run in &e.runs {
            assert_eq!(run.regret.len(), 24);
            assert_eq!(*run.times.last().unwrap(), 2345);
            assert!(run.regret.windows(2).all(|w| w[0] <= w[1]), "{kind}");
        }
    }
}

#[test]
fn aggregated_mode_runs_mrr_only() {
    let m = arithmetic_matrix::<f64>(4).unwrap();
    let mut c = config(PolicyKind::MrrDelay, 3000, 1, 100);
    c.mode = FeedbackMode::Aggregated;
    assert!(run_one(&c, &m, 0).is_ok());
    c.policy = PolicyKind::RucbDelay;
    assert!(run_one(&c, &m, 0).is_err());
}

#[test]
fn written_files_match_aggregates() {
    let m = arithmetic_matrix::<f64>(10).unwrap();
    let c = config(PolicyKind::RucbDelay, 100, 2, 10);
    let e = run_many_on(&c, &m).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_results(&e, dir.path()).unwrap();

    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "t,mean_regret,std_regret");
    assert_eq!(lines.len(), 11);

    let mut reader = csv::Reader::from_path(dir.path().join("runs.csv")).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["seed", "t", "regret"]);
    let rows: Vec<(u64, u64, f64)> = reader.deserialize().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 20);
    for (idx, &t) in e.times.iter().enumerate() {
        let values: Vec<f64> = rows.iter().filter(|r| r.1 == t).map(|r| r.2).collect();
        let mean = values.iter().sum::<f64>() / 2.0;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
        assert!((mean - e.mean[idx]).abs() < 1e-9);
        assert!((var.sqrt() - e.std[idx]).abs() < 1e-9);
    }

    let again = tempfile::tempdir().unwrap();
    write_results(&run_many_on(&c, &m).unwrap(), again.path()).unwrap();
    assert_eq!(summary, std::fs::read_to_string(again.path().join("summary.csv")).unwrap());
}

#[test]
fn rejects_empty_configurations() {
    let m = arithmetic_matrix::<f64>(3).unwrap();
    assert!(run_one(&config(PolicyKind::RucbDelay, 0, 1, 10), &m, 0).is_err());
    assert!(run_one(&config(PolicyKind::RucbDelay, 10, 1, 0), &m, 0).is_err());
    assert!(run_many_on(&config(PolicyKind::RucbDelay, 10, 0, 1), &m).is_err());
}

#[test]
fn single_precision_runs() {
    let m = arithmetic_matrix::<f32>(5).unwrap();
    for kind in PolicyKind::ALL {
        let trace = run_one(&config(kind, 2000, 1, 100), &m, 1).unwrap();
        assert!(trace.final_regret() > 0.0);
    }
}
