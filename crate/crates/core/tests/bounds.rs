use proptest::prelude::*;

use duelsim::bounds::{c_delta, lower_bound_value, n_schedule, n_schedule_aggregated};

fn schedule_oracle(m: u32, t: u64, e: f64) -> u64 {
    let g = 0.5f64.powi(m as i32);
    let l = (t as f64 * g * g).ln().max(0.0);
    let inner = l / 2.0 + 4.0 / 3.0 * g * l + 2.0 * g * (2.0 * e * l).sqrt() + 2.0 * g * e;
    (((l / 2.0).sqrt() + inner.sqrt()).powi(2) / (g * g)).ceil() as u64
}

fn aggregated_oracle(m: u32, t: u64, e: f64) -> u64 {
    let g = 0.5f64.powi(m as i32);
    let l = (t as f64 * g * g).ln().max(0.0);
    (((2.0 * l).sqrt() + (2.0 * l + 8.0 / 3.0 * g * l + 6.0 * g * m as f64 * e).sqrt()).powi(2) / (g * g)).ceil()
        as u64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn schedules_match_oracles(m in 1u32..12, t in 100u64..10_000_000, e in 0.5f64..1000.0) {
        // the oracle squares a square root, so allow one ulp-induced step
        let n = n_schedule(m, t, e);
        prop_assert!(n.abs_diff(schedule_oracle(m, t, e)) <= 1);
        let a = n_schedule_aggregated(m, t, e);
        prop_assert!(a.abs_diff(aggregated_oracle(m, t, e)) <= 1);
    }

    #[test]
    fn schedule_grows_with_mean_delay(m in 1u32..10, t in 1000u64..1_000_000, e in 0.0f64..500.0, de in 0.0f64..100.0) {
        prop_assert!(n_schedule(m, t, e + de) >= n_schedule(m, t, e));
        prop_assert!(n_schedule_aggregated(m, t, e + de) >= n_schedule_aggregated(m, t, e));
    }

    #[test]
    fn c_delta_matches_oracle(alpha in 0.51f64..4.0, m in 0usize..5000, k in 2usize..30, delta in 1e-6f64..1.0) {
        let oracle = ((4.0 * alpha - 1.0) * (m as f64 + 1.0) * (k * (k - 1)) as f64 / ((2.0 * alpha - 1.0) * delta))
            .powf(1.0 / (2.0 * alpha - 1.0));
        let got = c_delta(alpha, m, k, delta).unwrap();
        prop_assert!(((got - oracle) / oracle).abs() <= 1e-9);
    }

    #[test]
    fn lower_bound_matches_oracle(k in 2usize..100, t in 1u64..100_000_000, tau in 0.001f64..=1.0) {
        let (gap, scale) = lower_bound_value(k, t, tau).unwrap();
        let gap_oracle = ((k as f64 - 1.0) / (128.0 * t as f64 * tau)).sqrt();
        prop_assert!(((gap - gap_oracle) / gap_oracle).abs() <= 1e-9);
        prop_assert!(((scale - (t as f64 * k as f64 / tau).sqrt()) / scale).abs() <= 1e-9);
        let (smaller_tau_gap, _) = lower_bound_value(k, t, tau / 2.0).unwrap();
        prop_assert!(smaller_tau_gap > gap);
    }
}

#[test]
fn schedule_grows_with_round_at_large_horizon() {
    for t in [50_000u64, 200_000, 1_000_000] {
        for e in [0.0, 10.0, 100.0] {
            let rounds = (1..=16u32).take_while(|&m| t as f64 * 0.25f64.powi(m as i32) > 1.0);
            let ns: Vec<u64> = rounds.map(|m| n_schedule(m, t, e)).collect();
            assert!(ns.len() >= 7);
            assert!(ns.windows(2).all(|w| w[0] <= w[1]), "T={t} E={e}: {ns:?}");
        }
    }
}

#[test]
fn longer_horizon_never_lowers_schedule() {
    for m in 1..8 {
        for t in [1_000u64, 10_000, 100_000] {
            assert!(n_schedule(m, t * t, 100.0) >= n_schedule(m, t, 100.0));
        }
    }
}
