use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use duelsim::env::DelayDistribution;

/// Chi-square goodness of fit of `n` samples against the distribution's own
/// CDF, pooling the tail into one bin. Returns the p-value.
fn chi_square_p(delay: &DelayDistribution, n: usize, bins: u64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; bins as usize + 1];
    for _ in 0..n {
        let d = delay.sample(&mut rng);
        assert!(d >= 1);
        counts[(d.min(bins + 1) - 1) as usize] += 1;
    }
    let mut stat = 0.0;
    let mut used = 0;
    for (idx, &observed) in counts.iter().enumerate() {
        let d = idx as u64 + 1;
        let p = if d <= bins { delay.tau(d) - delay.tau(d - 1) } else { 1.0 - delay.tau(bins) };
        let expected = p * n as f64;
        if expected > 0.0 {
            stat += (observed as f64 - expected).powi(2) / expected;
            used += 1;
        } else {
            assert_eq!(observed, 0);
        }
    }
    1.0 - ChiSquared::new((used - 1) as f64).unwrap().cdf(stat)
}

#[test]
fn geometric_sampler_fits() {
    for (p, bins) in [(0.01, 300), (0.1, 40), (0.5, 8)] {
        let delay = DelayDistribution::geometric(p).unwrap();
        let pv = chi_square_p(&delay, 200_000, bins, 7);
        assert!(pv > 1e-3, "p = {p}: p-value {pv}");
    }
}

#[test]
fn uniform_and_table_samplers_fit() {
    let uniform = DelayDistribution::uniform(3, 17).unwrap();
    assert!(chi_square_p(&uniform, 100_000, 20, 8) > 1e-3);
    let table = DelayDistribution::table(vec![0.1, 0.0, 0.5, 0.25, 0.15]).unwrap();
    assert!(chi_square_p(&table, 100_000, 5, 9) > 1e-3);
}

#[test]
fn empirical_mean_matches() {
    let delay = DelayDistribution::geometric(0.01).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let n = 200_000;
    let mean = (0..n).map(|_| delay.sample(&mut rng) as f64).sum::<f64>() / n as f64;
    // standard deviation of the mean is about 0.22
    assert!((mean - delay.mean()).abs() < 1.5, "{mean}");
    assert!((delay.tau(1000) - 0.999_956_83).abs() < 1e-8);
    assert!((delay.tau(2) - 0.0199).abs() < 1e-12);
}
