use rand::RngCore;

use super::{Feedback, Policy, PolicyAction, PolicyError};
use crate::env::{Conversion, DelayDistribution, FeedbackMode};
use crate::estimators::{EstimatorState, PairStats};
use crate::Scalar;

/// `μ̂ + sqrt(N log(K t / δ) / Ñ²)`, or 1 when `Ñ = 0`.
pub fn rrdb_bound_value<F: Scalar>(mu_hat: F, n: u64, n_tilde: F, k: usize, t: u64, delta: F) -> F {
    if n_tilde <= F::zero() {
        return F::one();
    }
    let log = (F::of_count(k as u64) * F::of_count(t.max(1)) / delta).ln();
    mu_hat + (F::of_count(n) * log / (n_tilde * n_tilde)).sqrt()
}

/// Round-robin elimination over the delay-corrected estimator.
///
/// A sweep plays `(a_x, a_y)` then `(a_y, a_x)` for every `x < y` in the
/// active list. The elimination test runs at the first selection after a
/// sweep completes.
#[derive(Debug, Clone)]
pub struct RrDbDelay<F> {
    est: EstimatorState<F>,
    delta: F,
    active: Vec<usize>,
    sweep: Vec<PolicyAction>,
    cursor: usize,
}

impl<F: Scalar> RrDbDelay<F> {
    pub fn new(
        k: usize,
        window: usize,
        delay: &DelayDistribution,
        delta: F,
    ) -> Result<Self, PolicyError> {
        Ok(Self::from_estimator(EstimatorState::new(k, window, delay)?, delta))
    }

    pub fn from_estimator(est: EstimatorState<F>, delta: F) -> Self {
        let active: Vec<usize> = (0..est.k()).collect();
        let sweep = sweep_of(&active);
        Self {
            est,
            delta,
            active,
            sweep,
            cursor: 0,
        }
    }

    pub fn estimator(&self) -> &EstimatorState<F> {
        &self.est
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    /// The ordered pairs of the current sweep.
    pub fn sweep(&self) -> &[PolicyAction] {
        &self.sweep
    }

    pub fn bound(&self, i: usize, j: usize, t: u64) -> F {
        self.bound_from(&self.est.snapshot(t), i, j)
    }

    fn bound_from(&self, stats: &PairStats<F>, i: usize, j: usize) -> F {
        let mu = stats.mu_hat(i, j).unwrap_or(F::half());
        rrdb_bound_value(mu, stats.n(i, j), stats.n_tilde(i, j), self.est.k(), stats.t(), self.delta)
    }

    fn eliminate(&mut self, t: u64) {
        let stats = self.est.snapshot(t);
        let worst: Vec<F> = self
            .active
            .iter()
            .map(|&i| {
                self.active
                    .iter()
                    .filter(|&&j| j != i)
                    .map(|&j| self.bound_from(&stats, i, j))
                    .fold(F::infinity(), F::min)
            })
            .collect();
        let survivors: Vec<usize> = self
            .active
            .iter()
            .zip(&worst)
            .filter(|(_, &w)| w >= F::half())
            .map(|(&i, _)| i)
            .collect();
        if survivors.is_empty() {
            let mut keep = 0;
            for (x, w) in worst.iter().enumerate() {
                if *w > worst[keep] {
                    keep = x;
                }
            }
            self.active = vec![self.active[keep]];
        } else {
            self.active = survivors;
        }
        self.sweep = sweep_of(&self.active);
        self.cursor = 0;
    }
}

fn sweep_of(active: &[usize]) -> Vec<PolicyAction> {
    let mut pairs = Vec::with_capacity(active.len() * active.len().saturating_sub(1));
    for (x, &a) in active.iter().enumerate() {
        for &b in &active[x + 1..] {
            pairs.push(PolicyAction::new(a, b));
            pairs.push(PolicyAction::new(b, a));
        }
    }
    pairs
}

impl<F: Scalar> Policy<F> for RrDbDelay<F> {
    fn name(&self) -> &'static str {
        "rrdb-delay"
    }

    fn observe(&mut self, t: u64, feedback: Feedback<'_>) -> Result<(), PolicyError> {
        match feedback {
            Feedback::Conversions(conversions) => {
                for c in conversions {
                    let Conversion { s, u, v, .. } = *c;
                    self.est.ingest_conversion(s, u, v, t)?;
                }
                self.est.advance(t);
                Ok(())
            }
            Feedback::Aggregated(_) => Err(PolicyError::UnsupportedFeedback {
                policy: "rrdb-delay",
                mode: FeedbackMode::Aggregated,
            }),
        }
    }

    fn select(&mut self, t: u64, _rng: &mut dyn RngCore) -> Result<PolicyAction, PolicyError> {
        if self.active.len() > 1 && self.cursor == self.sweep.len() {
            self.eliminate(t);
        }
        let action = if self.active.len() == 1 {
            PolicyAction::new(self.active[0], self.active[0])
        } else {
            self.cursor += 1;
            self.sweep[self.cursor - 1]
        };
        self.est.record_play(action.u, action.v, t)?;
        Ok(action)
    }

    fn active_arms(&self) -> Option<Vec<usize>> {
        Some(self.active.clone())
    }

    fn declared_winner(&self) -> Option<usize> {
        (self.active.len() == 1).then(|| self.active[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bound_value() {
        let u = rrdb_bound_value(0.6, 100, 50.0, 10, 1000, 0.001);
        assert_relative_eq!(u, 0.6 + (100.0 * 1e7f64.ln() / 2500.0).sqrt(), max_relative = 1e-12);
        assert_relative_eq!(u, 1.40295, epsilon = 1e-5);
        assert_eq!(rrdb_bound_value(0.6, 0, 0.0, 10, 1000, 0.001), 1.0);
    }

    #[test]
    fn bound_decreases_in_delta() {
        let a = rrdb_bound_value(0.6, 100, 50.0, 10, 1000, 0.001);
        let b = rrdb_bound_value(0.6, 100, 50.0, 10, 1000, 0.01);
        assert!(b < a);
    }

    #[test]
    fn without_delay_reduces_to_classical_bound() {
        let (mu, n, k, t, delta) = (0.7, 40u64, 5, 300, 0.05);
        let u = rrdb_bound_value(mu, n, n as f64, k, t, delta);
        let classical = mu + ((k as f64 * t as f64 / delta).ln() / n as f64).sqrt();
        assert_relative_eq!(u, classical, max_relative = 1e-12);
    }

    #[test]
    fn three_arm_sweep_order() {
        let delay = DelayDistribution::deterministic(1).unwrap();
        let mut p = RrDbDelay::<f64>::new(3, 5, &delay, 0.01).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let played: Vec<(usize, usize)> = (1..=6)
            .map(|t| {
                let a = p.select(t, &mut rng).unwrap();
                (a.u, a.v)
            })
            .collect();
        assert_eq!(played, vec![(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)]);
    }

    #[test]
    fn single_arm_plays_itself() {
        let delay = DelayDistribution::deterministic(1).unwrap();
        let mut p = RrDbDelay::<f64>::new(1, 5, &delay, 0.01).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for t in 1..5 {
            assert_eq!(p.select(t, &mut rng).unwrap(), PolicyAction::new(0, 0));
        }
    }

    #[test]
    fn clear_loser_is_eliminated_and_never_replayed() {
        let delay = DelayDistribution::deterministic(1).unwrap();
        let mut p = RrDbDelay::<f64>::new(3, 5, &delay, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut t = 1;
        let mut gone = false;
        while t < 5000 {
            let conv: Vec<Conversion> = Vec::new();
            p.observe(t, Feedback::Conversions(&conv)).unwrap();
            let a = p.select(t, &mut rng).unwrap();
            if gone {
                assert!(a.u != 2 && a.v != 2);
            }
            // arm 0 always wins, arm 2 always loses, 1 vs 2 goes to 1
            let first_wins = a.u < a.v;
            if first_wins {
                p.observe(t + 1, Feedback::Conversions(&[Conversion { at: t + 1, s: t, u: a.u, v: a.v }])).unwrap();
            }
            gone = !p.active().contains(&2);
            t += 1;
        }
        assert_eq!(p.active(), &[0]);
    }
}
