use rand::RngCore;

use super::{rucb_choose, Feedback, Policy, PolicyAction, PolicyError};
use crate::env::FeedbackMode;
use crate::Scalar;

/// Classical RUCB fed the raw delayed stream.
///
/// A play of `(u, v)` is booked immediately as a win for `v`; its
/// conversion, whenever it arrives, moves the win to `u`.
#[derive(Debug, Clone)]
pub struct RucbBaseline<F> {
    k: usize,
    alpha: F,
    wins: Vec<u64>,
    best: Option<usize>,
}

impl<F: Scalar> RucbBaseline<F> {
    pub fn new(k: usize, alpha: F) -> Self {
        Self {
            k,
            alpha,
            wins: vec![0; k * k],
            best: None,
        }
    }

    /// Current apparent win count of `i` over `j`.
    pub fn wins(&self, i: usize, j: usize) -> u64 {
        self.wins[i * self.k + j]
    }

    /// `w_ij/(w_ij + w_ji) + sqrt(α log t / (w_ij + w_ji))`, with `x/0 := 1`.
    pub fn ucb(&self, i: usize, j: usize, t: u64) -> F {
        if i == j {
            return F::half();
        }
        let w = self.wins(i, j);
        let n = w + self.wins(j, i);
        if n == 0 {
            return F::one();
        }
        let n = F::of_count(n);
        let log_t = F::of_count(t.max(1)).ln();
        F::of_count(w) / n + (self.alpha * log_t / n).sqrt()
    }
}

impl<F: Scalar> Policy<F> for RucbBaseline<F> {
    fn name(&self) -> &'static str {
        "rucb-baseline"
    }

    fn observe(&mut self, _t: u64, feedback: Feedback<'_>) -> Result<(), PolicyError> {
        match feedback {
            Feedback::Conversions(conversions) => {
                let k = self.k;
                for c in conversions {
                    self.wins[c.v * k + c.u] -= 1;
                    self.wins[c.u * k + c.v] += 1;
                }
                Ok(())
            }
            Feedback::Aggregated(_) => Err(PolicyError::UnsupportedFeedback {
                policy: "rucb-baseline",
                mode: FeedbackMode::Aggregated,
            }),
        }
    }

    fn select(&mut self, t: u64, rng: &mut dyn RngCore) -> Result<PolicyAction, PolicyError> {
        let k = self.k;
        let ucb: Vec<F> = (0..k * k).map(|idx| self.ucb(idx / k, idx % k, t)).collect();
        let (action, _) = rucb_choose(k, &ucb, &mut self.best, rng);
        self.wins[action.v * k + action.u] += 1;
        Ok(action)
    }

    fn declared_winner(&self) -> Option<usize> {
        self.best
    }
}
