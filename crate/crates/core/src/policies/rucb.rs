use rand::{Rng, RngCore};

use super::{Feedback, Policy, PolicyAction, PolicyError};
use crate::env::{DelayDistribution, FeedbackMode};
use crate::estimators::EstimatorState;
use crate::Scalar;

/// One RUCB selection round on a row-major `K×K` matrix of upper bounds
/// (`ucb[i*k + j] = U_ij`, diagonal 1/2).
///
/// Returns the action and the champion set `C = {i : U_ij ≥ 1/2 ∀j}`;
/// `best` is the persistent set `B` (at most one arm), updated in place.
///
/// Randomness is consumed in this fixed order:
/// 1. `C = ∅`: one `random_range(0..k)` for the first arm;
/// 2. `|C| > 1` with `B = {b}`: one `random_bool(0.5)` choosing `b`, and on
///    failure one `random_range` over `C \ B` (ascending);
/// 3. `|C| > 1` with `B = ∅`: one `random_range` over `C` (ascending);
/// 4. second arm: `argmax_j U_{j,u}` over all `j` including `u` itself
///    (`U_uu = 1/2`); `u` is dropped from a tie with other arms, and a
///    remaining tie costs one `random_range` over the tied arms (ascending).
pub fn rucb_choose<F: Scalar>(
    k: usize,
    ucb: &[F],
    best: &mut Option<usize>,
    rng: &mut dyn RngCore,
) -> (PolicyAction, Vec<usize>) {
    let half = F::half();
    let champions: Vec<usize> = (0..k)
        .filter(|&i| (0..k).all(|j| ucb[i * k + j] >= half))
        .collect();

    *best = best.filter(|b| champions.contains(b));
    let u = match champions.len() {
        0 => rng.random_range(0..k),
        1 => {
            *best = Some(champions[0]);
            champions[0]
        }
        n => match *best {
            Some(b) => {
                if rng.random_bool(0.5) {
                    b
                } else {
                    let rest: Vec<usize> = champions.iter().copied().filter(|&c| c != b).collect();
                    rest[rng.random_range(0..rest.len())]
                }
            }
            None => champions[rng.random_range(0..n)],
        },
    };

    let column = |j: usize| ucb[j * k + u];
    let top = (0..k).map(column).fold(F::neg_infinity(), F::max);
    let mut tied: Vec<usize> = (0..k).filter(|&j| column(j) == top).collect();
    if tied.len() > 1 {
        tied.retain(|&j| j != u);
    }
    let v = if tied.len() == 1 {
        tied[0]
    } else {
        tied[rng.random_range(0..tied.len())]
    };
    (PolicyAction::new(u, v), champions)
}

/// RUCB driven by the delay-corrected bound
/// `U_ij = μ̂_ij + sqrt(α N_ij log t / Ñ_ij²)`.
#[derive(Debug, Clone)]
pub struct RucbDelay<F> {
    est: EstimatorState<F>,
    alpha: F,
    best: Option<usize>,
    champions: Vec<usize>,
}

impl<F: Scalar> RucbDelay<F> {
    pub fn new(
        k: usize,
        window: usize,
        delay: &DelayDistribution,
        alpha: F,
    ) -> Result<Self, PolicyError> {
        Ok(Self::from_estimator(EstimatorState::new(k, window, delay)?, alpha))
    }

    pub fn from_estimator(est: EstimatorState<F>, alpha: F) -> Self {
        Self {
            est,
            alpha,
            best: None,
            champions: Vec::new(),
        }
    }

    pub fn estimator(&self) -> &EstimatorState<F> {
        &self.est
    }

    /// The set `B` after the last selection.
    pub fn best_set(&self) -> Option<usize> {
        self.best
    }

    /// The champion set `C` computed during the last selection.
    pub fn champions(&self) -> &[usize] {
        &self.champions
    }

    /// `K×K` row-major upper bounds at time `t`.
    pub fn ucb_matrix(&self, t: u64) -> Vec<F> {
        self.est.snapshot(t).ucb_matrix(self.alpha)
    }

    /// Feeds conversions visible at `t`; those older than the window are
    /// dropped by the estimator.
    pub fn update(&mut self, t: u64, conversions: &[crate::env::Conversion]) -> Result<(), PolicyError> {
        for c in conversions {
            self.est.ingest_conversion(c.s, c.u, c.v, t)?;
        }
        self.est.advance(t);
        Ok(())
    }
}

impl<F: Scalar> Policy<F> for RucbDelay<F> {
    fn name(&self) -> &'static str {
        "rucb-delay"
    }

    fn observe(&mut self, t: u64, feedback: Feedback<'_>) -> Result<(), PolicyError> {
        match feedback {
            Feedback::Conversions(conversions) => self.update(t, conversions),
            Feedback::Aggregated(_) => Err(PolicyError::UnsupportedFeedback {
                policy: "rucb-delay",
                mode: FeedbackMode::Aggregated,
            }),
        }
    }

    fn select(&mut self, t: u64, rng: &mut dyn RngCore) -> Result<PolicyAction, PolicyError> {
        let ucb = self.ucb_matrix(t);
        let (action, champions) = rucb_choose(self.est.k(), &ucb, &mut self.best, rng);
        self.champions = champions;
        self.est.record_play(action.u, action.v, t)?;
        Ok(action)
    }

    fn declared_winner(&self) -> Option<usize> {
        self.best
    }
}
