use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use rand::Rng;
use thiserror::Error;

use super::{DelayDistribution, PreferenceMatrix};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("arm index {arm} out of range for {k} arms")]
    ArmOutOfRange { arm: usize, k: usize },
    #[error("time step {t} exceeds the configured horizon {horizon}")]
    HorizonExceeded { t: u64, horizon: u64 },
    #[error("operation requires {expected:?} feedback but the environment runs in {actual:?} mode")]
    ModeMismatch {
        expected: FeedbackMode,
        actual: FeedbackMode,
    },
}

/// How conversions are reported to the player.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeedbackMode {
    /// Each conversion carries the play time and arm pair it belongs to.
    #[default]
    Standard,
    /// Only the number of conversions landing at each step is revealed.
    Aggregated,
}

/// Hidden truth of one comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PendingOutcome {
    /// Time step of the play.
    pub s: u64,
    pub u: usize,
    pub v: usize,
    /// `X_s = 1[u ≻ v]`.
    pub x: bool,
    /// Sampled delay `D_s ≥ 1`.
    pub d: u64,
}

impl PendingOutcome {
    /// Censored observation `Y_{s,t} = X_s · 1(D_s ≤ t − s)`.
    pub fn observed_at(&self, t: u64) -> bool {
        self.x && t >= self.s && t - self.s >= self.d
    }
}

/// A conversion becoming visible: the play at `s` of `(u, v)` had `X_s = 1`
/// and its delay has elapsed at time `at = s + D_s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Conversion {
    pub at: u64,
    pub s: u64,
    pub u: usize,
    pub v: usize,
}

/// Stochastic dueling environment with delayed, censored feedback.
///
/// Steps are numbered from 1. Each [`step`](Self::step) draws the outcome
/// `X ~ Bernoulli(μ_uv)` first and then the delay `D`, both from the rng
/// passed in. Winning plays are queued by conversion time `s + D`.
#[derive(Debug, Clone)]
pub struct Environment<F> {
    matrix: PreferenceMatrix<F>,
    delay: DelayDistribution,
    mode: FeedbackMode,
    horizon: Option<u64>,
    next_t: u64,
    queue: BinaryHeap<Reverse<Conversion>>,
    landing: BTreeMap<u64, u64>,
    history: Vec<PendingOutcome>,
}

impl<F: Scalar> Environment<F> {
    pub fn new(matrix: PreferenceMatrix<F>, delay: DelayDistribution) -> Self {
        Self {
            matrix,
            delay,
            mode: FeedbackMode::Standard,
            horizon: None,
            next_t: 1,
            queue: BinaryHeap::new(),
            landing: BTreeMap::new(),
            history: Vec::new(),
        }
    }

    pub fn with_mode(mut self, mode: FeedbackMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_horizon(mut self, horizon: u64) -> Self {
        self.horizon = Some(horizon);
        self
    }

    pub fn matrix(&self) -> &PreferenceMatrix<F> {
        &self.matrix
    }

    pub fn delay(&self) -> &DelayDistribution {
        &self.delay
    }

    pub fn mode(&self) -> FeedbackMode {
        self.mode
    }

    /// The step index the next play will receive.
    pub fn time(&self) -> u64 {
        self.next_t
    }

    /// Every play so far, in time order.
    pub fn history(&self) -> &[PendingOutcome] {
        &self.history
    }

    /// Plays `(u, v)` at the current step and advances time by one.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        u: usize,
        v: usize,
        rng: &mut R,
    ) -> Result<PendingOutcome, EnvError> {
        let k = self.matrix.k();
        for arm in [u, v] {
            if arm >= k {
                return Err(EnvError::ArmOutOfRange { arm, k });
            }
        }
        let s = self.next_t;
        if let Some(horizon) = self.horizon {
            if s > horizon {
                return Err(EnvError::HorizonExceeded { t: s, horizon });
            }
        }
        let mu = self.matrix.get(u, v).as_f64();
        let x = rng.random::<f64>() < mu;
        let d = self.delay.sample(rng);
        let outcome = PendingOutcome { s, u, v, x, d };
        if x {
            let at = s.saturating_add(d);
            match self.mode {
                FeedbackMode::Standard => self.queue.push(Reverse(Conversion { at, s, u, v })),
                FeedbackMode::Aggregated => *self.landing.entry(at).or_insert(0) += 1,
            }
        }
        self.history.push(outcome);
        self.next_t += 1;
        Ok(outcome)
    }

    /// Full censored view `(s, Y_{s,t})` for every past play `s < t`.
    pub fn observe(&self, t: u64) -> Result<Vec<(u64, bool)>, EnvError> {
        self.require(FeedbackMode::Standard)?;
        Ok(self
            .history
            .iter()
            .take_while(|o| o.s < t)
            .map(|o| (o.s, o.observed_at(t)))
            .collect())
    }

    /// Removes and returns every queued conversion visible at time `t`
    /// (conversion time `≤ t`), ordered by conversion time then play time.
    pub fn drain_conversions(&mut self, t: u64) -> Result<Vec<Conversion>, EnvError> {
        self.require(FeedbackMode::Standard)?;
        let mut out = Vec::new();
        while let Some(Reverse(c)) = self.queue.peek() {
            if c.at > t {
                break;
            }
            out.push(*c);
            self.queue.pop();
        }
        Ok(out)
    }

    /// Number of conversions landing exactly at `t`, without pair identity.
    /// Each landing time is reported once.
    pub fn observe_aggregated(&mut self, t: u64) -> Result<u64, EnvError> {
        self.require(FeedbackMode::Aggregated)?;
        Ok(self.landing.remove(&t).unwrap_or(0))
    }

    fn require(&self, expected: FeedbackMode) -> Result<(), EnvError> {
        if self.mode == expected {
            Ok(())
        } else {
            Err(EnvError::ModeMismatch {
                expected,
                actual: self.mode,
            })
        }
    }
}
