//! Action-selection policies behind a common [`Policy`] interface.
//!
//! Protocol per step `t = 1, 2, ...`: the runner first calls
//! [`Policy::observe`] with the feedback that became visible at `t`, then
//! [`Policy::select`], and plays the returned pair at step `t`. Policies
//! record their own plays inside `select`.

mod baseline;
mod fixed;
mod mrr;
mod rrdb;
mod rucb;

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use thiserror::Error;

use crate::env::{Conversion, DelayDistribution, FeedbackMode};
use crate::estimators::EstimatorError;
use crate::Scalar;

pub use baseline::RucbBaseline;
pub use fixed::Fixed;
pub use mrr::{MrrDelay, RoundReport, ScheduleKind};
pub use rrdb::{rrdb_bound_value, RrDbDelay};
pub use rucb::{rucb_choose, RucbDelay};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error("every active pair reached its round quota; end the round first")]
    RoundComplete,
    #[error("policy `{policy}` does not support {mode:?} feedback")]
    UnsupportedFeedback {
        policy: &'static str,
        mode: FeedbackMode,
    },
    #[error("invalid policy parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown policy `{0}` (expected rucb-delay, rrdb-delay, mrr-delay or rucb-baseline)")]
    UnknownPolicy(String),
}

/// Ordered pair `(u, v)` to play. Order matters: pending feedback reads as
/// a loss for `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PolicyAction {
    pub u: usize,
    pub v: usize,
}

impl PolicyAction {
    pub fn new(u: usize, v: usize) -> Self {
        Self { u, v }
    }
}

impl fmt::Display for PolicyAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.u, self.v)
    }
}

/// What the player sees at one time step.
#[derive(Debug, Clone, Copy)]
pub enum Feedback<'a> {
    /// Conversions that became visible, each tied to its play.
    Conversions(&'a [Conversion]),
    /// Number of conversions landing now, with no pair identity.
    Aggregated(u64),
}

pub trait Policy<F: Scalar>: Send {
    fn name(&self) -> &'static str;

    /// Delivers the feedback that became visible at step `t`.
    fn observe(&mut self, t: u64, feedback: Feedback<'_>) -> Result<(), PolicyError>;

    /// Chooses and records the pair played at step `t`.
    fn select(&mut self, t: u64, rng: &mut dyn RngCore) -> Result<PolicyAction, PolicyError>;

    /// Arms still under consideration, for elimination-style policies.
    fn active_arms(&self) -> Option<Vec<usize>> {
        None
    }

    /// The arm the policy currently believes is the Condorcet winner.
    fn declared_winner(&self) -> Option<usize> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    RucbDelay,
    RrdbDelay,
    MrrDelay,
    RucbBaseline,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::RucbDelay,
        PolicyKind::RrdbDelay,
        PolicyKind::MrrDelay,
        PolicyKind::RucbBaseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::RucbDelay => "rucb-delay",
            PolicyKind::RrdbDelay => "rrdb-delay",
            PolicyKind::MrrDelay => "mrr-delay",
            PolicyKind::RucbBaseline => "rucb-baseline",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| PolicyError::UnknownPolicy(s.to_string()))
    }
}

/// Tunables shared by the policy constructors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyParams {
    /// Exploration parameter of the RUCB-style bounds.
    pub alpha: f64,
    /// Confidence parameter of RR-DB-Delay; `1/T` when `None`.
    pub delta: Option<f64>,
    /// Censoring window `M`.
    pub window: usize,
}

impl Default for PolicyParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            delta: None,
            window: 1000,
        }
    }
}

/// Instantiates a policy by kind.
///
/// `delay` supplies `τ_1..τ_M` to the estimator-based policies and `E[D]` to
/// MRR-DB-Delay's schedule. Only MRR-DB-Delay accepts aggregated feedback.
pub fn build_policy<F: Scalar>(
    kind: PolicyKind,
    params: &PolicyParams,
    k: usize,
    delay: &DelayDistribution,
    horizon: u64,
    mode: FeedbackMode,
) -> Result<Box<dyn Policy<F>>, PolicyError> {
    if mode == FeedbackMode::Aggregated && kind != PolicyKind::MrrDelay {
        return Err(PolicyError::UnsupportedFeedback {
            policy: kind.name(),
            mode,
        });
    }
    if !(params.alpha > 0.0) {
        return Err(PolicyError::InvalidParameter(format!(
            "alpha must be positive, got {}",
            params.alpha
        )));
    }
    if params.window == 0 && matches!(kind, PolicyKind::RucbDelay | PolicyKind::RrdbDelay) {
        return Err(PolicyError::InvalidParameter("window must be at least 1".into()));
    }
    Ok(match kind {
        PolicyKind::RucbDelay => Box::new(RucbDelay::new(
            k,
            params.window,
            delay,
            F::of(params.alpha),
        )?),
        PolicyKind::RrdbDelay => {
            let delta = params.delta.unwrap_or(1.0 / horizon.max(1) as f64);
            if !(delta > 0.0) {
                return Err(PolicyError::InvalidParameter(format!(
                    "delta must be positive, got {delta}"
                )));
            }
            Box::new(RrDbDelay::new(k, params.window, delay, F::of(delta))?)
        }
        PolicyKind::MrrDelay => {
            let schedule = match mode {
                FeedbackMode::Standard => ScheduleKind::Standard,
                FeedbackMode::Aggregated => ScheduleKind::Aggregated,
            };
            Box::new(MrrDelay::new(k, horizon, F::of(delay.mean()), schedule))
        }
        PolicyKind::RucbBaseline => Box::new(RucbBaseline::new(k, F::of(params.alpha))),
    })
}
