//! Simulation library for the biased dueling-bandit problem with stochastic
//! delayed (conversion-style) feedback.
//!
//! The crate is organised bottom-up:
//!
//! - [`env`]: preference matrices, delay distributions, the censored
//!   observation stream and regret accounting.
//! - [`estimators`]: windowed delay-corrected statistics `N`, `Ñ`, `S`, the
//!   unbiased preference estimate and its confidence bounds.
//! - [`policies`]: RUCB-Delay, RR-DB-Delay, MRR-DB-Delay and the naive RUCB
//!   baseline behind one [`policies::Policy`] trait.
//! - [`bounds`]: closed-form schedule and regret-bound calculators.
//! - [`datasets`]: built-in preference matrices, CSV loading, hard instances.
//! - [`harness`]: seeded replications, aggregation and CSV output.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common `f64` instantiations. Arm indices are 0-based.

pub mod bounds;
pub mod datasets;
pub mod env;
pub mod estimators;
pub mod harness;
pub mod policies;
mod scalar;

pub use scalar::Scalar;

/// Generator used for every replication. Environment and policy draw from
/// separate streams of the same seed (see [`harness::rngs_for_seed`]).
pub type SimRng = rand_chacha::ChaCha8Rng;

pub type Matrix = env::PreferenceMatrix<f64>;
pub type Matrix32 = env::PreferenceMatrix<f32>;
pub type Environment = env::Environment<f64>;
pub type Tracker = env::RegretTracker<f64>;
pub type Estimator = estimators::EstimatorState<f64>;
pub type Estimator32 = estimators::EstimatorState<f32>;
pub type RucbDelay = policies::RucbDelay<f64>;
pub type RrDbDelay = policies::RrDbDelay<f64>;
pub type MrrDelay = policies::MrrDelay<f64>;
pub type RucbBaseline = policies::RucbBaseline<f64>;
pub type BoundInputs = bounds::BoundInputs<f64>;
