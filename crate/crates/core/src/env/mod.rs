//! Preference environment, delay process, censored observations and regret.

mod delay;
mod environment;
mod matrix;
mod regret;

pub use delay::{DelayDistribution, DelayError};
pub use environment::{Conversion, EnvError, Environment, FeedbackMode, PendingOutcome};
pub use matrix::{validate_matrix, MatrixError, PreferenceMatrix, COMPLEMENT_TOLERANCE};
pub use regret::RegretTracker;
