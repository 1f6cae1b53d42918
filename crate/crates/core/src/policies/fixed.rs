use rand::RngCore;

use super::{Feedback, Policy, PolicyAction, PolicyError};
use crate::Scalar;

/// Always plays the same pair. Useful as a control in experiments.
#[derive(Debug, Clone, Copy)]
pub struct Fixed {
    action: PolicyAction,
}

impl Fixed {
    pub fn new(u: usize, v: usize) -> Self {
        Self {
            action: PolicyAction::new(u, v),
        }
    }
}

impl<F: Scalar> Policy<F> for Fixed {
    fn name(&self) -> &'static str {
        "fixed"
    }

    fn observe(&mut self, _t: u64, _feedback: Feedback<'_>) -> Result<(), PolicyError> {
        Ok(())
    }

    fn select(&mut self, _t: u64, _rng: &mut dyn RngCore) -> Result<PolicyAction, PolicyError> {
        Ok(self.action)
    }
}
