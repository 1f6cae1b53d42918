use super::PreferenceMatrix;
use crate::Scalar;

/// Accumulates the dueling regret `Σ_t (Δ_{u_t} + Δ_{v_t}) / 2`.
#[derive(Debug, Clone)]
pub struct RegretTracker<F> {
    gaps: Vec<F>,
    cumulative: F,
    steps: u64,
}

impl<F: Scalar> RegretTracker<F> {
    pub fn new(matrix: &PreferenceMatrix<F>) -> Self {
        Self {
            gaps: matrix.gaps(),
            cumulative: F::zero(),
            steps: 0,
        }
    }

    pub fn gaps(&self) -> &[F] {
        &self.gaps
    }

    /// Regret of playing `(u, v)` without recording it.
    pub fn regret_of(&self, u: usize, v: usize) -> F {
        (self.gaps[u] + self.gaps[v]) * F::half()
    }

    /// Returns the regret of `(u, v)` and adds it to the running total.
    pub fn instant_regret(&mut self, u: usize, v: usize) -> F {
        let r = self.regret_of(u, v);
        self.cumulative = self.cumulative + r;
        self.steps += 1;
        r
    }

    pub fn cumulative(&self) -> F {
        self.cumulative
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }
}
