//! Closed-form schedules and regret bounds.
//!
//! Every calculator is a pure function of its inputs and uses the natural
//! logarithm. Logarithms that would go negative at small horizons are
//! floored at zero.

use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("alpha must exceed {min}, got {alpha}")]
    Alpha { alpha: f64, min: f64 },
    #[error("invalid bound input: {0}")]
    Input(String),
}

/// Inputs shared by the regret-bound calculators.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundInputs<F> {
    pub k: usize,
    pub t_horizon: u64,
    pub alpha: F,
    /// Censoring window `M`.
    pub m_window: usize,
    pub tau_1: F,
    pub tau_m: F,
    /// Gaps `Δ_j` of the `K - 1` non-winning arms.
    pub gaps: Vec<F>,
    pub delta: F,
    pub mean_delay: F,
}

impl<F: Scalar> BoundInputs<F> {
    pub fn validate(&self) -> Result<(), BoundsError> {
        let bad = |msg: String| Err(BoundsError::Input(msg));
        if self.k < 2 {
            return bad(format!("need at least 2 arms, got {}", self.k));
        }
        if self.gaps.len() != self.k - 1 {
            return bad(format!("expected {} gaps, got {}", self.k - 1, self.gaps.len()));
        }
        if let Some(g) = self.gaps.iter().find(|&&g| !(g > F::zero() && g <= F::half())) {
            return bad(format!("gap {g} outside (0, 1/2]"));
        }
        for (name, tau) in [("tau_1", self.tau_1), ("tau_m", self.tau_m)] {
            if !(tau > F::zero() && tau <= F::one()) {
                return bad(format!("{name} = {tau} outside (0, 1]"));
            }
        }
        if self.t_horizon == 0 {
            return bad("horizon must be positive".into());
        }
        if !(self.mean_delay >= F::zero()) {
            return bad(format!("mean delay {} is negative", self.mean_delay));
        }
        Ok(())
    }

    fn delta_max(&self) -> F {
        self.gaps.iter().copied().fold(F::zero(), F::max)
    }
}

fn check_alpha<F: Scalar>(alpha: F, min: f64) -> Result<(), BoundsError> {
    if alpha > F::of(min) {
        Ok(())
    } else {
        Err(BoundsError::Alpha {
            alpha: alpha.as_f64(),
            min,
        })
    }
}

/// `C(δ) = ((4α−1)(M+1)K(K−1) / ((2α−1)δ))^{1/(2α−1)}`.
pub fn c_delta<F: Scalar>(alpha: F, m_window: usize, k: usize, delta: F) -> Result<F, BoundsError> {
    check_alpha(alpha, 0.5)?;
    if !(delta > F::zero()) {
        return Err(BoundsError::Input(format!("delta must be positive, got {delta}")));
    }
    let one = F::one();
    let two = F::of(2.0);
    let pairs = F::of_count(k as u64) * F::of_count(k as u64 - 1);
    let base = (F::of(4.0) * alpha - one) * F::of_count(m_window as u64 + 1) * pairs
        / ((two * alpha - one) * delta);
    Ok(base.powf(one / (two * alpha - one)))
}

/// Explicit expected-regret bound of RUCB-Delay.
///
/// `D` sums `4α / min(Δ_i², Δ_j²)` over unordered arm pairs; a pair that
/// contains the winner contributes through the other arm's gap alone.
/// With `use_tau_m`, `τ_1` is replaced by `τ_M / (M + 1)`.
pub fn rucb_delay_expected_bound<F: Scalar>(
    inputs: &BoundInputs<F>,
    use_tau_m: bool,
) -> Result<F, BoundsError> {
    inputs.validate()?;
    check_alpha(inputs.alpha, 1.0)?;
    let one = F::one();
    let two = F::of(2.0);
    let four = F::of(4.0);
    let alpha = inputs.alpha;
    let k = F::of_count(inputs.k as u64);
    let m1 = F::of_count(inputs.m_window as u64 + 1);
    let tau = if use_tau_m { inputs.tau_m / m1 } else { inputs.tau_1 };
    let tau2 = tau * tau;
    let dmax = inputs.delta_max();

    let c = (two * (four * alpha - one) * m1 * k * (k - one) / (two * alpha - one))
        .powf(one / (two * alpha - one));
    let constant = (F::of(8.0) + c * (two * alpha - one) / (alpha - one)) * dmax;

    let gaps = &inputs.gaps;
    let mut d = F::zero();
    for (x, &gi) in gaps.iter().enumerate() {
        d = d + four * alpha / (gi * gi);
        for &gj in &gaps[x + 1..] {
            let g = gi.min(gj);
            d = d + four * alpha / (g * g);
        }
    }
    d = d / tau2;
    let d_term = two * d * (two * d).ln() * dmax;

    let log_t = F::of_count(inputs.t_horizon).ln();
    let log_term = gaps
        .iter()
        .map(|&g| two * alpha * (g + four * dmax) / (tau2 * g * g))
        .sum::<F>()
        * log_t;
    Ok(constant + d_term + log_term)
}

fn floored_log<F: Scalar>(x: F) -> F {
    x.ln().max(F::zero())
}

fn gamma_of<F: Scalar>(m: u32) -> F {
    F::half().powi(m as i32)
}

fn ceil_count<F: Scalar>(x: F) -> u64 {
    x.ceil().to_u64().unwrap_or(u64::MAX)
}

/// `(sqrt(a) + sqrt(b))²` in expanded form; exact when `a = 0`.
fn squared_sum<F: Scalar>(a: F, b: F) -> F {
    a + b + F::of(2.0) * (a * b).sqrt()
}

/// Per-pair play target `n_m` of round `m` for MRR-DB-Delay.
pub fn n_schedule<F: Scalar>(m: u32, t_horizon: u64, mean_delay: F) -> u64 {
    let g = gamma_of::<F>(m);
    let two = F::of(2.0);
    let l = floored_log(F::of_count(t_horizon) * g * g);
    let e = mean_delay;
    let inner = l / two
        + F::of(4.0 / 3.0) * g * l
        + two * g * (two * e * l).sqrt()
        + two * g * e;
    ceil_count(squared_sum(l / two, inner) / (g * g))
}

/// Per-pair play target `n_m` under aggregated anonymous feedback.
pub fn n_schedule_aggregated<F: Scalar>(m: u32, t_horizon: u64, mean_delay: F) -> u64 {
    let g = gamma_of::<F>(m);
    let two = F::of(2.0);
    let l = floored_log(F::of_count(t_horizon) * g * g);
    let inner = two * l + F::of(8.0 / 3.0) * g * l + F::of(6.0) * g * F::of_count(m as u64) * mean_delay;
    ceil_count(squared_sum(two * l, inner) / (g * g))
}

/// Explicit expected-regret bound of MRR-DB-Delay.
pub fn mrr_expected_bound<F: Scalar>(inputs: &BoundInputs<F>) -> Result<F, BoundsError> {
    inputs.validate()?;
    let k = F::of_count(inputs.k as u64);
    let t = F::of_count(inputs.t_horizon);
    let e = inputs.mean_delay;
    let two = F::of(2.0);
    let six = F::of(6.0);
    Ok(inputs
        .gaps
        .iter()
        .map(|&g| {
            let l = floored_log(F::of(4.0) * t * g * g / F::of(9.0));
            F::of(9.0) * k * l / g
                + F::of(4.0) * k * l
                + six * k * (two * e * l).sqrt()
                + F::of(81.0) / g
                + six * k * e
                + k * g / two
        })
        .sum())
}

/// Gap `Δ* = sqrt((K−1)/(128 T τ_M))` of the hard instance and the
/// `sqrt(T K / τ_M)` regret scale it forces.
pub fn lower_bound_value<F: Scalar>(k: usize, t_horizon: u64, tau_m: F) -> Result<(F, F), BoundsError> {
    if k < 2 {
        return Err(BoundsError::Input(format!("need at least 2 arms, got {k}")));
    }
    if !(tau_m > F::zero() && tau_m <= F::one()) {
        return Err(BoundsError::Input(format!("tau_m = {tau_m} outside (0, 1]")));
    }
    let t = F::of_count(t_horizon);
    let kf = F::of_count(k as u64);
    let gap = ((kf - F::one()) / (F::of(128.0) * t * tau_m)).sqrt();
    let bound = (t * kf / tau_m).sqrt();
    Ok((gap, bound))
}
