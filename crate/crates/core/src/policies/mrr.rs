use rand::RngCore;

use super::{Feedback, Policy, PolicyAction, PolicyError};
use crate::bounds::{n_schedule, n_schedule_aggregated};
use crate::env::FeedbackMode;
use crate::Scalar;

/// Which per-round play target the policy follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScheduleKind {
    /// Conversions arrive tied to their play.
    #[default]
    Standard,
    /// Only the number of conversions landing each step is seen.
    Aggregated,
}

/// Outcome of one round boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundReport {
    /// Round that just ended.
    pub round: u32,
    /// Time step at which the round was closed.
    pub at: u64,
    pub eliminated: Vec<usize>,
    /// Every arm failed the test and the best-worst arm was kept.
    pub fallback_used: bool,
}

/// Multi-round round-robin elimination with tolerance `γ_m = 2^{-m}`.
///
/// Play counts and conversion counts accumulate across rounds. A round
/// closes lazily, at the first selection after every active ordered pair
/// has reached the target `n_m`.
#[derive(Debug, Clone)]
pub struct MrrDelay<F> {
    k: usize,
    horizon: u64,
    mean_delay: F,
    schedule: ScheduleKind,
    round: u32,
    target: u64,
    active: Vec<usize>,
    plays: Vec<u64>,
    hits: Vec<u64>,
    last: Option<PolicyAction>,
    reports: Vec<RoundReport>,
}

impl<F: Scalar> MrrDelay<F> {
    pub fn new(k: usize, horizon: u64, mean_delay: F, schedule: ScheduleKind) -> Self {
        let mut policy = Self {
            k,
            horizon,
            mean_delay,
            schedule,
            round: 1,
            target: 0,
            active: (0..k).collect(),
            plays: vec![0; k * k],
            hits: vec![0; k * k],
            last: None,
            reports: Vec::new(),
        };
        policy.target = policy.schedule_value(1).max(1);
        policy
    }

    fn schedule_value(&self, m: u32) -> u64 {
        match self.schedule {
            ScheduleKind::Standard => n_schedule(m, self.horizon, self.mean_delay),
            ScheduleKind::Aggregated => n_schedule_aggregated(m, self.horizon, self.mean_delay),
        }
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn gamma(&self) -> F {
        F::half().powi(self.round as i32)
    }

    /// Per-pair play target `n_m` of the current round.
    pub fn target(&self) -> u64 {
        self.target
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn plays(&self, i: usize, j: usize) -> u64 {
        self.plays[i * self.k + j]
    }

    pub fn hits(&self, i: usize, j: usize) -> u64 {
        self.hits[i * self.k + j]
    }

    /// Fraction of plays of `(i, j)` observed as converted so far.
    pub fn y_bar(&self, i: usize, j: usize) -> Option<F> {
        let n = self.plays(i, j);
        (n > 0).then(|| F::of_count(self.hits(i, j)) / F::of_count(n))
    }

    pub fn reports(&self) -> &[RoundReport] {
        &self.reports
    }

    /// Next active ordered pair below the round target, in lexicographic
    /// order, recorded as played at `t`.
    pub fn mrr_select(&mut self) -> Result<PolicyAction, PolicyError> {
        if self.active.len() == 1 {
            let a = self.active[0];
            return Ok(PolicyAction::new(a, a));
        }
        for &i in &self.active {
            for &j in &self.active {
                if i != j && self.plays(i, j) < self.target {
                    self.plays[i * self.k + j] += 1;
                    return Ok(PolicyAction::new(i, j));
                }
            }
        }
        Err(PolicyError::RoundComplete)
    }

    fn worst_mean(&self, i: usize) -> F {
        self.active
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| self.y_bar(i, j).unwrap_or(F::half()))
            .fold(F::infinity(), F::min)
    }

    /// Closes the current round at time `t`: eliminates arms with some
    /// `Ȳ_ij + γ_m < 1/2`, halves `γ` and raises the target.
    pub fn mrr_end_round(&mut self, t: u64) -> RoundReport {
        let gamma = self.gamma();
        let half = F::half();
        let beaten = |i: usize| {
            self.active.iter().any(|&j| {
                j != i && self.y_bar(i, j).is_some_and(|y| y + gamma < half)
            })
        };
        let (survivors, eliminated): (Vec<usize>, Vec<usize>) =
            self.active.iter().partition(|&&i| !beaten(i));
        let fallback_used = survivors.is_empty();
        let survivors = if fallback_used {
            let mut keep = self.active[0];
            for &i in &self.active[1..] {
                if self.worst_mean(i) > self.worst_mean(keep) {
                    keep = i;
                }
            }
            vec![keep]
        } else {
            survivors
        };
        let eliminated: Vec<usize> = eliminated.into_iter().filter(|i| !survivors.contains(i)).collect();
        self.active = survivors;
        let report = RoundReport {
            round: self.round,
            at: t,
            eliminated,
            fallback_used,
        };
        self.round += 1;
        self.target = self.schedule_value(self.round).max(self.target + 1);
        self.reports.push(report.clone());
        report
    }
}

impl<F: Scalar> Policy<F> for MrrDelay<F> {
    fn name(&self) -> &'static str {
        "mrr-delay"
    }

    fn observe(&mut self, _t: u64, feedback: Feedback<'_>) -> Result<(), PolicyError> {
        let k = self.k;
        match (feedback, self.schedule) {
            (Feedback::Conversions(conversions), _) => {
                for c in conversions.iter().filter(|c| c.u != c.v) {
                    self.hits[c.u * k + c.v] += 1;
                }
            }
            (Feedback::Aggregated(count), ScheduleKind::Aggregated) => {
                if let Some(a) = self.last.filter(|a| a.u != a.v) {
                    self.hits[a.u * k + a.v] += count;
                }
            }
            (Feedback::Aggregated(_), ScheduleKind::Standard) => {
                return Err(PolicyError::UnsupportedFeedback {
                    policy: "mrr-delay",
                    mode: FeedbackMode::Aggregated,
                })
            }
        }
        Ok(())
    }

    fn select(&mut self, t: u64, _rng: &mut dyn RngCore) -> Result<PolicyAction, PolicyError> {
        let action = match self.mrr_select() {
            Err(PolicyError::RoundComplete) => {
                self.mrr_end_round(t);
                self.mrr_select()?
            }
            other => other?,
        };
        self.last = Some(action);
        Ok(action)
    }

    fn active_arms(&self) -> Option<Vec<usize>> {
        Some(self.active.clone())
    }

    fn declared_winner(&self) -> Option<usize> {
        let mut best = self.active[0];
        for &i in &self.active[1..] {
            if self.worst_mean(i) > self.worst_mean(best) {
                best = i;
            }
        }
        Some(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Conversion;

    fn with_target(k: usize, target: u64) -> MrrDelay<f64> {
        let mut p = MrrDelay::new(k, 1000, 0.0, ScheduleKind::Standard);
        p.target = target;
        p
    }

    #[test]
    fn two_arm_round_is_lexicographic() {
        let mut p = with_target(2, 5);
        let played: Vec<PolicyAction> = (0..10).map(|_| p.mrr_select().unwrap()).collect();
        assert!(played[..5].iter().all(|a| *a == PolicyAction::new(0, 1)));
        assert!(played[5..].iter().all(|a| *a == PolicyAction::new(1, 0)));
        assert_eq!(p.mrr_select(), Err(PolicyError::RoundComplete));
    }

    #[test]
    fn single_arm_plays_itself() {
        let mut p = with_target(1, 5);
        assert_eq!(p.mrr_select().unwrap(), PolicyAction::new(0, 0));
    }

    #[test]
    fn elimination_rule_at_quarter_tolerance() {
        // round 2 has γ = 1/4
        let mut p = with_target(3, 10);
        p.round = 2;
        for _ in 0..60 {
            p.mrr_select().unwrap();
        }
        let set = |p: &mut MrrDelay<f64>, i: usize, j: usize, h: u64| p.hits[i * 3 + j] = h;
        // Ȳ_10 = 0.2 eliminates arm 1; Ȳ_20 = 0.3 keeps arm 2
        set(&mut p, 0, 1, 8);
        set(&mut p, 0, 2, 7);
        set(&mut p, 1, 0, 2);
        set(&mut p, 1, 2, 5);
        set(&mut p, 2, 0, 3);
        set(&mut p, 2, 1, 5);
        let report = p.mrr_end_round(61);
        assert_eq!(report.eliminated, vec![1]);
        assert!(!report.fallback_used);
        assert_eq!(p.active(), &[0, 2]);
        assert_eq!(p.round(), 3);
        assert_eq!(p.gamma(), 0.125);
        assert!(p.target() >= 11);
    }

    #[test]
    fn all_eliminated_keeps_best_worst_case() {
        let mut p = with_target(2, 4);
        p.round = 3;
        for _ in 0..8 {
            p.mrr_select().unwrap();
        }
        p.hits[1] = 1; // Ȳ_01 = 0.25
        p.hits[2] = 0; // Ȳ_10 = 0
        let report = p.mrr_end_round(9);
        assert!(report.fallback_used);
        assert_eq!(p.active(), &[0]);
        assert_eq!(report.eliminated, vec![1]);
    }

    #[test]
    fn conversions_and_aggregated_credit() {
        let mut p = with_target(2, 5);
        p.observe(3, Feedback::Conversions(&[Conversion { at: 3, s: 1, u: 1, v: 0 }])).unwrap();
        assert_eq!(p.hits(1, 0), 1);
        assert!(p.observe(3, Feedback::Aggregated(1)).is_err());

        let mut q = MrrDelay::<f64>::new(2, 1000, 0.0, ScheduleKind::Aggregated);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
        let a = q.select(1, &mut rng).unwrap();
        q.observe(2, Feedback::Aggregated(2)).unwrap();
        assert_eq!(q.hits(a.u, a.v), 2);
    }

    #[test]
    fn gamma_halves_and_target_grows() {
        let mut p = MrrDelay::<f64>::new(3, 50_000, 100.0, ScheduleKind::Standard);
        assert_eq!(p.gamma(), 0.5);
        assert_eq!(p.target(), 853);
        let mut previous = p.target();
        for m in 2..6 {
            p.mrr_end_round(0);
            assert_eq!(p.round(), m);
            assert_eq!(p.gamma(), 0.5f64.powi(m as i32));
            assert!(p.target() > previous);
            previous = p.target();
        }
    }
}
