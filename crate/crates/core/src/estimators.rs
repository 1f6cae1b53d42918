//! Windowed, delay-corrected pairwise statistics.
//!
//! For a pair `(i, j)` at time `t` (plays at steps `s < t`):
//!
//! - `N_ij` counts plays of `(i, j)` and `(j, i)`;
//! - `Ñ_ij` weights each of those plays by `τ_{min(M, t−s)}`, the chance its
//!   conversion would already be visible;
//! - `S_ij` adds the censored observation `Ỹ_{s,t}` for plays of `(i, j)` and
//!   `τ_{min(M, t−s)} − Ỹ_{s,t}` for plays of `(j, i)`.
//!
//! `μ̂_ij = S_ij / Ñ_ij` is conditionally unbiased given the play schedule.
//! Plays older than the window `M` are folded into permanent aggregates, so
//! storage is `O(K² + M)`.

use std::collections::VecDeque;
use std::io::{self, Write};

use thiserror::Error;

use crate::env::DelayDistribution;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("play at t={t} does not advance past the previous play at t={last}")]
    OutOfOrder { t: u64, last: u64 },
    #[error("no play ({u}, {v}) at s={s} inside the censoring window")]
    UnknownPlay { s: u64, u: usize, v: usize },
    #[error("no discounted comparisons for pair ({i}, {j}) yet")]
    NoData { i: usize, j: usize },
    #[error("arm index {arm} out of range for {k} arms")]
    ArmOutOfRange { arm: usize, k: usize },
    #[error("censoring window must be at least 1")]
    EmptyWindow,
}

#[derive(Debug, Clone, Copy)]
struct WindowEntry {
    s: u64,
    u: usize,
    v: usize,
    converted: bool,
}

#[derive(Debug, Clone)]
pub struct EstimatorState<F> {
    k: usize,
    window: u64,
    /// `tau[d − 1] = τ_d` for `d = 1..=M`.
    tau: Vec<F>,
    n: Vec<u64>,
    folded_n_tilde: Vec<F>,
    folded_s: Vec<F>,
    entries: VecDeque<WindowEntry>,
    last_play: Option<u64>,
}

impl<F: Scalar> EstimatorState<F> {
    pub fn new(k: usize, window: usize, delay: &DelayDistribution) -> Result<Self, EstimatorError> {
        let tau = delay.tau_table(window).into_iter().map(F::of).collect();
        Self::with_tau(k, tau)
    }

    /// Builds the state from an explicit table `[τ_1, ..., τ_M]`.
    pub fn with_tau(k: usize, tau: Vec<F>) -> Result<Self, EstimatorError> {
        if tau.is_empty() {
            return Err(EstimatorError::EmptyWindow);
        }
        Ok(Self {
            k,
            window: tau.len() as u64,
            tau,
            n: vec![0; k * k],
            folded_n_tilde: vec![F::zero(); k * k],
            folded_s: vec![F::zero(); k * k],
            entries: VecDeque::new(),
            last_play: None,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn window(&self) -> u64 {
        self.window
    }

    /// Plays currently held individually (not yet folded).
    pub fn window_len(&self) -> usize {
        self.entries.len()
    }

    /// `τ_{min(M, age)}`, zero for age 0.
    #[inline]
    pub fn tau_at(&self, age: u64) -> F {
        if age == 0 {
            F::zero()
        } else {
            self.tau[(age.min(self.window) - 1) as usize]
        }
    }

    /// Records the play of `(u, v)` at step `t`; steps must strictly increase.
    pub fn record_play(&mut self, u: usize, v: usize, t: u64) -> Result<(), EstimatorError> {
        self.check_arm(u)?;
        self.check_arm(v)?;
        if let Some(last) = self.last_play {
            if t <= last {
                return Err(EstimatorError::OutOfOrder { t, last });
            }
        }
        self.advance(t);
        let k = self.k;
        self.n[u * k + v] += 1;
        self.n[v * k + u] += 1;
        self.entries.push_back(WindowEntry {
            s: t,
            u,
            v,
            converted: false,
        });
        self.last_play = Some(t);
        Ok(())
    }

    /// Marks the play at `s` as converted, as observed at time `t`.
    ///
    /// Returns `Ok(false)` and leaves the state untouched when the conversion
    /// is older than the window (`t − s > M`): the censored observation rule
    /// treats it as never happening. A repeated conversion is a no-op.
    pub fn ingest_conversion(
        &mut self,
        s: u64,
        u: usize,
        v: usize,
        t: u64,
    ) -> Result<bool, EstimatorError> {
        if t.saturating_sub(s) > self.window {
            return Ok(false);
        }
        let idx = self
            .entries
            .binary_search_by_key(&s, |e| e.s)
            .map_err(|_| EstimatorError::UnknownPlay { s, u, v })?;
        let entry = &mut self.entries[idx];
        if entry.u != u || entry.v != v {
            return Err(EstimatorError::UnknownPlay { s, u, v });
        }
        entry.converted = true;
        Ok(true)
    }

    /// Folds plays whose age at `t` exceeds the window into the permanent
    /// aggregates. Their weight is `τ_M` from then on.
    pub fn advance(&mut self, t: u64) {
        let k = self.k;
        let tau_m = self.tau[self.tau.len() - 1];
        while let Some(e) = self.entries.front() {
            if t.saturating_sub(e.s) <= self.window {
                break;
            }
            let y = if e.converted { F::one() } else { F::zero() };
            self.folded_n_tilde[e.u * k + e.v] = self.folded_n_tilde[e.u * k + e.v] + tau_m;
            self.folded_n_tilde[e.v * k + e.u] = self.folded_n_tilde[e.v * k + e.u] + tau_m;
            self.folded_s[e.u * k + e.v] = self.folded_s[e.u * k + e.v] + y;
            self.folded_s[e.v * k + e.u] = self.folded_s[e.v * k + e.u] + (tau_m - y);
            self.entries.pop_front();
        }
    }

    /// Exact comparison count `N_ij` (both orders; a self-play counts twice).
    pub fn n(&self, i: usize, j: usize) -> u64 {
        self.n[i * self.k + j]
    }

    /// Delay-discounted count `Ñ_ij(t)`.
    pub fn n_tilde(&self, i: usize, j: usize, t: u64) -> F {
        let mut acc = self.folded_n_tilde[i * self.k + j];
        for e in &self.entries {
            let hits = ((e.u, e.v) == (i, j)) as u8 + ((e.u, e.v) == (j, i)) as u8;
            if hits > 0 {
                let w = self.tau_at(t.saturating_sub(e.s));
                acc = acc + w * F::of(hits as f64);
            }
        }
        acc
    }

    /// Bias-corrected win count `S_ij(t)`.
    pub fn s_stat(&self, i: usize, j: usize, t: u64) -> F {
        let mut acc = self.folded_s[i * self.k + j];
        for e in &self.entries {
            let y = if e.converted { F::one() } else { F::zero() };
            if (e.u, e.v) == (i, j) {
                acc = acc + y;
            }
            if (e.u, e.v) == (j, i) {
                acc = acc + (self.tau_at(t.saturating_sub(e.s)) - y);
            }
        }
        acc
    }

    /// `μ̂_ij(t) = S_ij / Ñ_ij`, not clipped to `[0, 1]`.
    pub fn mu_hat(&self, i: usize, j: usize, t: u64) -> Result<F, EstimatorError> {
        let nt = self.n_tilde(i, j, t);
        if nt > F::zero() {
            Ok(self.s_stat(i, j, t) / nt)
        } else {
            Err(EstimatorError::NoData { i, j })
        }
    }

    /// Modified upper confidence bound `U_ij(t)`; 1/2 on the diagonal and 1
    /// when there is no discounted data.
    pub fn ucb(&self, i: usize, j: usize, t: u64, alpha: F) -> F {
        if i == j {
            return F::half();
        }
        let nt = self.n_tilde(i, j, t);
        ucb_value(self.s_stat(i, j, t), nt, self.n(i, j), t, alpha)
    }

    /// `L_ij(t) = 1 − U_ji(t)`.
    pub fn lcb(&self, i: usize, j: usize, t: u64, alpha: F) -> F {
        F::one() - self.ucb(j, i, t, alpha)
    }

    /// Computes `N`, `Ñ` and `S` for every pair in one pass over the window.
    pub fn snapshot(&self, t: u64) -> PairStats<F> {
        let k = self.k;
        let mut n_tilde = self.folded_n_tilde.clone();
        let mut s = self.folded_s.clone();
        for e in &self.entries {
            let w = self.tau_at(t.saturating_sub(e.s));
            let y = if e.converted { F::one() } else { F::zero() };
            n_tilde[e.u * k + e.v] = n_tilde[e.u * k + e.v] + w;
            n_tilde[e.v * k + e.u] = n_tilde[e.v * k + e.u] + w;
            s[e.u * k + e.v] = s[e.u * k + e.v] + y;
            s[e.v * k + e.u] = s[e.v * k + e.u] + (w - y);
        }
        PairStats {
            k,
            t,
            n: self.n.clone(),
            n_tilde,
            s,
        }
    }

    /// Writes `t,i,j,N,N_tilde,S,mu_hat,U` rows for every ordered pair `i ≠ j`.
    /// `mu_hat` is left empty when `Ñ_ij = 0`.
    pub fn write_debug_csv<W: Write>(&self, mut out: W, t: u64, alpha: F, header: bool) -> io::Result<()> {
        if header {
            writeln!(out, "t,i,j,N,N_tilde,S,mu_hat,U")?;
        }
        let stats = self.snapshot(t);
        for i in 0..self.k {
            for j in 0..self.k {
                if i == j {
                    continue;
                }
                let mu = stats
                    .mu_hat(i, j)
                    .map(|m| m.to_string())
                    .unwrap_or_default();
                writeln!(
                    out,
                    "{t},{i},{j},{},{},{},{mu},{}",
                    stats.n(i, j),
                    stats.n_tilde(i, j),
                    stats.s(i, j),
                    stats.ucb(i, j, alpha)
                )?;
            }
        }
        Ok(())
    }

    fn check_arm(&self, arm: usize) -> Result<(), EstimatorError> {
        if arm < self.k {
            Ok(())
        } else {
            Err(EstimatorError::ArmOutOfRange { arm, k: self.k })
        }
    }
}

/// `μ̂ + sqrt(α N log t / Ñ²)`, or 1 when `Ñ = 0`.
pub(crate) fn ucb_value<F: Scalar>(s: F, n_tilde: F, n: u64, t: u64, alpha: F) -> F {
    if n_tilde <= F::zero() {
        return F::one();
    }
    let log_t = F::of_count(t.max(1)).ln();
    let radius = (alpha * F::of_count(n) * log_t / (n_tilde * n_tilde)).sqrt();
    s / n_tilde + radius
}

/// All-pairs statistics frozen at one time step.
#[derive(Debug, Clone)]
pub struct PairStats<F> {
    k: usize,
    t: u64,
    n: Vec<u64>,
    n_tilde: Vec<F>,
    s: Vec<F>,
}

impl<F: Scalar> PairStats<F> {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn n(&self, i: usize, j: usize) -> u64 {
        self.n[i * self.k + j]
    }

    pub fn n_tilde(&self, i: usize, j: usize) -> F {
        self.n_tilde[i * self.k + j]
    }

    pub fn s(&self, i: usize, j: usize) -> F {
        self.s[i * self.k + j]
    }

    pub fn mu_hat(&self, i: usize, j: usize) -> Option<F> {
        let nt = self.n_tilde(i, j);
        (nt > F::zero()).then(|| self.s(i, j) / nt)
    }

    pub fn ucb(&self, i: usize, j: usize, alpha: F) -> F {
        if i == j {
            return F::half();
        }
        ucb_value(self.s(i, j), self.n_tilde(i, j), self.n(i, j), self.t, alpha)
    }

    /// Row-major `K×K` matrix of [`ucb`](Self::ucb).
    pub fn ucb_matrix(&self, alpha: F) -> Vec<F> {
        let k = self.k;
        (0..k * k).map(|idx| self.ucb(idx / k, idx % k, alpha)).collect()
    }
}
