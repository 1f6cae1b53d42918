use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DelayError {
    #[error("geometric parameter must lie in (0, 1], got {0}")]
    GeometricParameter(f64),
    #[error("deterministic delay must be at least 1")]
    ZeroDelay,
    #[error("uniform delay range must satisfy 1 <= lo <= hi, got {lo}..={hi}")]
    UniformRange { lo: u64, hi: u64 },
    #[error("delay table entry {index} is {value}; weights must be finite and non-negative")]
    TableEntry { index: usize, value: f64 },
    #[error("delay table has no positive mass")]
    EmptyTable,
    #[error("cannot read delay table {path}: {message}")]
    TableFile { path: String, message: String },
    #[error("unrecognised delay spec `{0}` (expected geometric:<p>, det:<d>, uniform:<lo>:<hi> or table:<file>)")]
    BadSpec(String),
}

/// Distribution of the conversion delay `D ≥ 1`, shared by every arm pair.
///
/// `tau(d) = P(D ≤ d)` with `tau(0) = 0`: the earliest a conversion can be
/// seen is one step after the play.
#[derive(Debug, Clone, PartialEq)]
pub enum DelayDistribution {
    /// `P(D = d) = p (1 − p)^(d−1)` on `{1, 2, ...}`, mean `1/p`.
    Geometric { p: f64 },
    /// Every delay equals `d0`.
    Deterministic { d0: u64 },
    /// Uniform on the integers `lo..=hi`.
    Uniform { lo: u64, hi: u64 },
    /// Probability mass over `1..=pmf.len()`; `cdf` is its running sum.
    Table { pmf: Vec<f64>, cdf: Vec<f64> },
}

impl DelayDistribution {
    pub fn geometric(p: f64) -> Result<Self, DelayError> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(DelayError::GeometricParameter(p));
        }
        Ok(Self::Geometric { p })
    }

    pub fn deterministic(d0: u64) -> Result<Self, DelayError> {
        if d0 == 0 {
            return Err(DelayError::ZeroDelay);
        }
        Ok(Self::Deterministic { d0 })
    }

    pub fn uniform(lo: u64, hi: u64) -> Result<Self, DelayError> {
        if lo == 0 || lo > hi {
            return Err(DelayError::UniformRange { lo, hi });
        }
        Ok(Self::Uniform { lo, hi })
    }

    /// Builds a tabulated distribution from weights for delays `1, 2, ...`.
    /// Weights are normalized to sum to one.
    pub fn table(weights: Vec<f64>) -> Result<Self, DelayError> {
        for (index, &value) in weights.iter().enumerate() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(DelayError::TableEntry { index, value });
            }
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(DelayError::EmptyTable);
        }
        let pmf: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = pmf
            .iter()
            .map(|p| {
                acc += p;
                acc.min(1.0)
            })
            .collect();
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        Ok(Self::Table { pmf, cdf })
    }

    /// Reads table weights separated by commas, whitespace or newlines.
    pub fn table_from_file(path: impl AsRef<Path>) -> Result<Self, DelayError> {
        let path = path.as_ref();
        let file_err = |message: String| DelayError::TableFile {
            path: path.display().to_string(),
            message,
        };
        let text = fs::read_to_string(path).map_err(|e| file_err(e.to_string()))?;
        let weights = text
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| file_err(format!("bad number `{s}`: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::table(weights)
    }

    /// Parses the command-line form: `geometric:<p>`, `det:<d>`,
    /// `uniform:<lo>:<hi>` or `table:<file>`.
    pub fn parse_spec(spec: &str) -> Result<Self, DelayError> {
        let bad = || DelayError::BadSpec(spec.to_string());
        let (kind, rest) = spec.split_once(':').ok_or_else(bad)?;
        match kind {
            "geometric" | "geom" => Self::geometric(rest.trim().parse().map_err(|_| bad())?),
            "det" | "deterministic" => {
                Self::deterministic(rest.trim().parse().map_err(|_| bad())?)
            }
            "uniform" => {
                let (lo, hi) = rest.split_once(':').ok_or_else(bad)?;
                Self::uniform(
                    lo.trim().parse().map_err(|_| bad())?,
                    hi.trim().parse().map_err(|_| bad())?,
                )
            }
            "table" => Self::table_from_file(rest),
            _ => Err(bad()),
        }
    }

    /// Cumulative distribution `τ_d = P(D ≤ d)`.
    pub fn tau(&self, d: u64) -> f64 {
        if d == 0 {
            return 0.0;
        }
        match self {
            Self::Geometric { p } => {
                if *p >= 1.0 {
                    1.0
                } else {
                    // 1 − (1 − p)^d without cancellation for small p
                    -(d as f64 * (-p).ln_1p()).exp_m1()
                }
            }
            Self::Deterministic { d0 } => {
                if d >= *d0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Uniform { lo, hi } => {
                if d < *lo {
                    0.0
                } else if d >= *hi {
                    1.0
                } else {
                    (d - lo + 1) as f64 / (hi - lo + 1) as f64
                }
            }
            Self::Table { cdf, .. } => {
                let idx = (d as usize).min(cdf.len()) - 1;
                cdf[idx]
            }
        }
    }

    /// `[τ_1, ..., τ_m]`.
    pub fn tau_table(&self, m: usize) -> Vec<f64> {
        (1..=m as u64).map(|d| self.tau(d)).collect()
    }

    /// Expected delay `E[D]`.
    pub fn mean(&self) -> f64 {
        match self {
            Self::Geometric { p } => 1.0 / p,
            Self::Deterministic { d0 } => *d0 as f64,
            Self::Uniform { lo, hi } => (*lo + *hi) as f64 / 2.0,
            Self::Table { pmf, .. } => pmf
                .iter()
                .enumerate()
                .map(|(i, p)| (i + 1) as f64 * p)
                .sum(),
        }
    }

    /// Draws one delay. Consumes randomness from `rng` except for the
    /// deterministic variant.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            Self::Geometric { p } => {
                // rand_distr counts failures before the first success
                let failures = Geometric::new(*p)
                    .expect("validated geometric parameter")
                    .sample(rng);
                failures.saturating_add(1)
            }
            Self::Deterministic { d0 } => *d0,
            Self::Uniform { lo, hi } => rng.random_range(*lo..=*hi),
            Self::Table { cdf, .. } => {
                let u: f64 = rng.random();
                let idx = cdf.partition_point(|&c| c <= u);
                (idx.min(cdf.len() - 1) + 1) as u64
            }
        }
    }
}
