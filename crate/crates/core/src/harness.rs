//! Seeded replications, aggregation and CSV output.
//!
//! Run `r` of an experiment uses seed `base_seed + r`. The seed initialises
//! two ChaCha8 generators on disjoint streams: stream 0 drives the
//! environment (per step: one uniform draw for the outcome, then the delay
//! sample) and stream 1 drives the policy.
//!
//! Each step `t = 1..=T` delivers the feedback visible at `t`, asks the
//! policy for a pair, plays it and books its regret.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rayon::prelude::*;
use thiserror::Error;

use crate::datasets::{DatasetError, DatasetSpec};
use crate::env::{DelayDistribution, EnvError, Environment, FeedbackMode, PreferenceMatrix, RegretTracker};
use crate::policies::{build_policy, Feedback, Policy, PolicyError, PolicyKind, PolicyParams};
use crate::{Scalar, SimRng};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub policy: PolicyKind,
    pub params: PolicyParams,
    pub delay: DelayDistribution,
    pub mode: FeedbackMode,
    pub horizon: u64,
    pub runs: u32,
    pub base_seed: u64,
    /// Regret is recorded every `stride` steps and at `T`.
    pub stride: u64,
}

impl ExperimentConfig {
    /// Desk-scale defaults: `T = 50 000`, 20 runs, stride 100, geometric
    /// delay with `p = 0.01`, `α = 1`, `M = 1000`.
    pub fn desk(dataset: DatasetSpec, policy: PolicyKind) -> Self {
        Self {
            dataset,
            policy,
            params: PolicyParams::default(),
            delay: DelayDistribution::geometric(0.01).expect("valid default delay"),
            mode: FeedbackMode::Standard,
            horizon: 50_000,
            runs: 20,
            base_seed: 0,
            stride: 100,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: &str| Err(HarnessError::Config(msg.to_string()));
        if self.horizon == 0 {
            return bad("horizon must be at least 1");
        }
        if self.runs == 0 {
            return bad("runs must be at least 1");
        }
        if self.stride == 0 {
            return bad("stride must be at least 1");
        }
        Ok(())
    }
}

/// Environment and policy generators for one seed.
pub fn rngs_for_seed(seed: u64) -> (SimRng, SimRng) {
    let mut env = SimRng::seed_from_u64(seed);
    env.set_stream(0);
    let mut policy = SimRng::seed_from_u64(seed);
    policy.set_stream(1);
    (env, policy)
}

/// Recorded time steps: `stride, 2·stride, ...` and always `T`.
pub fn sample_times(horizon: u64, stride: u64) -> Vec<u64> {
    let mut times: Vec<u64> = (1..=horizon / stride).map(|i| i * stride).collect();
    if !horizon.is_multiple_of(stride) {
        times.push(horizon);
    }
    times
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub seed: u64,
    pub times: Vec<u64>,
    /// Cumulative regret at each of `times`.
    pub regret: Vec<f64>,
    pub active: Option<Vec<usize>>,
    pub declared_winner: Option<usize>,
}

impl RunTrace {
    pub fn final_regret(&self) -> f64 {
        self.regret.last().copied().unwrap_or(0.0)
    }

    /// Cumulative regret at the recorded time closest to `t` from below.
    pub fn regret_at(&self, t: u64) -> f64 {
        match self.times.partition_point(|&x| x <= t) {
            0 => 0.0,
            i => self.regret[i - 1],
        }
    }
}

/// One replication with a policy built from the configuration.
pub fn run_one<F: Scalar>(
    config: &ExperimentConfig,
    matrix: &PreferenceMatrix<F>,
    seed: u64,
) -> Result<RunTrace, HarnessError> {
    let mut policy = build_policy::<F>(
        config.policy,
        &config.params,
        matrix.k(),
        &config.delay,
        config.horizon,
        config.mode,
    )?;
    run_one_with_policy(config, matrix, policy.as_mut(), seed)
}

/// One replication driving a caller-supplied policy.
pub fn run_one_with_policy<F: Scalar>(
    config: &ExperimentConfig,
    matrix: &PreferenceMatrix<F>,
    policy: &mut dyn Policy<F>,
    seed: u64,
) -> Result<RunTrace, HarnessError> {
    config.validate()?;
    let (mut env_rng, mut policy_rng) = rngs_for_seed(seed);
    let mut env = Environment::new(matrix.clone(), config.delay.clone())
        .with_mode(config.mode)
        .with_horizon(config.horizon);
    let mut tracker = RegretTracker::new(matrix);
    let times = sample_times(config.horizon, config.stride);
    let mut regret = Vec::with_capacity(times.len());
    let mut next = times.iter().peekable();

    for t in 1..=config.horizon {
        match config.mode {
            FeedbackMode::Standard => {
                let conversions = env.drain_conversions(t)?;
                policy.observe(t, Feedback::Conversions(&conversions))?;
            }
            FeedbackMode::Aggregated => {
                let count = env.observe_aggregated(t)?;
                policy.observe(t, Feedback::Aggregated(count))?;
            }
        }
        let action = policy.select(t, &mut policy_rng)?;
        env.step(action.u, action.v, &mut env_rng)?;
        tracker.instant_regret(action.u, action.v);
        if next.peek() == Some(&&t) {
            next.next();
            regret.push(tracker.cumulative().as_f64());
        }
    }

    Ok(RunTrace {
        seed,
        times,
        regret,
        active: policy.active_arms(),
        declared_winner: policy.declared_winner(),
    })
}

/// Pointwise aggregate of an experiment's replications.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub times: Vec<u64>,
    pub mean: Vec<f64>,
    /// Sample standard deviation; zero for a single run.
    pub std: Vec<f64>,
    pub runs: Vec<RunTrace>,
}

impl Experiment {
    pub fn from_runs(runs: Vec<RunTrace>) -> Self {
        let times = runs.first().map(|r| r.times.clone()).unwrap_or_default();
        let n = runs.len() as f64;
        let mut mean = Vec::with_capacity(times.len());
        let mut std = Vec::with_capacity(times.len());
        for idx in 0..times.len() {
            let m = runs.iter().map(|r| r.regret[idx]).sum::<f64>() / n;
            let var = if runs.len() > 1 {
                runs.iter().map(|r| (r.regret[idx] - m).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            mean.push(m);
            std.push(var.sqrt());
        }
        Self { times, mean, std, runs }
    }

    pub fn final_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(0.0)
    }
}

/// All replications of `config` on an already loaded matrix, in parallel.
/// Results are ordered by seed regardless of scheduling.
pub fn run_many_on<F: Scalar>(
    config: &ExperimentConfig,
    matrix: &PreferenceMatrix<F>,
) -> Result<Experiment, HarnessError> {
    config.validate()?;
    let runs = (0..config.runs as u64)
        .into_par_iter()
        .map(|r| run_one(config, matrix, config.base_seed + r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Experiment::from_runs(runs))
}

/// Loads the configured dataset and runs every replication.
pub fn run_many<F: Scalar>(config: &ExperimentConfig) -> Result<Experiment, HarnessError> {
    let matrix = config.dataset.load::<F>()?;
    run_many_on(config, &matrix)
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, HarnessError> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })
}

/// Writes `summary.csv` (`t,mean_regret,std_regret`) and `runs.csv`
/// (`seed,t,regret`) into `dir`, creating it if needed.
pub fn write_results(experiment: &Experiment, dir: impl AsRef<Path>) -> Result<(), HarnessError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.to_path_buf(),
        source,
    })?;

    let path = dir.join("summary.csv");
    let io = |source| HarnessError::Io {
        path: path.clone(),
        source,
    };
    let mut out = create(&path)?;
    writeln!(out, "t,mean_regret,std_regret").map_err(io)?;
    for ((t, m), s) in experiment.times.iter().zip(&experiment.mean).zip(&experiment.std) {
        writeln!(out, "{t},{m},{s}").map_err(io)?;
    }
    out.flush().map_err(io)?;

    let path = dir.join("runs.csv");
    let io = |source| HarnessError::Io {
        path: path.clone(),
        source,
    };
    let mut out = create(&path)?;
    writeln!(out, "seed,t,regret").map_err(io)?;
    for run in &experiment.runs {
        for (t, r) in run.times.iter().zip(&run.regret) {
            writeln!(out, "{},{t},{r}", run.seed).map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_times_cover_horizon() {
        assert_eq!(sample_times(100, 10).len(), 10);
        assert_eq!(sample_times(105, 10).len(), 11);
        assert_eq!(*sample_times(105, 10).last().unwrap(), 105);
        assert_eq!(sample_times(3, 10), vec![3]);
    }

    #[test]
    fn streams_differ() {
        use rand::RngCore;
        let (mut a, mut b) = rngs_for_seed(7);
        assert_ne!(a.next_u64(), b.next_u64());
        let (mut c, _) = rngs_for_seed(7);
        let (mut d, _) = rngs_for_seed(7);
        assert_eq!(c.next_u64(), d.next_u64());
    }

    #[test]
    fn single_run_has_zero_spread() {
        let trace = RunTrace {
            seed: 0,
            times: vec![1, 2],
            regret: vec![0.1, 0.3],
            active: None,
            declared_winner: None,
        };
        let e = Experiment::from_runs(vec![trace]);
        assert_eq!(e.std, vec![0.0, 0.0]);
        assert_eq!(e.mean, vec![0.1, 0.3]);
    }
}
