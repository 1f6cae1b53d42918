use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use duelsim::bounds::{
    c_delta, lower_bound_value, mrr_expected_bound, n_schedule, n_schedule_aggregated,
    rucb_delay_expected_bound,
};
use duelsim::datasets::{DatasetSpec, BUILTIN};
use duelsim::env::{DelayDistribution, FeedbackMode};
use duelsim::harness::{run_many, write_results, ExperimentConfig};
use duelsim::policies::{PolicyKind, PolicyParams};
use duelsim::BoundInputs;

#[derive(Parser)]
#[command(name = "duelsim", version, about = "Dueling-bandit simulator with delayed conversion feedback")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded replications and write summary.csv and runs.csv
    Run(RunArgs),
    /// Evaluate a schedule or regret-bound calculator
    Bounds {
        #[command(subcommand)]
        calculator: Calculator,
    },
    /// Built-in datasets
    Datasets {
        #[command(subcommand)]
        command: DatasetsCommand,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Built-in name, arithmetic:K, hard-instance:K:DELTA[:ARM] or a CSV path
    #[arg(long)]
    dataset: String,
    /// rucb-delay, rrdb-delay, mrr-delay or rucb-baseline
    #[arg(long)]
    policy: String,
    #[arg(long)]
    alpha: Option<f64>,
    /// Confidence of rrdb-delay (default 1/T)
    #[arg(long)]
    delta: Option<f64>,
    /// geometric:P, det:D, uniform:LO:HI or table:FILE
    #[arg(long)]
    delay: Option<String>,
    /// Horizon
    #[arg(long = "T", value_name = "T")]
    horizon: Option<u64>,
    #[arg(long)]
    runs: Option<u32>,
    /// Base seed; run r uses seed + r
    #[arg(long)]
    seed: Option<u64>,
    /// Censoring window M
    #[arg(long)]
    window: Option<usize>,
    /// Record regret every N steps
    #[arg(long)]
    stride: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// T = 200000 and 100 runs unless given explicitly
    #[arg(long)]
    paper_scale: bool,
    /// Anonymous aggregated feedback (mrr-delay only)
    #[arg(long)]
    aggregated: bool,
}

#[derive(Args)]
struct GapArgs {
    /// Take K and the gaps from this dataset
    #[arg(long, conflicts_with = "gaps")]
    dataset: Option<String>,
    /// Comma-separated gaps of the non-winning arms
    #[arg(long, value_delimiter = ',')]
    gaps: Option<Vec<f64>>,
}

impl GapArgs {
    fn resolve(&self) -> Result<Vec<f64>> {
        match (&self.dataset, &self.gaps) {
            (Some(name), _) => Ok(DatasetSpec::parse(name)?.load::<f64>()?.suboptimal_gaps()),
            (None, Some(gaps)) => Ok(gaps.clone()),
            (None, None) => bail!("give either --dataset or --gaps"),
        }
    }
}

#[derive(Subcommand)]
enum Calculator {
    /// High-probability constant C(delta)
    CDelta {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        window: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        delta: f64,
    },
    /// Per-pair play target of MRR round m
    NSchedule {
        #[arg(long)]
        m: u32,
        #[arg(long = "T", value_name = "T")]
        horizon: u64,
        #[arg(long)]
        mean_delay: f64,
        /// Use the aggregated-feedback schedule
        #[arg(long)]
        aggregated: bool,
    },
    /// Expected-regret bound of RUCB-Delay (needs alpha > 1)
    RucbDelay {
        #[command(flatten)]
        gaps: GapArgs,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        window: usize,
        #[arg(long = "T", value_name = "T")]
        horizon: u64,
        /// Delay spec used for tau_1 and tau_M
        #[arg(long, default_value = "geometric:0.01")]
        delay: String,
        /// Replace tau_1 by tau_M / (M + 1)
        #[arg(long)]
        use_tau_m: bool,
    },
    /// Expected-regret bound of MRR-DB-Delay
    Mrr {
        #[command(flatten)]
        gaps: GapArgs,
        #[arg(long = "T", value_name = "T")]
        horizon: u64,
        #[arg(long)]
        mean_delay: f64,
    },
    /// Lower-bound regret scale sqrt(T K / tau_M)
    LowerBound {
        #[arg(long)]
        k: usize,
        #[arg(long = "T", value_name = "T")]
        horizon: u64,
        #[arg(long, default_value_t = 1.0)]
        tau_m: f64,
        /// Print the hard-instance gap instead
        #[arg(long)]
        gap: bool,
    },
}

#[derive(Subcommand)]
enum DatasetsCommand {
    /// Name, arm count and origin of each built-in matrix
    List,
}

fn run(args: RunArgs) -> Result<()> {
    let dataset = DatasetSpec::parse(&args.dataset)?;
    let policy: PolicyKind = args.policy.parse()?;
    let mut config = ExperimentConfig::desk(dataset, policy);
    if args.paper_scale {
        config.horizon = 200_000;
        config.runs = 100;
    }
    let defaults = PolicyParams::default();
    config.params = PolicyParams {
        alpha: args.alpha.unwrap_or(defaults.alpha),
        delta: args.delta,
        window: args.window.unwrap_or(defaults.window),
    };
    if let Some(spec) = &args.delay {
        config.delay = DelayDistribution::parse_spec(spec)?;
    }
    if args.aggregated {
        config.mode = FeedbackMode::Aggregated;
    }
    config.horizon = args.horizon.unwrap_or(config.horizon);
    config.runs = args.runs.unwrap_or(config.runs);
    config.base_seed = args.seed.unwrap_or(config.base_seed);
    config.stride = args.stride.unwrap_or(config.stride);

    let experiment = run_many::<f64>(&config)?;
    write_results(&experiment, &args.out)?;
    println!(
        "{} on {}: mean final regret {:.3} over {} runs, T = {}; wrote {}",
        config.policy,
        config.dataset,
        experiment.final_mean(),
        config.runs,
        config.horizon,
        args.out.display()
    );
    Ok(())
}

fn bounds(calculator: Calculator) -> Result<f64> {
    Ok(match calculator {
        Calculator::CDelta { alpha, window, k, delta } => c_delta(alpha, window, k, delta)?,
        Calculator::NSchedule { m, horizon, mean_delay, aggregated } => {
            if m == 0 {
                bail!("rounds start at m = 1");
            }
            let n = if aggregated {
                n_schedule_aggregated(m, horizon, mean_delay)
            } else {
                n_schedule(m, horizon, mean_delay)
            };
            n as f64
        }
        Calculator::RucbDelay { gaps, alpha, window, horizon, delay, use_tau_m } => {
            let gaps = gaps.resolve()?;
            let delay = DelayDistribution::parse_spec(&delay)?;
            let inputs = BoundInputs {
                k: gaps.len() + 1,
                t_horizon: horizon,
                alpha,
                m_window: window,
                tau_1: delay.tau(1),
                tau_m: delay.tau(window as u64),
                gaps,
                delta: 1.0 / horizon.max(1) as f64,
                mean_delay: delay.mean(),
            };
            rucb_delay_expected_bound(&inputs, use_tau_m)?
        }
        Calculator::Mrr { gaps, horizon, mean_delay } => {
            let gaps = gaps.resolve()?;
            let inputs = BoundInputs {
                k: gaps.len() + 1,
                t_horizon: horizon,
                alpha: 1.0,
                m_window: 1,
                tau_1: 1.0,
                tau_m: 1.0,
                gaps,
                delta: 1.0 / horizon.max(1) as f64,
                mean_delay,
            };
            mrr_expected_bound(&inputs)?
        }
        Calculator::LowerBound { k, horizon, tau_m, gap } => {
            let (delta_star, scale) = lower_bound_value(k, horizon, tau_m)?;
            if gap {
                delta_star
            } else {
                scale
            }
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Bounds { calculator } => bounds(calculator).map(|v| println!("{v}")),
        Command::Datasets { command: DatasetsCommand::List } => {
            for info in BUILTIN {
                println!("{:<12} K={:<3} {}", info.name, info.k, info.origin);
            }
            Ok(())
        }
    };
    match result.context("duelsim failed") {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.root_cause());
            ExitCode::FAILURE
        }
    }
}
