//! `robgap`: loss-gap theory tables, Monte Carlo checks, membership attacks,
//! sample-size bounds and plots. All output is a deterministic function of
//! the flags, the manifest and the input files.

mod commands;
mod manifest;
mod plot;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use robgap::attack::ThresholdMethod;
use robgap::trainer::Adversary;

use manifest::{Defaults, Overrides, Settings, SolverKind, SpecFields};
use plot::PlotOptions;

#[derive(Parser)]
#[command(name = "robgap", version, about = "Loss gaps of standard and adversarially trained linear models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form loss gaps over an (n, eps) grid.
    Theory(GridArgs),
    /// Monte Carlo loss gaps joined with the closed forms.
    Mc {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        train: TrainArgs,
        /// Also write the per-epoch training trace of trial 0 for every cell (gd solver settings).
        #[arg(long)]
        train_trace: Option<PathBuf>,
    },
    /// Threshold membership attack on the Gaussian model, or on a loss trace.
    Attack {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, value_enum)]
        threshold: Option<ThresholdArg>,
        /// Loss trace CSV (`example_id,loss,is_member`) to attack instead of simulating.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Trace used to calibrate the threshold in trace mode.
        #[arg(long, requires = "trace")]
        shadow_trace: Option<PathBuf>,
        /// Fixed threshold for trace mode.
        #[arg(long, requires = "trace", conflicts_with = "shadow_trace")]
        tau: Option<f64>,
        /// Balanced subsamples drawn from an unbalanced trace.
        #[arg(long, default_value_t = 1)]
        repeats: usize,
    },
    /// Sample-size bounds for an increasing generalization gap.
    Bounds {
        #[arg(long, value_delimiter = ',', required = true)]
        mu_list: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        sigma_list: Vec<f64>,
        #[arg(long)]
        eps: f64,
        /// Probability that a coordinate keeps its correct mean sign.
        #[arg(long)]
        zeta: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bayes accuracy Φ(√d·μ/σ), optionally with a Monte Carlo check.
    Bayes {
        #[command(flatten)]
        spec: SpecArgs,
        /// Fresh samples scored with θ = γ·(1, …, 1).
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Line plot of two CSV columns as SVG.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "n")]
        x: String,
        #[arg(long, default_value = "gap_rob")]
        y: String,
        /// Column whose values split rows into separate lines.
        #[arg(long)]
        series: Option<String>,
        #[arg(long)]
        log_x: bool,
        #[arg(long)]
        title: Option<String>,
    },
}

#[derive(Args, Clone, Default)]
struct SpecArgs {
    /// JSON manifest; flags override its fields.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// CSV output path (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone, Default)]
struct GridArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Comma-separated eps values.
    #[arg(long, value_delimiter = ',', conflicts_with = "eps")]
    eps_list: Option<Vec<f64>>,
    /// A single eps value.
    #[arg(long)]
    eps: Option<f64>,
    /// `1,2,5` or `log:start:end:count`.
    #[arg(long)]
    n_grid: Option<String>,
    /// Also render an SVG plot.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Clone, Default)]
struct SimArgs {
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Clone, Default)]
struct TrainArgs {
    #[arg(long, value_enum)]
    solver: Option<SolverKind>,
    #[arg(long, value_enum)]
    adversary: Option<AdversaryArg>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AdversaryArg {
    None,
    Gradsign,
    Meansign,
}

impl From<AdversaryArg> for Adversary {
    fn from(a: AdversaryArg) -> Self {
        match a {
            AdversaryArg::None => Adversary::None,
            AdversaryArg::Gradsign => Adversary::GradSign,
            AdversaryArg::Meansign => Adversary::MeanSign,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ThresholdArg {
    Median,
    Mean,
}

impl From<ThresholdArg> for ThresholdMethod {
    fn from(t: ThresholdArg) -> Self {
        match t {
            ThresholdArg::Median => ThresholdMethod::MedianMidpoint,
            ThresholdArg::Mean => ThresholdMethod::MeanMidpoint,
        }
    }
}

fn overrides(grid: &GridArgs, sim: &SimArgs, train: &TrainArgs, threshold: Option<ThresholdArg>) -> Overrides {
    Overrides {
        spec: SpecFields {
            d: grid.spec.d,
            mu: grid.spec.mu,
            sigma: grid.spec.sigma,
            gamma: grid.spec.gamma,
        },
        n_grid: grid.n_grid.clone(),
        eps_list: grid.eps_list.clone().or(grid.eps.map(|e| vec![e])),
        trials: sim.trials,
        seed: sim.seed,
        solver: train.solver,
        adversary: train.adversary.map(Into::into),
        learning_rate: train.learning_rate,
        epochs: train.epochs,
        threshold: threshold.map(Into::into),
        csv: grid.spec.out.clone(),
        svg: grid.svg.clone(),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Theory(grid) => {
            let o = overrides(&grid, &SimArgs::default(), &TrainArgs::default(), None);
            let s = Settings::resolve(
                grid.spec.manifest.as_deref(),
                o,
                Defaults {
                    n_grid: "log:0.1:100:200",
                    trials: 1,
                },
            )?;
            commands::theory(&s)?.emit(s.csv.as_deref())
        }
        Command::Mc {
            grid,
            sim,
            train,
            train_trace,
        } => {
            let o = overrides(&grid, &sim, &train, None);
            let s = Settings::resolve(
                grid.spec.manifest.as_deref(),
                o,
                Defaults {
                    n_grid: "1,2,5,10,20,50",
                    trials: 1000,
                },
            )?;
            commands::mc(&s, train_trace.as_deref())?.emit(s.csv.as_deref())
        }
        Command::Attack {
            grid,
            sim,
            threshold,
            trace,
            shadow_trace,
            tau,
            repeats,
        } => {
            let o = overrides(&grid, &sim, &TrainArgs::default(), threshold);
            let s = Settings::resolve(
                grid.spec.manifest.as_deref(),
                o,
                Defaults {
                    n_grid: "1,2,5,10,20,50",
                    trials: 100,
                },
            )?;
            match trace {
                Some(trace) => {
                    let args = commands::TraceArgs {
                        trace,
                        shadow: shadow_trace,
                        tau,
                        repeats,
                        seed: s.seed,
                        method: s.threshold,
                    };
                    commands::attack_trace(&args)?.emit(s.csv.as_deref())
                }
                None => commands::attack_gaussian(&s)?.emit(s.csv.as_deref()),
            }
        }
        Command::Bounds {
            mu_list,
            sigma_list,
            eps,
            zeta,
            out,
        } => commands::bounds(mu_list, sigma_list, eps, zeta)?.emit(out.as_deref()),
        Command::Bayes { spec, samples, seed } => {
            let grid = GridArgs {
                spec: spec.clone(),
                ..Default::default()
            };
            let o = overrides(
                &grid,
                &SimArgs { trials: None, seed },
                &TrainArgs::default(),
                None,
            );
            let s = Settings::resolve(
                spec.manifest.as_deref(),
                o,
                Defaults {
                    n_grid: "1",
                    trials: 1,
                },
            )?;
            if samples == Some(0) {
                bail!("invalid parameter `samples`: must be at least 1");
            }
            commands::bayes(&s.spec, samples, s.seed)?.emit(s.csv.as_deref())
        }
        Command::Plot {
            input,
            out,
            x,
            y,
            series,
            log_x,
            title,
        } => commands::plot_file(
            &input,
            &out,
            PlotOptions {
                x,
                y,
                series,
                log_x,
                title,
            },
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
