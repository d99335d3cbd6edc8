//! Command-line front end for `darkstate-sim`.
//!
//! Each subcommand writes one CSV table to a file or, with `--out -` (the
//! default), to standard output. With no flags the tables reproduce the
//! reference parameter set `g_a = g_b = kappa = 1`, `gamma = 1e-3`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::csv::{self, Table};
use crate::entanglement::{
    mixture_asymptotic, mixture_at, repump_sequence, ConditionedMixture, ASYMPTOTIC_ONSET,
};
use crate::error::{Error, Result};
use crate::model::Parameters;
use crate::montecarlo::{run_ensemble_with, EnsembleConfig};

/// Environment variable capping the Monte Carlo worker count.
pub const THREADS_ENV: &str = "DARKSTATE_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "darkstate-sim",
    version,
    about = "Conditional dynamics of two atoms in a leaky cavity"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandKind,

    /// Coupling of atom a to the cavity.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub ga: f64,
    /// Coupling of atom b to the cavity.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub gb: f64,
    /// Cavity field decay rate.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub kappa: f64,
    /// Atomic amplitude decay rate.
    #[arg(long, global = true, default_value_t = 1e-3)]
    pub gamma: f64,
    /// Detector efficiency; `fidelity` accepts a comma-separated list.
    #[arg(long, global = true, value_delimiter = ',')]
    pub eta: Vec<f64>,
    /// End of the time grid [default: 15, or 500 for fidelity/entropy].
    #[arg(long, global = true)]
    pub tmax: Option<f64>,
    /// Number of grid points.
    #[arg(long, global = true, default_value_t = 500)]
    pub steps: usize,
    /// Trajectory count for `trajectories`.
    #[arg(long, global = true, default_value_t = 100_000)]
    pub trajectories: u64,
    /// Master seed for `trajectories`.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Output path, `-` for standard output.
    #[arg(long, global = true, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Subcommand)]
pub enum CommandKind {
    /// Populations of the unnormalized no-click state.
    Amplitudes,
    /// No-emission, cavity-emission and spontaneous-emission probabilities.
    Probabilities,
    /// Singlet fidelity of the conditioned atomic state, one column per eta.
    Fidelity,
    /// Relative entropy of entanglement of the conditioned atomic state.
    Entropy,
    /// Monte Carlo ensemble next to the analytic probabilities.
    Trajectories,
    /// Singlet weight under repeated no-click repump rounds.
    Repump {
        /// Probability that one round detects the photon from the ground component.
        #[arg(long, default_value_t = 0.9)]
        p_detect: f64,
        /// Number of rounds.
        #[arg(long, default_value_t = 5)]
        rounds: usize,
        /// Initial singlet weight [default: from the parameters at the asymptotic onset, or at --tmax].
        #[arg(long)]
        lambda0: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Command {
    Amplitudes,
    Probabilities,
    Fidelity,
    Entropy,
    Trajectories,
    Repump {
        p_detect: f64,
        rounds: usize,
        lambda0: Option<f64>,
    },
}

/// Validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: Parameters,
    pub etas: Vec<f64>,
    pub t_max: f64,
    /// True when `t_max` was given explicitly.
    pub t_max_set: bool,
    pub steps: usize,
    pub trajectories: u64,
    pub seed: u64,
    pub output_path: PathBuf,
    pub command: Command,
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let command = match cli.command {
            CommandKind::Amplitudes => Command::Amplitudes,
            CommandKind::Probabilities => Command::Probabilities,
            CommandKind::Fidelity => Command::Fidelity,
            CommandKind::Entropy => Command::Entropy,
            CommandKind::Trajectories => Command::Trajectories,
            CommandKind::Repump {
                p_detect,
                rounds,
                lambda0,
            } => Command::Repump {
                p_detect,
                rounds,
                lambda0,
            },
        };
        let etas = match (cli.eta.is_empty(), command) {
            (true, Command::Fidelity) => vec![1.0, 0.8],
            (true, _) => vec![1.0],
            (false, _) => cli.eta,
        };
        let params = Parameters::new(cli.ga, cli.gb, cli.kappa, cli.gamma, etas[0])?;
        for &eta in &etas {
            params.with_eta(eta).validate()?;
        }
        let default_tmax = match command {
            Command::Fidelity | Command::Entropy => 500.0,
            _ => 15.0,
        };
        let t_max = cli.tmax.unwrap_or(default_tmax);
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "tmax",
                value: t_max,
                reason: "must be positive",
            });
        }
        if cli.steps < 2 {
            return Err(Error::InvalidParameter {
                name: "steps",
                value: cli.steps as f64,
                reason: "at least two grid points are required",
            });
        }
        if command == Command::Trajectories && cli.trajectories == 0 {
            return Err(Error::NoTrajectories);
        }
        let cfg = Self {
            params,
            etas,
            t_max,
            t_max_set: cli.tmax.is_some(),
            steps: cli.steps,
            trajectories: cli.trajectories,
            seed: cli.seed,
            output_path: cli.out,
            command,
            workers: workers_from_env()?,
        };
        cfg.grid()?;
        Ok(cfg)
    }

    /// Grid from 0 to `t_max`, or from the asymptotic onset `5 / kappa` for the
    /// entanglement commands.
    pub fn grid(&self) -> Result<Vec<f64>> {
        let start = match self.command {
            Command::Fidelity | Command::Entropy => ASYMPTOTIC_ONSET / self.params.kappa,
            _ => 0.0,
        };
        csv::linspace(start, self.t_max, self.steps)
    }
}

fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::InvalidParameter {
                name: "DARKSTATE_THREADS",
                value: f64::NAN,
                reason: "must be a positive integer",
            }),
        },
    }
}

/// Table produced by a run, plus a human-readable note for stderr.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub table: Table,
    pub summary: Option<String>,
}

pub fn execute(cfg: &RunConfig) -> Result<RunOutput> {
    let params = &cfg.params;
    let mut summary = None;
    let table = match cfg.command {
        Command::Amplitudes => csv::amplitudes_table(params, &cfg.grid()?)?,
        Command::Probabilities => csv::probabilities_table(params, &cfg.grid()?)?,
        Command::Fidelity => csv::fidelity_table(params, &cfg.grid()?, &cfg.etas)?,
        Command::Entropy => csv::entropy_table(params, &cfg.grid()?, cfg.etas[0])?,
        Command::Trajectories => {
            let grid = cfg.grid()?;
            let est = run_ensemble_with(
                params,
                cfg.trajectories,
                &grid,
                cfg.seed,
                EnsembleConfig {
                    workers: cfg.workers,
                    horizon: None,
                },
            )?;
            let z = csv::max_sigma_deviation(params, &est)?;
            let [cav, spon_a, spon_b, none] = est.channel_totals;
            summary = Some(format!(
                "trajectories={} seed={} max_deviation={:.3} sigma ({}) channels: cavity={} spon_a={} spon_b={} none={}",
                est.n,
                cfg.seed,
                z,
                if z <= 3.0 { "within 3 sigma" } else { "OUTSIDE 3 sigma" },
                cav,
                spon_a,
                spon_b,
                none
            ));
            csv::trajectories_table(params, &est)?
        }
        Command::Repump {
            p_detect,
            rounds,
            lambda0,
        } => {
            let start = match lambda0 {
                Some(l) => ConditionedMixture::new(l, 0.0)?,
                None if cfg.t_max_set => mixture_at(params, cfg.t_max, cfg.etas[0])?,
                None => mixture_asymptotic(params, 0.0, cfg.etas[0])?,
            };
            csv::repump_table(&repump_sequence(&start, p_detect, rounds)?)
        }
    };
    Ok(RunOutput { table, summary })
}

/// Runs the configuration and writes the CSV to its destination.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    let output = execute(cfg)?;
    if cfg.output_path.as_os_str() == "-" {
        let stdout = io::stdout();
        output.table.write_to(stdout.lock())?;
    } else {
        let file = File::create(&cfg.output_path)?;
        let mut w = BufWriter::new(file);
        output.table.write_to(&mut w)?;
        w.flush()?;
    }
    Ok(output)
}
