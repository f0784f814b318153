//! Command-line front end for the experiment commands.
//!
//! Every parameter can be given as a flag or in a TOML file passed with
//! `--config`; the file uses the flag names with `_` in place of `-`
//! (`age_mode`, `horizon_factor`, ...). Flags override the file.
//!
//! Exit codes: 0 on success, 2 for parameter or domain errors, 3 for I/O errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::analytic::{ReplicationScheme, SystemParams};
use crate::error::{Error, Result};
use crate::experiment::{self, Command, ExperimentSpec, Sweep, SweepAxis};
use crate::simulator::{AgeMode, SimulationConfig, DEFAULT_HORIZON_FACTOR, DEFAULT_TRIALS};
use crate::stochastic::{ResponseTimeModel, UpdateProcess};

#[derive(Debug, Parser)]
#[command(
    name = "aoi",
    version,
    about = "Age-of-Information under request replication"
)]
pub struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Debug, Subcommand)]
enum CliCommand {
    /// Closed-form expected AoI for every k.
    Analytic(ExperimentArgs),
    /// Optimal number of responses to wait for.
    OptimalK(ExperimentArgs),
    /// Monte Carlo estimate of the AoI curve.
    Simulate(ExperimentArgs),
    /// Optimal k and improvement ratio along one parameter axis.
    Sweep(ExperimentArgs),
}

/// Parameters shared by all commands.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentArgs {
    /// Total number of servers.
    #[arg(long)]
    pub n: Option<usize>,
    /// Servers the request is sent to (defaults to n).
    #[arg(long)]
    pub m: Option<usize>,
    /// Update rate at each server.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Exponential response rate; with --r, sets the Erlang mean to 1/mu.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Uniform response time offset.
    #[arg(long)]
    pub a: Option<f64>,
    /// Uniform response time width.
    #[arg(long)]
    pub h: Option<f64>,
    /// Erlang shape.
    #[arg(long)]
    pub r: Option<u32>,
    /// Erlang scale (mean of each exponential stage).
    #[arg(long)]
    pub theta: Option<f64>,
    /// Monte Carlo trials; for `sweep`, enables the empirical column.
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `memoryless` or `trajectory`.
    #[arg(long)]
    pub age_mode: Option<String>,
    /// Trajectory horizon as a multiple of 1/lambda.
    #[arg(long)]
    pub horizon_factor: Option<f64>,
    /// Worker threads for the simulator; does not change results.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Sweep axis: `lambda`, `mu` or `n`.
    #[arg(long)]
    pub axis: Option<String>,
    /// Comma-separated, strictly increasing sweep values.
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
    /// Output CSV path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML file with default values for any of the flags above.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl ExperimentArgs {
    /// Parses a TOML config file body.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::param(format!("config file: {e}")))
    }

    /// Fills every unset field of `self` from `file`.
    pub fn or(self, file: ExperimentArgs) -> Self {
        Self {
            n: self.n.or(file.n),
            m: self.m.or(file.m),
            lambda: self.lambda.or(file.lambda),
            mu: self.mu.or(file.mu),
            a: self.a.or(file.a),
            h: self.h.or(file.h),
            r: self.r.or(file.r),
            theta: self.theta.or(file.theta),
            trials: self.trials.or(file.trials),
            seed: self.seed.or(file.seed),
            age_mode: self.age_mode.or(file.age_mode),
            horizon_factor: self.horizon_factor.or(file.horizon_factor),
            threads: self.threads.or(file.threads),
            axis: self.axis.or(file.axis),
            values: self.values.or(file.values),
            out: self.out.or(file.out),
            config: self.config,
        }
    }

    fn response_model(&self) -> Result<ResponseTimeModel> {
        let uniform = self.a.is_some() || self.h.is_some();
        let model = if let Some(r) = self.r {
            if uniform {
                return Err(Error::param("give either --r or --a/--h, not both"));
            }
            match (self.theta, self.mu) {
                (Some(theta), _) => ResponseTimeModel::Erlang { r, theta },
                (None, Some(mu)) => ResponseTimeModel::erlang_with_mean_rate(r, mu),
                (None, None) => return Err(Error::param("erlang needs --theta or --mu")),
            }
        } else if uniform {
            if self.mu.is_some() || self.theta.is_some() {
                return Err(Error::param("give either --mu or --a/--h, not both"));
            }
            let h = self
                .h
                .ok_or_else(|| Error::param("uniform response needs --h"))?;
            ResponseTimeModel::Uniform {
                a: self.a.unwrap_or(0.0),
                h,
            }
        } else if let Some(mu) = self.mu {
            ResponseTimeModel::Exponential { mu }
        } else {
            return Err(Error::param(
                "give a response model: --mu, --a/--h or --r with --theta",
            ));
        };
        validated(model)
    }

    /// Resolves the arguments into an experiment.
    pub fn into_spec(self, command: Command) -> Result<ExperimentSpec> {
        let sweep = if command == Command::Sweep {
            let axis: SweepAxis = self
                .axis
                .as_deref()
                .ok_or_else(|| Error::param("sweep needs --axis"))?
                .parse()?;
            let values = self.values.clone().unwrap_or_else(|| axis.default_values());
            Some((axis, Sweep::new(axis, values)?))
        } else {
            None
        };
        let swept = sweep.as_ref().map(|(axis, s)| (*axis, s.values[0]));

        let n = match (self.n, swept) {
            (Some(n), _) => n,
            (None, Some((SweepAxis::N, first))) => first as usize,
            (None, _) => return Err(Error::param("missing --n")),
        };
        let lambda = match (self.lambda, swept) {
            (Some(l), _) => l,
            (None, Some((SweepAxis::Lambda, first))) => first,
            (None, _) => return Err(Error::param("missing --lambda")),
        };
        let mut args = self;
        if let (None, Some((SweepAxis::Mu, first))) = (args.mu, swept) {
            args.mu = Some(first);
        }
        let response = args.response_model()?;
        let m = args.m.unwrap_or(n);
        let params = SystemParams::new(
            ReplicationScheme::new(n, m, 1)?,
            UpdateProcess::new(lambda)?,
            response,
        )?;

        let wants_simulation =
            command == Command::Simulate || (command == Command::Sweep && args.trials.is_some());
        let simulation = if wants_simulation {
            let age_mode = match args.age_mode.as_deref() {
                Some(s) => s.parse()?,
                None => AgeMode::default(),
            };
            let config = SimulationConfig::new(params.scheme, params.update, params.response)
                .trials(args.trials.unwrap_or(DEFAULT_TRIALS))
                .seed(args.seed.unwrap_or(0))
                .age_mode(age_mode)
                .horizon_factor(args.horizon_factor.unwrap_or(DEFAULT_HORIZON_FACTOR))
                .threads(args.threads);
            config.validate()?;
            Some(config)
        } else {
            None
        };

        Ok(ExperimentSpec {
            command,
            params,
            simulation,
            sweep: sweep.map(|(_, s)| s),
            output_path: args.out,
        })
    }
}

fn validated(model: ResponseTimeModel) -> Result<ResponseTimeModel> {
    model.validate()?;
    Ok(model)
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let (command, args) = match cli.command {
        CliCommand::Analytic(a) => (Command::Analytic, a),
        CliCommand::OptimalK(a) => (Command::OptimalK, a),
        CliCommand::Simulate(a) => (Command::Simulate, a),
        CliCommand::Sweep(a) => (Command::Sweep, a),
    };
    let args = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            args.clone().or(ExperimentArgs::from_toml(&text)?)
        }
        None => args,
    };
    let spec = args.into_spec(command)?;
    let data = experiment::run(&spec)?;
    match &spec.output_path {
        Some(path) => data.write_to(path),
        None => std::io::stdout()
            .write_all(data.to_csv_string().as_bytes())
            .map_err(|source| Error::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}
