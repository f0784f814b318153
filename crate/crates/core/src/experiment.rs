//! Experiment commands that turn a parameter set into a CSV dataset.
//!
//! Every dataset starts with `#`-prefixed comment lines that record the full
//! parameter set, followed by a header row and the data rows. Floating-point
//! values use the shortest representation that round-trips, so the same
//! experiment always produces byte-identical output.
//!
//! | command     | columns |
//! |-------------|---------|
//! | `analytic`  | `k,expected_wait,expected_min_age,expected_aoi` |
//! | `optimal-k` | `k_prime,k_star,tie,aoi_at_kstar,improvement_ratio,lambda_high,lambda_low` |
//! | `simulate`  | `k,mean_aoi,std_error,trials,analytic_aoi` |
//! | `sweep`     | `axis_name,axis_value,k_star_analytic,k_star_empirical,improvement_ratio` |
//!
//! Cells without a value (no closed form, column not applicable) are empty.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use crate::analytic::{self, ReplicationScheme, SystemParams};
use crate::error::{Error, Result};
use crate::simulator::{self, classify_curve, SimulationConfig};
use crate::stochastic::{ResponseTimeModel, UpdateProcess};

pub const ANALYTIC_COLUMNS: [&str; 4] = ["k", "expected_wait", "expected_min_age", "expected_aoi"];
pub const OPTIMAL_K_COLUMNS: [&str; 7] = [
    "k_prime",
    "k_star",
    "tie",
    "aoi_at_kstar",
    "improvement_ratio",
    "lambda_high",
    "lambda_low",
];
pub const SIMULATE_COLUMNS: [&str; 5] = ["k", "mean_aoi", "std_error", "trials", "analytic_aoi"];
pub const SWEEP_COLUMNS: [&str; 5] = [
    "axis_name",
    "axis_value",
    "k_star_analytic",
    "k_star_empirical",
    "improvement_ratio",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analytic,
    OptimalK,
    Simulate,
    Sweep,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Analytic => "analytic",
            Command::OptimalK => "optimal-k",
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
        }
    }
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Lambda,
    Mu,
    N,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Lambda => "lambda",
            SweepAxis::Mu => "mu",
            SweepAxis::N => "n",
        }
    }

    /// Default grid: `lambda` in `[0.05, 2]`, `mu` in `[1, 200]`, `n` in `[2, 50]`.
    pub fn default_values(&self) -> Vec<f64> {
        match self {
            SweepAxis::Lambda => (1..=40).map(|i| i as f64 * 0.05).collect(),
            SweepAxis::Mu => (1..=200).map(f64::from).collect(),
            SweepAxis::N => (2..=50).map(f64::from).collect(),
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda" => Ok(SweepAxis::Lambda),
            "mu" => Ok(SweepAxis::Mu),
            "n" => Ok(SweepAxis::N),
            other => Err(Error::param(format!(
                "sweep axis must be `lambda`, `mu` or `n`, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

impl Sweep {
    pub fn new(axis: SweepAxis, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("sweep needs at least one value"));
        }
        if !values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::domain("sweep values must be strictly increasing"));
        }
        for &v in &values {
            let ok = match axis {
                SweepAxis::Lambda | SweepAxis::Mu => v.is_finite() && v > 0.0,
                SweepAxis::N => v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64,
            };
            if !ok {
                return Err(Error::domain(format!(
                    "invalid value {v} for sweep axis {}",
                    axis.name()
                )));
            }
        }
        Ok(Self { axis, values })
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub command: Command,
    pub params: SystemParams,
    /// Required by `simulate`; enables the empirical column of `sweep`.
    pub simulation: Option<SimulationConfig>,
    /// Required by `sweep`.
    pub sweep: Option<Sweep>,
    /// `None` writes to standard output.
    pub output_path: Option<PathBuf>,
}

/// Comment lines, a header and rows of already formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvDataset {
    pub comments: Vec<String>,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl CsvDataset {
    fn new(comments: Vec<String>, header: &[&'static str]) -> Self {
        Self {
            comments,
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for line in &self.comments {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            writer.write_record(row).expect("in-memory write");
        }
        let body = writer.into_inner().expect("in-memory flush");
        out.push_str(std::str::from_utf8(&body).expect("cells are UTF-8"));
        out
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv_string()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Runs the command named in `spec`.
pub fn run(spec: &ExperimentSpec) -> Result<CsvDataset> {
    match spec.command {
        Command::Analytic => cmd_analytic(spec),
        Command::OptimalK => cmd_optimal_k(spec),
        Command::Simulate => cmd_simulate(spec),
        Command::Sweep => cmd_sweep(spec),
    }
}

/// Closed-form curve, one row per `k` in `1..=m`.
pub fn cmd_analytic(spec: &ExperimentSpec) -> Result<CsvDataset> {
    let params = &spec.params;
    require_closed_form(&params.response)?;
    let mut data = CsvDataset::new(provenance(spec), &ANALYTIC_COLUMNS);
    for k in 1..=params.scheme.m() {
        let wait = params.expected_wait(k)?;
        let age = params.expected_min_age(k)?;
        data.rows.push(vec![
            k.to_string(),
            num(wait),
            num(age),
            num(params.expected_aoi(k)?),
        ]);
    }
    Ok(data)
}

/// Optimal stopping rule, a single row.
pub fn cmd_optimal_k(spec: &ExperimentSpec) -> Result<CsvDataset> {
    let params = &spec.params;
    require_closed_form(&params.response)?;
    let (m, full) = (params.scheme.m(), params.scheme.m() == params.scheme.n());
    let lambda = params.update.rate();
    let opt = params.optimal_k()?;
    let (ratio, thresholds) = match params.response {
        ResponseTimeModel::Exponential { mu } => (
            full.then(|| analytic::improvement_ratio(m, lambda, mu))
                .transpose()?,
            analytic::corollary_thresholds(m, mu).ok(),
        ),
        ResponseTimeModel::Uniform { a, h } => (
            full.then(|| analytic::improvement_ratio_uniform(m, lambda, a, h))
                .transpose()?,
            None,
        ),
        ResponseTimeModel::Erlang { .. } => unreachable!("rejected above"),
    };
    let mut data = CsvDataset::new(provenance(spec), &OPTIMAL_K_COLUMNS);
    data.rows.push(vec![
        opt_num(Some(opt.k_prime)),
        opt.k_star.to_string(),
        opt.tie.to_string(),
        num(params.expected_aoi(opt.k_star)?),
        opt_num(ratio),
        opt_num(thresholds.map(|t| t.lambda_high)),
        opt_num(thresholds.map(|t| t.lambda_low)),
    ]);
    Ok(data)
}

/// Monte Carlo curve, one row per `k` in `1..=m`.
pub fn cmd_simulate(spec: &ExperimentSpec) -> Result<CsvDataset> {
    let config = spec
        .simulation
        .as_ref()
        .ok_or_else(|| Error::param("simulate needs a simulation configuration"))?;
    let estimates = simulator::estimate_aoi(config)?;
    let means: Vec<f64> = estimates.iter().map(|e| e.mean).collect();
    let mut comments = provenance(spec);
    comments.push(format!(
        "empirical_k_star: {}",
        simulator::empirical_optimal_k(&estimates)?
    ));
    comments.push(format!("curve_shape: {}", classify_curve(&means).name()));
    let mut data = CsvDataset::new(comments, &SIMULATE_COLUMNS);
    for e in &estimates {
        data.rows.push(vec![
            e.k.to_string(),
            num(e.mean),
            num(e.std_error),
            e.trials.to_string(),
            opt_num(e.analytic),
        ]);
    }
    Ok(data)
}

/// Optimal `k` and improvement ratio along one parameter axis.
pub fn cmd_sweep(spec: &ExperimentSpec) -> Result<CsvDataset> {
    let sweep = spec
        .sweep
        .as_ref()
        .ok_or_else(|| Error::param("sweep needs an axis and values"))?;
    let base = &spec.params;
    let ResponseTimeModel::Exponential { mu } = base.response else {
        return Err(Error::domain(
            "sweep supports the exponential response model only",
        ));
    };
    if base.scheme.m() != base.scheme.n() {
        return Err(Error::domain(
            "sweep runs the (n, k) scheme; m must equal n",
        ));
    }
    // Validate every point before computing anything.
    let points = sweep
        .values
        .iter()
        .map(|&v| {
            let (n, lambda, mu) = match sweep.axis {
                SweepAxis::Lambda => (base.scheme.n(), v, mu),
                SweepAxis::Mu => (base.scheme.n(), base.update.rate(), v),
                SweepAxis::N => (v as usize, base.update.rate(), mu),
            };
            let params = SystemParams::new(
                ReplicationScheme::full(n, 1)?,
                UpdateProcess::new(lambda)?,
                ResponseTimeModel::Exponential { mu },
            )?;
            Ok((v, params))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut data = CsvDataset::new(provenance(spec), &SWEEP_COLUMNS);
    for (value, params) in points {
        let n = params.scheme.n();
        let lambda = params.update.rate();
        let ResponseTimeModel::Exponential { mu } = params.response else {
            unreachable!()
        };
        let k_star = analytic::optimal_k_exponential(n, lambda, mu)?.k_star;
        let empirical = spec
            .simulation
            .as_ref()
            .map(|sim| {
                let config = SimulationConfig {
                    scheme: params.scheme,
                    update: params.update,
                    response: params.response,
                    ..sim.clone()
                };
                simulator::empirical_optimal_k(&simulator::estimate_aoi(&config)?)
            })
            .transpose()?;
        data.rows.push(vec![
            sweep.axis.name().to_string(),
            num(value),
            k_star.to_string(),
            empirical.map(|k| k.to_string()).unwrap_or_default(),
            num(analytic::improvement_ratio(n, lambda, mu)?),
        ]);
    }
    Ok(data)
}

fn require_closed_form(model: &ResponseTimeModel) -> Result<()> {
    match model {
        ResponseTimeModel::Erlang { .. } => Err(Error::NoClosedForm("erlang")),
        _ => Ok(()),
    }
}

fn provenance(spec: &ExperimentSpec) -> Vec<String> {
    let p = &spec.params;
    let mut lines = vec![
        format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
        format!("command: {}", spec.command.name()),
        format!("n: {}", p.scheme.n()),
        format!("m: {}", p.scheme.m()),
        format!("lambda: {}", p.update.rate()),
        format!("response: {}", describe_model(&p.response)),
    ];
    if let Some(sim) = &spec.simulation {
        lines.push(format!("trials: {}", sim.trials));
        lines.push(format!("seed: {}", sim.seed));
        lines.push(format!("age_mode: {}", sim.age_mode.name()));
        lines.push(format!("horizon_factor: {}", sim.horizon_factor));
    }
    if let Some(sweep) = &spec.sweep {
        lines.push(format!("axis: {}", sweep.axis.name()));
        let values: Vec<String> = sweep.values.iter().map(|v| num(*v)).collect();
        lines.push(format!("values: {}", values.join(" ")));
    }
    lines
}

fn describe_model(model: &ResponseTimeModel) -> String {
    match *model {
        ResponseTimeModel::Exponential { mu } => format!("exponential mu={mu}"),
        ResponseTimeModel::Uniform { a, h } => format!("uniform a={a} h={h}"),
        ResponseTimeModel::Erlang { r, theta } => format!("erlang r={r} theta={theta}"),
    }
}

fn num(x: impl Display) -> String {
    x.to_string()
}

/// Empty cell for missing or non-finite values.
fn opt_num(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => v.to_string(),
        _ => String::new(),
    }
}
