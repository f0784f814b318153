//! Age-of-Information (AoI) for a user that pulls time-sensitive data from
//! `n` asynchronously updated servers.
//!
//! The user replicates a request to `m` of the `n` servers and keeps the
//! freshest of the first `k` responses. Waiting for more responses trades a
//! longer wait (the `k`-th order statistic of the response times) for a
//! fresher best answer (the minimum of `k` server ages). This crate provides:
//!
//! * [`stochastic`]: seeded, reproducible samplers for response times and
//!   server ages.
//! * [`analytic`]: closed-form expected AoI, the difference function, the
//!   optimal number of responses and its threshold conditions.
//! * [`simulator`]: a Monte Carlo engine that evaluates the whole AoI curve
//!   per trial and aggregates estimates with standard errors.
//! * [`experiment`] and [`cli`]: CSV-producing experiment commands and the
//!   `aoi` command-line front end.

pub mod analytic;
pub mod cli;
mod error;
pub mod experiment;
pub mod simulator;
pub mod stochastic;

pub use analytic::{OptimalK, ReplicationScheme, SystemParams};
pub use error::{Error, Result};
pub use simulator::{AgeMode, AoiEstimate, SimulationConfig, TrialOutcome};
pub use stochastic::{RandomStream, ResponseTimeModel, UpdateProcess};
