//! Sending the request to a random subset of `m` servers: the AoI curve
//! depends on `m` only.
//!
//! Run with `cargo run --release --example subset_replication`.

use pull_aoi::simulator::{run_trial, simulate};
use pull_aoi::{ReplicationScheme, ResponseTimeModel, SimulationConfig, UpdateProcess};

pub fn run_example() -> pull_aoi::Result<()> {
    let update = UpdateProcess::new(1.0)?;
    let response = ResponseTimeModel::Exponential { mu: 5.0 };
    let config = SimulationConfig::new(ReplicationScheme::new(50, 10, 1)?, update, response)
        .trials(5_000)
        .seed(11);

    let trial = run_trial(&config, 0)?;
    println!("trial 0 asked servers {:?} (arrival order)", trial.servers);

    let report = simulate(&config)?;
    println!(
        "{:>3} {:>10} {:>10} {:>10}",
        "k", "simulated", "std err", "closed"
    );
    for e in &report.aoi {
        println!(
            "{:>3} {:>10.5} {:>10.5} {:>10.5}",
            e.k,
            e.mean,
            e.std_error,
            e.analytic.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> pull_aoi::Result<()> {
    run_example()
}
