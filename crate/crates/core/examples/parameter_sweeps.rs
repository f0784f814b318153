//! Optimal `k` and improvement ratio along the update rate, the response
//! rate and the number of servers, written as CSV.
//!
//! Run with `cargo run --example parameter_sweeps -- [OUTPUT_DIR]`; without a
//! directory the CSV is printed.

use std::path::PathBuf;

use pull_aoi::experiment::{run, Command, ExperimentSpec, Sweep, SweepAxis};
use pull_aoi::{ReplicationScheme, ResponseTimeModel, SystemParams, UpdateProcess};

pub fn run_example() -> pull_aoi::Result<()> {
    run_into(std::env::args_os().nth(1).map(PathBuf::from))
}

pub fn run_into(out_dir: Option<PathBuf>) -> pull_aoi::Result<()> {
    let setups = [
        (SweepAxis::Lambda, 20, 1.0, 1.0),
        (SweepAxis::Mu, 20, 1.0, 1.0),
        (SweepAxis::N, 20, 1.0, 10.0),
    ];
    for (axis, n, lambda, mu) in setups {
        let spec = ExperimentSpec {
            command: Command::Sweep,
            params: SystemParams::new(
                ReplicationScheme::full(n, 1)?,
                UpdateProcess::new(lambda)?,
                ResponseTimeModel::Exponential { mu },
            )?,
            simulation: None,
            sweep: Some(Sweep::new(axis, axis.default_values())?),
            output_path: None,
        };
        let data = run(&spec)?;
        match &out_dir {
            Some(dir) => {
                let path = dir.join(format!("sweep_{}.csv", axis.name()));
                data.write_to(&path)?;
                println!("wrote {}", path.display());
            }
            None => print!("{}", data.to_csv_string()),
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> pull_aoi::Result<()> {
    run_example()
}
