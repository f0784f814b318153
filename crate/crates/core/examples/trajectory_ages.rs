//! Ages read off explicit Poisson update trajectories agree with the
//! exponential age used by the closed form.
//!
//! Run with `cargo run --release --example trajectory_ages`.

use pull_aoi::simulator::estimate_aoi;
use pull_aoi::stochastic::RandomStream;
use pull_aoi::{AgeMode, ReplicationScheme, ResponseTimeModel, SimulationConfig, UpdateProcess};

pub fn run_example() -> pull_aoi::Result<()> {
    let process = UpdateProcess::new(1.0)?;
    let mut rng = RandomStream::new(42, 0);
    let draws = 50_000;
    let mean = (0..draws)
        .map(|_| process.sample_age_trajectory(1e6, &mut rng).map(|s| s.age))
        .sum::<pull_aoi::Result<f64>>()?
        / draws as f64;
    println!("mean age over {draws} trajectory draws: {mean:.4} (1/lambda = 1)");

    let base = SimulationConfig::new(
        ReplicationScheme::full(20, 1)?,
        process,
        ResponseTimeModel::Exponential { mu: 5.0 },
    )
    .trials(4_000);
    let memoryless = estimate_aoi(&base.clone().seed(1))?;
    let trajectory = estimate_aoi(&base.seed(2).age_mode(AgeMode::Trajectory))?;
    println!(
        "{:>3} {:>10} {:>10} {:>6}",
        "k", "memoryless", "trajectory", "z"
    );
    for (a, b) in memoryless.iter().zip(&trajectory) {
        let z = (a.mean - b.mean) / (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        println!("{:>3} {:>10.5} {:>10.5} {z:>6.2}", a.k, a.mean, b.mean);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> pull_aoi::Result<()> {
    run_example()
}
