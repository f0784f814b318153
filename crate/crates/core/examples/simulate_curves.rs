//! Monte Carlo AoI curves for exponential, uniform and Erlang response times,
//! next to the closed form where one exists.
//!
//! Run with `cargo run --release --example simulate_curves`.

use pull_aoi::simulator::{classify_curve, empirical_optimal_k, estimate_aoi};
use pull_aoi::{ReplicationScheme, ResponseTimeModel, SimulationConfig, UpdateProcess};

pub fn run_example() -> pull_aoi::Result<()> {
    let trials = 4_000;
    for (lambda, mu) in [(100.0, 2.0), (1.0, 200.0), (1.0, 5.0)] {
        let models = [
            ResponseTimeModel::Exponential { mu },
            ResponseTimeModel::Uniform {
                a: 1.0 / (2.0 * mu),
                h: 1.0 / mu,
            },
            ResponseTimeModel::erlang_with_mean_rate(5, mu),
        ];
        for response in models {
            let config = SimulationConfig::new(
                ReplicationScheme::full(20, 1)?,
                UpdateProcess::new(lambda)?,
                response,
            )
            .trials(trials)
            .seed(7);
            let estimates = estimate_aoi(&config)?;
            let means: Vec<f64> = estimates.iter().map(|e| e.mean).collect();
            let worst_z = estimates
                .iter()
                .filter_map(|e| e.analytic.map(|a| (e.mean - a).abs() / e.std_error))
                .fold(None, |acc: Option<f64>, z| {
                    Some(acc.map_or(z, |m| m.max(z)))
                });
            println!(
                "lambda = {lambda:>5}, mu = {mu:>5}, {:<11} shape {:<10} k* = {:>2}  {}",
                response.family(),
                classify_curve(&means).name(),
                empirical_optimal_k(&estimates)?,
                match worst_z {
                    Some(z) => format!("max |z| vs closed form {z:.2}"),
                    None => "no closed form".to_string(),
                }
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> pull_aoi::Result<()> {
    run_example()
}
