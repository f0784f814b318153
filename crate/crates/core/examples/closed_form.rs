//! Expected AoI and its two terms for every stopping rule `k`.
//!
//! Run with `cargo run --example closed_form`.

use pull_aoi::analytic::{expected_aoi_subset, expected_aoi_uniform};
use pull_aoi::{ReplicationScheme, ResponseTimeModel, SystemParams, UpdateProcess};

pub fn run_example() -> pull_aoi::Result<()> {
    let params = SystemParams::new(
        ReplicationScheme::full(20, 1)?,
        UpdateProcess::new(1.0)?,
        ResponseTimeModel::Exponential { mu: 5.0 },
    )?;

    println!("n = 20, lambda = 1, mu = 5");
    println!("{:>3} {:>10} {:>10} {:>10}", "k", "wait", "min age", "AoI");
    for k in 1..=params.scheme.m() {
        println!(
            "{k:>3} {:>10.6} {:>10.6} {:>10.6}",
            params.expected_wait(k)?,
            params.expected_min_age(k)?,
            params.expected_aoi(k)?
        );
    }

    // Sending to a random subset of m servers only depends on m.
    println!(
        "(n, m, k) = (50, 20, 8): {:.6}",
        expected_aoi_subset(50, 20, 8, 1.0, 5.0)?
    );
    println!(
        "uniform response on [0.1, 0.3], k = 10: {:.6}",
        expected_aoi_uniform(20, 10, 1.0, 0.1, 0.2)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> pull_aoi::Result<()> {
    run_example()
}
