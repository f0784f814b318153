//! How many responses to wait for, and when the extremes are optimal.
//!
//! Run with `cargo run --example optimal_k`.

use pull_aoi::analytic::{
    corollary_thresholds, expected_aoi, improvement_ratio, optimal_k_bruteforce,
    optimal_k_exponential, optimal_k_uniform,
};

pub fn run_example() -> pull_aoi::Result<()> {
    let n = 20;
    for (lambda, mu) in [(100.0, 2.0), (1.0, 5.0), (1.0, 200.0)] {
        let opt = optimal_k_exponential(n, lambda, mu)?;
        let brute = optimal_k_bruteforce(|k| expected_aoi(n, k, lambda, mu).unwrap(), n);
        println!(
            "lambda = {lambda:>5}, mu = {mu:>5}: k' = {:>8.4}, k* = {:>2} (exhaustive {brute:>2}), rho = {:.3}",
            opt.k_prime,
            opt.k_star,
            improvement_ratio(n, lambda, mu)?
        );
    }

    let t = corollary_thresholds(n, 2.0)?;
    println!(
        "mu = 2: first response is optimal iff lambda >= {}, all {n} iff lambda <= {:.6}",
        t.lambda_high, t.lambda_low
    );
    let boundary = optimal_k_exponential(n, t.lambda_high, 2.0)?;
    println!(
        "at lambda = {}: k* = {} with tie = {}",
        t.lambda_high, boundary.k_star, boundary.tie
    );

    let uniform = optimal_k_uniform(n, 1.0, 0.2)?;
    println!("uniform width 0.2, lambda = 1: k* = {}", uniform.k_star);
    Ok(())
}

#[allow(dead_code)]
fn main() -> pull_aoi::Result<()> {
    run_example()
}
