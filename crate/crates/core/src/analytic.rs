//! Closed-form expected AoI under request replication.
//!
//! With Poisson(`lambda`) updates at every server, the age of the freshest of
//! `k` responders is exponential with rate `k lambda` regardless of the
//! response-time model. The expected AoI therefore splits into the mean
//! `k`-th order statistic of the response times plus `1/(k lambda)`:
//!
//! ```text
//! exponential:  E[AoI(k)] = (H(m) - H(m-k)) / mu + 1/(k lambda)
//! uniform:      E[AoI(k)] = k h / (m+1) + a      + 1/(k lambda)
//! ```
//!
//! where `m` is the number of servers the request is sent to (`m = n` for the
//! plain `(n, k)` scheme). Both objectives are unimodal in `k`; the optimal
//! stopping rule waits for `ceil(k')` responses where `k'` is the positive root
//! of the continuous difference function.

use crate::error::{Error, Result};
use crate::stochastic::{check_non_negative, check_rate, ResponseTimeModel, UpdateProcess};

/// Relative tolerance under which the difference function counts as zero.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Fan-out and stopping rule: send to `m` of `n` servers, wait for `k` responses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplicationScheme {
    n: usize,
    m: usize,
    k: usize,
}

impl ReplicationScheme {
    pub fn new(n: usize, m: usize, k: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("server count n must be at least 1"));
        }
        if m == 0 || m > n {
            return Err(Error::param(format!(
                "fan-out m must be in [1, {n}], got {m}"
            )));
        }
        if k == 0 || k > m {
            return Err(Error::param(format!(
                "responses k must be in [1, {m}], got {k}"
            )));
        }
        Ok(Self { n, m, k })
    }

    /// The `(n, k)` scheme: every server receives the request.
    pub fn full(n: usize, k: usize) -> Result<Self> {
        Self::new(n, n, k)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn with_k(self, k: usize) -> Result<Self> {
        Self::new(self.n, self.m, k)
    }
}

/// Everything needed to evaluate the AoI of one system configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub scheme: ReplicationScheme,
    pub update: UpdateProcess,
    pub response: ResponseTimeModel,
}

impl SystemParams {
    pub fn new(
        scheme: ReplicationScheme,
        update: UpdateProcess,
        response: ResponseTimeModel,
    ) -> Result<Self> {
        response.validate()?;
        Ok(Self {
            scheme,
            update,
            response,
        })
    }

    /// Mean wait for the `k`-th of `m` responses.
    pub fn expected_wait(&self, k: usize) -> Result<f64> {
        let m = self.scheme.m();
        match self.response {
            ResponseTimeModel::Exponential { mu } => expected_wait(m, k, mu),
            ResponseTimeModel::Uniform { a, h } => expected_wait_uniform(m, k, a, h),
            ResponseTimeModel::Erlang { .. } => Err(Error::NoClosedForm("erlang")),
        }
    }

    pub fn expected_min_age(&self, k: usize) -> Result<f64> {
        check_k(k, self.scheme.m())?;
        expected_min_age(k, self.update.rate())
    }

    /// Expected AoI at the user's side when waiting for `k` responses.
    pub fn expected_aoi(&self, k: usize) -> Result<f64> {
        Ok(self.expected_wait(k)? + self.expected_min_age(k)?)
    }

    /// Optimal stopping rule over `k` in `1..=m`.
    pub fn optimal_k(&self) -> Result<OptimalK> {
        let m = self.scheme.m();
        let lambda = self.update.rate();
        match self.response {
            ResponseTimeModel::Exponential { mu } => optimal_k_exponential(m, lambda, mu),
            ResponseTimeModel::Uniform { h, .. } => optimal_k_uniform(m, lambda, h),
            ResponseTimeModel::Erlang { .. } => Err(Error::NoClosedForm("erlang")),
        }
    }
}

/// Optimal number of responses to wait for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalK {
    /// Smallest minimiser of the expected AoI.
    pub k_star: usize,
    /// Positive root of the continuous difference function; `+inf` when the
    /// objective is strictly decreasing in `k` (zero-width uniform).
    pub k_prime: f64,
    /// `k_star` and `k_star + 1` are both optimal.
    pub tie: bool,
}

/// Thresholds on `lambda` beyond which waiting for one or for all responses is optimal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorollaryThresholds {
    /// `k = 1` is optimal iff `lambda >= lambda_high`.
    pub lambda_high: f64,
    /// `k = n` is optimal iff `lambda <= lambda_low`.
    pub lambda_low: f64,
}

/// `H(n) = 1 + 1/2 + ... + 1/n`, with `H(0) = 0`.
pub fn harmonic(n: usize) -> f64 {
    (1..=n).map(|l| 1.0 / l as f64).sum()
}

/// Mean of the `k`-th order statistic of `n` i.i.d. exponentials with rate `mu`.
pub fn expected_wait(n: usize, k: usize, mu: f64) -> Result<f64> {
    check_k(k, n)?;
    check_rate("response rate mu", mu)?;
    Ok((harmonic(n) - harmonic(n - k)) / mu)
}

/// Mean of the `k`-th order statistic of `n` i.i.d. uniforms on `[a, a + h]`.
pub fn expected_wait_uniform(n: usize, k: usize, a: f64, h: f64) -> Result<f64> {
    check_k(k, n)?;
    check_non_negative("uniform offset a", a)?;
    check_non_negative("uniform width h", h)?;
    Ok(k as f64 * h / (n as f64 + 1.0) + a)
}

/// Mean of the minimum of `k` i.i.d. exponential ages with rate `lambda`.
pub fn expected_min_age(k: usize, lambda: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("responses k must be at least 1"));
    }
    check_rate("update rate lambda", lambda)?;
    Ok(1.0 / (k as f64 * lambda))
}

/// Expected AoI of the `(n, k)` scheme with exponential response times.
pub fn expected_aoi(n: usize, k: usize, lambda: f64, mu: f64) -> Result<f64> {
    Ok(expected_wait(n, k, mu)? + expected_min_age(k, lambda)?)
}

/// Expected AoI of the `(n, m, k)` scheme; does not depend on `n` beyond `m <= n`.
pub fn expected_aoi_subset(n: usize, m: usize, k: usize, lambda: f64, mu: f64) -> Result<f64> {
    if m > n {
        return Err(Error::domain(format!("fan-out m = {m} exceeds n = {n}")));
    }
    expected_aoi(m, k, lambda, mu)
}

/// Expected AoI of the `(n, k)` scheme with response times uniform on `[a, a + h]`.
pub fn expected_aoi_uniform(n: usize, k: usize, lambda: f64, a: f64, h: f64) -> Result<f64> {
    Ok(expected_wait_uniform(n, k, a, h)? + expected_min_age(k, lambda)?)
}

/// `E[AoI(k+1)] - E[AoI(k)]` for exponential response times, `1 <= k <= n-1`.
pub fn aoi_difference(n: usize, k: usize, lambda: f64, mu: f64) -> Result<f64> {
    if k == 0 || k >= n {
        return Err(Error::domain(format!(
            "difference defined for k in [1, n-1] = [1, {}], got {k}",
            n.saturating_sub(1)
        )));
    }
    check_rate("update rate lambda", lambda)?;
    check_rate("response rate mu", mu)?;
    let k = k as f64;
    Ok(1.0 / ((n as f64 - k) * mu) - 1.0 / (k * (k + 1.0) * lambda))
}

/// `E[AoI(k+1)] - E[AoI(k)]` for uniform response times of width `h`.
pub fn aoi_difference_uniform(n: usize, k: usize, lambda: f64, h: f64) -> Result<f64> {
    if k == 0 || k >= n {
        return Err(Error::domain(format!(
            "difference defined for k in [1, n-1] = [1, {}], got {k}",
            n.saturating_sub(1)
        )));
    }
    check_rate("update rate lambda", lambda)?;
    check_non_negative("uniform width h", h)?;
    let k = k as f64;
    Ok(h / (n as f64 + 1.0) - 1.0 / (k * (k + 1.0) * lambda))
}

/// Optimal `k` for exponential response times.
pub fn optimal_k_exponential(n: usize, lambda: f64, mu: f64) -> Result<OptimalK> {
    if n == 0 {
        return Err(Error::param("server count n must be at least 1"));
    }
    check_rate("update rate lambda", lambda)?;
    check_rate("response rate mu", mu)?;
    let nf = n as f64;
    let s = lambda + mu;
    let k_prime = 2.0 * mu * nf / ((s * s + 4.0 * lambda * mu * nf).sqrt() + s);
    let tolerance = TIE_TOLERANCE * (1.0 / mu).max(1.0 / lambda);
    Ok(resolve_k_star(n, k_prime, tolerance, |k| {
        aoi_difference(n, k, lambda, mu).expect("k within [1, n-1]")
    }))
}

/// Optimal `k` for uniform response times of width `h`; the offset `a` plays no role.
///
/// With `h = 0` every response arrives at `a` and the objective
/// `a + 1/(k lambda)` is strictly decreasing, so `k_star = n`.
pub fn optimal_k_uniform(n: usize, lambda: f64, h: f64) -> Result<OptimalK> {
    if n == 0 {
        return Err(Error::param("server count n must be at least 1"));
    }
    check_rate("update rate lambda", lambda)?;
    check_non_negative("uniform width h", h)?;
    if h == 0.0 {
        return Ok(OptimalK {
            k_star: n,
            k_prime: f64::INFINITY,
            tie: false,
        });
    }
    let n1 = n as f64 + 1.0;
    let hl = h * lambda;
    let k_prime = 2.0 * n1 / ((hl * hl + 4.0 * hl * n1).sqrt() + hl);
    let tolerance = TIE_TOLERANCE * h.max(1.0 / lambda);
    Ok(resolve_k_star(n, k_prime, tolerance, |k| {
        aoi_difference_uniform(n, k, lambda, h).expect("k within [1, n-1]")
    }))
}

fn resolve_k_star(
    n: usize,
    k_prime: f64,
    tolerance: f64,
    difference: impl Fn(usize) -> f64,
) -> OptimalK {
    let nearest = k_prime.round();
    if nearest >= 1.0 && nearest < n as f64 {
        let k = nearest as usize;
        if difference(k).abs() <= tolerance {
            return OptimalK {
                k_star: k,
                k_prime,
                tie: true,
            };
        }
    }
    let k_star = if k_prime >= n as f64 {
        n
    } else {
        (k_prime.ceil() as usize).clamp(1, n)
    };
    OptimalK {
        k_star,
        k_prime,
        tie: false,
    }
}

/// Smallest `k` in `1..=k_max` minimising `evaluator`.
pub fn optimal_k_bruteforce(evaluator: impl Fn(usize) -> f64, k_max: usize) -> usize {
    let mut best = (1, evaluator(1));
    for k in 2..=k_max {
        let value = evaluator(k);
        if value < best.1 {
            best = (k, value);
        }
    }
    best.0
}

/// `(mu (n-1) / 2, mu / (n (n-1)))`: the update rates at which waiting for the
/// first response, respectively for all `n`, becomes optimal.
pub fn corollary_thresholds(n: usize, mu: f64) -> Result<CorollaryThresholds> {
    if n < 2 {
        return Err(Error::domain(format!("thresholds need n >= 2, got {n}")));
    }
    check_rate("response rate mu", mu)?;
    let nf = n as f64;
    Ok(CorollaryThresholds {
        lambda_high: mu * (nf - 1.0) / 2.0,
        lambda_low: mu / (nf * (nf - 1.0)),
    })
}

/// `E[AoI(1)] / E[AoI(k_star)]` for the `(n, k)` scheme with exponential responses.
pub fn improvement_ratio(n: usize, lambda: f64, mu: f64) -> Result<f64> {
    let opt = optimal_k_exponential(n, lambda, mu)?;
    Ok(expected_aoi(n, 1, lambda, mu)? / expected_aoi(n, opt.k_star, lambda, mu)?)
}

/// `E[AoI(1)] / E[AoI(k_star)]` for uniform response times on `[a, a + h]`.
pub fn improvement_ratio_uniform(n: usize, lambda: f64, a: f64, h: f64) -> Result<f64> {
    let opt = optimal_k_uniform(n, lambda, h)?;
    Ok(expected_aoi_uniform(n, 1, lambda, a, h)?
        / expected_aoi_uniform(n, opt.k_star, lambda, a, h)?)
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        Err(Error::domain(format!(
            "responses k must be in [1, {n}], got {k}"
        )))
    } else {
        Ok(())
    }
}
