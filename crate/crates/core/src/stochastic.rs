//! Reproducible sampling of server ages and response times.
//!
//! Every draw comes from a [`RandomStream`], a ChaCha8 generator keyed by a
//! 64-bit base seed and positioned on the ChaCha stream `stream_index`. The
//! key is expanded from the seed with `SeedableRng::seed_from_u64`, so a
//! `(seed, stream_index)` pair names the same sequence on every platform.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};

use crate::error::{Error, Result};

/// A seeded, independently indexable source of randomness.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_index);
        Self {
            seed,
            stream_index,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Poisson update process at a single server.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateProcess {
    lambda: f64,
}

impl UpdateProcess {
    /// `lambda` is the update rate and must be finite and strictly positive.
    pub fn new(lambda: f64) -> Result<Self> {
        check_rate("update rate lambda", lambda)?;
        Ok(Self { lambda })
    }

    pub fn rate(&self) -> f64 {
        self.lambda
    }

    /// Mean age at a stationary epoch, `1/lambda`.
    pub fn mean_age(&self) -> f64 {
        1.0 / self.lambda
    }

    /// Age at a stationary random epoch.
    ///
    /// By memorylessness this is exponential with the inter-update rate.
    pub fn sample_age_memoryless<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let e: f64 = Exp1.sample(rng);
        e / self.lambda
    }

    /// Age at an epoch `s` drawn uniformly from `[0, horizon]` of an explicit
    /// update trajectory started at time zero.
    ///
    /// Updates in `[0, s]` are realised through their count `c ~ Poisson(lambda s)`
    /// and, given the count, as `c` i.i.d. uniform points on `[0, s]`. The
    /// latest of them is `s V^(1/c)` for `V` uniform on `(0, 1]`. When no
    /// update precedes `s` the age is `s` itself.
    pub fn sample_age_trajectory<R: Rng + ?Sized>(
        &self,
        horizon: f64,
        rng: &mut R,
    ) -> Result<AgeAtEpoch> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::param(format!(
                "horizon must be finite and positive, got {horizon}"
            )));
        }
        let epoch = horizon * rng.random::<f64>();
        let expected_updates = self.lambda * epoch;
        let updates = if expected_updates > 0.0 {
            Poisson::new(expected_updates)
                .map_err(|e| {
                    Error::param(format!(
                        "update count for lambda*s = {expected_updates}: {e}"
                    ))
                })?
                .sample(rng)
        } else {
            0.0
        };
        let age = if updates == 0.0 {
            epoch
        } else {
            let v = 1.0 - rng.random::<f64>();
            // s (1 - V^(1/c)) without cancellation for large c.
            (-epoch * (v.ln() / updates).exp_m1()).clamp(0.0, epoch)
        };
        Ok(AgeAtEpoch { epoch, age })
    }
}

/// One age observation taken from a simulated trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgeAtEpoch {
    /// The request epoch `s`.
    pub epoch: f64,
    /// `s` minus the latest update time at or before `s`.
    pub age: f64,
}

/// Distribution of a single server's response time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResponseTimeModel {
    /// Exponential with rate `mu` (mean `1/mu`).
    Exponential { mu: f64 },
    /// Uniform on `[a, a + h]`.
    Uniform { a: f64, h: f64 },
    /// Sum of `r` i.i.d. exponentials of mean `theta`.
    Erlang { r: u32, theta: f64 },
}

impl ResponseTimeModel {
    /// Erlang of shape `r` whose mean is `1/mu`.
    pub fn erlang_with_mean_rate(r: u32, mu: f64) -> Self {
        ResponseTimeModel::Erlang {
            r,
            theta: 1.0 / (f64::from(r) * mu),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            ResponseTimeModel::Exponential { .. } => "exponential",
            ResponseTimeModel::Uniform { .. } => "uniform",
            ResponseTimeModel::Erlang { .. } => "erlang",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ResponseTimeModel::Exponential { mu } => check_rate("response rate mu", mu),
            ResponseTimeModel::Uniform { a, h } => {
                check_non_negative("uniform offset a", a)?;
                check_non_negative("uniform width h", h)
            }
            ResponseTimeModel::Erlang { r, theta } => {
                if r == 0 {
                    return Err(Error::param("erlang shape r must be at least 1"));
                }
                check_rate("erlang scale theta", theta)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ResponseTimeModel::Exponential { mu } => 1.0 / mu,
            ResponseTimeModel::Uniform { a, h } => a + h / 2.0,
            ResponseTimeModel::Erlang { r, theta } => f64::from(r) * theta,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            ResponseTimeModel::Exponential { mu } => 1.0 / (mu * mu),
            ResponseTimeModel::Uniform { h, .. } => h * h / 12.0,
            ResponseTimeModel::Erlang { r, theta } => f64::from(r) * theta * theta,
        }
    }

    /// One draw. The model must already be valid.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ResponseTimeModel::Exponential { mu } => {
                let e: f64 = Exp1.sample(rng);
                e / mu
            }
            ResponseTimeModel::Uniform { a, h } => a + h * rng.random::<f64>(),
            ResponseTimeModel::Erlang { r, theta } => {
                theta * (0..r).map(|_| -> f64 { Exp1.sample(rng) }).sum::<f64>()
            }
        }
    }
}

/// Validates `model` and draws one response time.
pub fn sample_response<R: Rng + ?Sized>(model: &ResponseTimeModel, rng: &mut R) -> Result<f64> {
    model.validate()?;
    Ok(model.sample(rng))
}

/// Analytic mean of the response-time model.
pub fn model_mean(model: &ResponseTimeModel) -> f64 {
    model.mean()
}

pub(crate) fn check_rate(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!(
            "{name} must be finite and strictly positive, got {value}"
        )))
    }
}

pub(crate) fn check_non_negative(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!(
            "{name} must be finite and non-negative, got {value}"
        )))
    }
}
