//! Monte Carlo estimation of the AoI curve.
//!
//! One trial is one pull request: `m` of the `n` servers are chosen uniformly
//! without replacement, each contributes its age at the request epoch and a
//! response time, and the whole curve `AoI(k) = R_(k) + min(age of the first
//! k responders)` for `k = 1..=m` is read off the same draws.
//!
//! Trial `t` draws from [`RandomStream`]s with index `4 t + offset`, where the
//! offset selects the server subset (0), memoryless ages (1), trajectory ages
//! (2) or response times (3). Results depend on `(seed, trial index)` only.
//! Trials are aggregated in fixed blocks of [`BLOCK_SIZE`] that are merged in
//! trial order, so the estimates are bit-identical for any thread count.

use rand::seq::index;
use rayon::prelude::*;

use crate::analytic::{ReplicationScheme, SystemParams};
use crate::error::{Error, Result};
use crate::stochastic::{RandomStream, ResponseTimeModel, UpdateProcess};

pub const DEFAULT_TRIALS: u64 = 1_000;
pub const DEFAULT_HORIZON_FACTOR: f64 = 1e6;
pub const BLOCK_SIZE: u64 = 1_024;

const SUBSTREAMS: u64 = 4;
const SUBSET_STREAM: u64 = 0;
const MEMORYLESS_STREAM: u64 = 1;
const TRAJECTORY_STREAM: u64 = 2;
const RESPONSE_STREAM: u64 = 3;

/// How a server's age at the request epoch is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AgeMode {
    /// Exponential with the update rate.
    #[default]
    Memoryless,
    /// Read off a Poisson update trajectory on `[0, T]` at a uniform epoch.
    Trajectory,
}

impl AgeMode {
    pub fn name(&self) -> &'static str {
        match self {
            AgeMode::Memoryless => "memoryless",
            AgeMode::Trajectory => "trajectory",
        }
    }
}

impl std::str::FromStr for AgeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "memoryless" => Ok(AgeMode::Memoryless),
            "trajectory" => Ok(AgeMode::Trajectory),
            other => Err(Error::param(format!(
                "age mode must be `memoryless` or `trajectory`, got `{other}`"
            ))),
        }
    }
}

/// A Monte Carlo experiment. The curve covers every `k` in `1..=m`; the
/// scheme's own `k` is not used.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub scheme: ReplicationScheme,
    pub update: UpdateProcess,
    pub response: ResponseTimeModel,
    pub trials: u64,
    pub seed: u64,
    pub age_mode: AgeMode,
    /// Trajectory horizon in mean inter-update times, `T = horizon_factor / lambda`.
    pub horizon_factor: f64,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl SimulationConfig {
    pub fn new(
        scheme: ReplicationScheme,
        update: UpdateProcess,
        response: ResponseTimeModel,
    ) -> Self {
        Self {
            scheme,
            update,
            response,
            trials: DEFAULT_TRIALS,
            seed: 0,
            age_mode: AgeMode::Memoryless,
            horizon_factor: DEFAULT_HORIZON_FACTOR,
            threads: None,
        }
    }

    pub fn trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn age_mode(mut self, age_mode: AgeMode) -> Self {
        self.age_mode = age_mode;
        self
    }

    pub fn horizon_factor(mut self, horizon_factor: f64) -> Self {
        self.horizon_factor = horizon_factor;
        self
    }

    pub fn threads(mut self, threads: Option<usize>) -> Self {
        self.threads = threads;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.response.validate()?;
        if self.trials == 0 {
            return Err(Error::domain("trials must be at least 1"));
        }
        if !(self.horizon_factor.is_finite() && self.horizon_factor > 0.0) {
            return Err(Error::param(format!(
                "horizon factor must be finite and positive, got {}",
                self.horizon_factor
            )));
        }
        if self.threads == Some(0) {
            return Err(Error::param("threads must be at least 1"));
        }
        Ok(())
    }

    pub fn horizon(&self) -> f64 {
        self.horizon_factor / self.update.rate()
    }

    fn params(&self) -> SystemParams {
        SystemParams {
            scheme: self.scheme,
            update: self.update,
            response: self.response,
        }
    }
}

/// One simulated pull request.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    /// Server indices in arrival order.
    pub servers: Vec<usize>,
    /// Response times in ascending order, `R_(1) <= ... <= R_(m)`.
    pub sorted_responses: Vec<f64>,
    /// Age at the request epoch of each responder, in arrival order.
    pub responder_ages: Vec<f64>,
    /// Entry `k - 1` is the AoI at the user's side after `k` responses.
    pub aoi_curve: Vec<f64>,
}

impl TrialOutcome {
    /// Running minimum of `responder_ages`: the freshest age after `k` responses.
    pub fn freshest_ages(&self) -> Vec<f64> {
        self.responder_ages
            .iter()
            .scan(f64::INFINITY, |freshest, &age| {
                *freshest = freshest.min(age);
                Some(*freshest)
            })
            .collect()
    }
}

/// Simulates trial `trial_index` of `config`.
pub fn run_trial(config: &SimulationConfig, trial_index: u64) -> Result<TrialOutcome> {
    config.validate()?;
    Ok(simulate_trial(config, trial_index))
}

fn simulate_trial(config: &SimulationConfig, trial_index: u64) -> TrialOutcome {
    let n = config.scheme.n();
    let m = config.scheme.m();
    let stream = |offset| RandomStream::new(config.seed, trial_index * SUBSTREAMS + offset);

    let servers: Vec<usize> = if m == n {
        (0..n).collect()
    } else {
        index::sample(&mut stream(SUBSET_STREAM), n, m).into_vec()
    };

    let ages: Vec<f64> = match config.age_mode {
        AgeMode::Memoryless => {
            let mut rng = stream(MEMORYLESS_STREAM);
            (0..m)
                .map(|_| config.update.sample_age_memoryless(&mut rng))
                .collect()
        }
        AgeMode::Trajectory => {
            let mut rng = stream(TRAJECTORY_STREAM);
            let horizon = config.horizon();
            (0..m)
                .map(|_| {
                    config
                        .update
                        .sample_age_trajectory(horizon, &mut rng)
                        .expect("validated horizon")
                        .age
                })
                .collect()
        }
    };

    let mut rng = stream(RESPONSE_STREAM);
    let mut arrivals: Vec<(f64, usize, f64)> = servers
        .iter()
        .zip(&ages)
        .map(|(&server, &age)| (config.response.sample(&mut rng), server, age))
        .collect();
    arrivals.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

    let mut outcome = TrialOutcome {
        servers: Vec::with_capacity(m),
        sorted_responses: Vec::with_capacity(m),
        responder_ages: Vec::with_capacity(m),
        aoi_curve: Vec::with_capacity(m),
    };
    let mut freshest = f64::INFINITY;
    for (response, server, age) in arrivals {
        freshest = freshest.min(age);
        outcome.servers.push(server);
        outcome.sorted_responses.push(response);
        outcome.responder_ages.push(age);
        outcome.aoi_curve.push(response + freshest);
    }
    outcome
}

/// Monte Carlo estimate for one `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoiEstimate {
    pub k: usize,
    pub mean: f64,
    /// Sample standard deviation (divisor `trials - 1`) over `sqrt(trials)`;
    /// zero for a single trial.
    pub std_error: f64,
    pub trials: u64,
    /// Closed-form value, when one exists for the response model.
    pub analytic: Option<f64>,
}

/// Estimates of the AoI curve and of its two terms.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub aoi: Vec<AoiEstimate>,
    /// The wait `R_(k)`.
    pub wait: Vec<AoiEstimate>,
    /// The freshest responder age after `k` responses.
    pub freshest_age: Vec<AoiEstimate>,
}

/// Per-`k` AoI estimates over `config.trials` independent trials.
pub fn estimate_aoi(config: &SimulationConfig) -> Result<Vec<AoiEstimate>> {
    Ok(simulate(config)?.aoi)
}

/// Runs `config.trials` trials and aggregates the curve and its terms.
pub fn simulate(config: &SimulationConfig) -> Result<SimulationReport> {
    config.validate()?;
    let blocks = config.trials.div_ceil(BLOCK_SIZE);
    let run = || {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let start = b * BLOCK_SIZE;
                let end = (start + BLOCK_SIZE).min(config.trials);
                let mut acc = CurveAccumulator::new(config.scheme.m());
                for t in start..end {
                    acc.push(&simulate_trial(config, t));
                }
                acc
            })
            .collect::<Vec<_>>()
    };
    let partials = match config.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::param(format!("cannot build thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    let total = partials
        .into_iter()
        .reduce(CurveAccumulator::merge)
        .expect("at least one block");

    let params = config.params();
    let report = SimulationReport {
        aoi: estimates(&total.aoi, |k| params.expected_aoi(k)),
        wait: estimates(&total.wait, |k| params.expected_wait(k)),
        freshest_age: estimates(&total.freshest_age, |k| params.expected_min_age(k)),
    };
    Ok(report)
}

fn estimates(moments: &[Moments], analytic: impl Fn(usize) -> Result<f64>) -> Vec<AoiEstimate> {
    moments
        .iter()
        .enumerate()
        .map(|(i, s)| s.estimate(i + 1, analytic(i + 1).ok()))
        .collect()
}

/// Smallest `k` whose estimated mean is minimal.
pub fn empirical_optimal_k(estimates: &[AoiEstimate]) -> Result<usize> {
    estimates
        .iter()
        .fold(None::<&AoiEstimate>, |best, e| match best {
            Some(b) if b.mean < e.mean || (b.mean == e.mean && b.k <= e.k) => Some(b),
            _ => Some(e),
        })
        .map(|e| e.k)
        .ok_or_else(|| Error::domain("no estimates to choose from"))
}

/// Qualitative shape of an AoI curve in `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveShape {
    /// Waiting for the first response is best.
    Increasing,
    /// Waiting for all responses is best.
    Decreasing,
    /// First decreasing, then increasing.
    Unimodal,
    Flat,
    Irregular,
}

impl CurveShape {
    pub fn name(&self) -> &'static str {
        match self {
            CurveShape::Increasing => "increasing",
            CurveShape::Decreasing => "decreasing",
            CurveShape::Unimodal => "unimodal",
            CurveShape::Flat => "flat",
            CurveShape::Irregular => "irregular",
        }
    }
}

/// Classifies the sign pattern of consecutive differences of `curve`.
pub fn classify_curve(curve: &[f64]) -> CurveShape {
    let diffs: Vec<f64> = curve.windows(2).map(|w| w[1] - w[0]).collect();
    if diffs.is_empty() || diffs.iter().all(|&d| d == 0.0) {
        return CurveShape::Flat;
    }
    if diffs.iter().all(|&d| d > 0.0) {
        return CurveShape::Increasing;
    }
    if diffs.iter().all(|&d| d < 0.0) {
        return CurveShape::Decreasing;
    }
    // A single zero step at the bottom means two adjacent minimisers.
    let turn = diffs.iter().position(|&d| d >= 0.0).unwrap_or(diffs.len());
    let rising = match diffs[turn..] {
        [0.0, ref rest @ ..] => rest,
        ref rest => rest,
    };
    if turn > 0 && rising.iter().all(|&d| d > 0.0) {
        CurveShape::Unimodal
    } else {
        CurveShape::Irregular
    }
}

/// Welford running moments.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let weight = other.count as f64 / count as f64;
        Moments {
            count,
            mean: self.mean + delta * weight,
            m2: self.m2 + other.m2 + delta * delta * self.count as f64 * weight,
        }
    }

    fn estimate(&self, k: usize, analytic: Option<f64>) -> AoiEstimate {
        let std_error = if self.count > 1 {
            (self.m2 / (self.count - 1) as f64).sqrt() / (self.count as f64).sqrt()
        } else {
            0.0
        };
        AoiEstimate {
            k,
            mean: self.mean,
            std_error,
            trials: self.count,
            analytic,
        }
    }
}

#[derive(Debug, Clone)]
struct CurveAccumulator {
    aoi: Vec<Moments>,
    wait: Vec<Moments>,
    freshest_age: Vec<Moments>,
}

impl CurveAccumulator {
    fn new(m: usize) -> Self {
        Self {
            aoi: vec![Moments::default(); m],
            wait: vec![Moments::default(); m],
            freshest_age: vec![Moments::default(); m],
        }
    }

    fn push(&mut self, trial: &TrialOutcome) {
        let mut freshest = f64::INFINITY;
        for i in 0..trial.aoi_curve.len() {
            freshest = freshest.min(trial.responder_ages[i]);
            self.aoi[i].push(trial.aoi_curve[i]);
            self.wait[i].push(trial.sorted_responses[i]);
            self.freshest_age[i].push(freshest);
        }
    }

    fn merge(self, other: Self) -> Self {
        let zip = |a: Vec<Moments>, b: Vec<Moments>| {
            a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect()
        };
        Self {
            aoi: zip(self.aoi, other.aoi),
            wait: zip(self.wait, other.wait),
            freshest_age: zip(self.freshest_age, other.freshest_age),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(n: usize, m: usize, lambda: f64, response: ResponseTimeModel) -> SimulationConfig {
        SimulationConfig::new(
            ReplicationScheme::new(n, m, 1).unwrap(),
            UpdateProcess::new(lambda).unwrap(),
            response,
        )
    }

    fn exp(mu: f64) -> ResponseTimeModel {
        ResponseTimeModel::Exponential { mu }
    }

    #[test]
    fn single_server_is_response_plus_age() {
        let cfg = config(5, 1, 1.0, exp(2.0)).seed(3);
        for t in 0..50 {
            let out = run_trial(&cfg, t).unwrap();
            assert_eq!(out.aoi_curve.len(), 1);
            assert_eq!(
                out.aoi_curve[0],
                out.sorted_responses[0] + out.responder_ages[0]
            );
        }
    }

    #[test]
    fn trial_invariants() {
        for mode in [AgeMode::Memoryless, AgeMode::Trajectory] {
            let cfg = config(20, 12, 1.0, exp(5.0)).seed(9).age_mode(mode);
            for t in 0..200 {
                let out = run_trial(&cfg, t).unwrap();
                assert!(out.sorted_responses.windows(2).all(|w| w[0] <= w[1]));
                let fresh = out.freshest_ages();
                assert!(fresh.windows(2).all(|w| w[1] <= w[0]));
                for ((aoi, r), f) in out.aoi_curve.iter().zip(&out.sorted_responses).zip(&fresh) {
                    assert_eq!(*aoi, r + f);
                }
                for (aoi, r) in out.aoi_curve.iter().zip(&out.sorted_responses) {
                    assert!(aoi >= r && *aoi > 0.0);
                }
                let mut servers = out.servers.clone();
                servers.sort_unstable();
                servers.dedup();
                assert_eq!(servers.len(), 12);
                assert!(servers.iter().all(|&s| s < 20));
            }
        }
    }

    #[test]
    fn trials_are_reproducible() {
        let cfg = config(20, 20, 1.0, exp(5.0)).seed(77);
        assert_eq!(run_trial(&cfg, 5).unwrap(), run_trial(&cfg, 5).unwrap());
        assert_ne!(run_trial(&cfg, 5).unwrap(), run_trial(&cfg, 6).unwrap());
    }

    #[test]
    fn equal_responses_tie_break_by_server() {
        let cfg = config(10, 6, 1.0, ResponseTimeModel::Uniform { a: 0.1, h: 0.0 }).seed(1);
        let out = run_trial(&cfg, 0).unwrap();
        assert!(out.servers.windows(2).all(|w| w[0] < w[1]));
        assert!(out.sorted_responses.iter().all(|&r| r == 0.1));
    }

    #[test]
    fn zero_trials_is_a_domain_error() {
        let cfg = config(4, 4, 1.0, exp(1.0)).trials(0);
        assert!(matches!(estimate_aoi(&cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn single_trial_has_zero_std_error() {
        let cfg = config(4, 4, 1.0, exp(1.0)).trials(1);
        let est = estimate_aoi(&cfg).unwrap();
        assert!(est.iter().all(|e| e.std_error == 0.0 && e.trials == 1));
    }

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut seq = Moments::default();
        xs.iter().for_each(|&x| seq.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        let merged = a.merge(b);
        assert_eq!(merged.count, seq.count);
        assert!((merged.mean - seq.mean).abs() < 1e-12);
        assert!((merged.m2 - seq.m2).abs() < 1e-8 * seq.m2);
    }

    #[test]
    fn analytic_column_follows_model() {
        let cfg = config(6, 6, 1.0, exp(5.0)).trials(10);
        assert!(estimate_aoi(&cfg)
            .unwrap()
            .iter()
            .all(|e| e.analytic.is_some()));
        let cfg = config(6, 6, 1.0, ResponseTimeModel::Uniform { a: 0.1, h: 0.2 }).trials(10);
        assert!(estimate_aoi(&cfg)
            .unwrap()
            .iter()
            .all(|e| e.analytic.is_some()));
        let cfg = config(6, 6, 1.0, ResponseTimeModel::Erlang { r: 5, theta: 0.04 }).trials(10);
        let report = simulate(&cfg).unwrap();
        assert!(report.aoi.iter().all(|e| e.analytic.is_none()));
        assert!(report.freshest_age.iter().all(|e| e.analytic.is_some()));
    }

    #[test]
    fn order_statistic_means_match_closed_forms() {
        let cfg = config(20, 20, 1.0, exp(5.0)).trials(20_000).seed(4);
        let report = simulate(&cfg).unwrap();
        for e in report.wait.iter().chain(&report.freshest_age) {
            let expected = e.analytic.unwrap();
            assert!((e.mean - expected).abs() < 3.5 * e.std_error, "{e:?}");
        }
        let cfg = config(20, 20, 1.0, ResponseTimeModel::Uniform { a: 0.1, h: 0.2 })
            .trials(20_000)
            .seed(4);
        for e in simulate(&cfg).unwrap().wait {
            assert!(
                (e.mean - e.analytic.unwrap()).abs() < 3.5 * e.std_error,
                "{e:?}"
            );
        }
    }

    #[test]
    fn mid_curve_point_matches_closed_form() {
        let cfg = config(20, 20, 1.0, exp(5.0)).trials(100_000).seed(2024);
        let est = estimate_aoi(&cfg).unwrap();
        let e = est[7];
        assert!((e.mean - 0.22391).abs() < 3.0 * e.std_error, "{e:?}");
    }

    #[test]
    fn empirical_argmin() {
        let one = AoiEstimate {
            k: 1,
            mean: 0.5,
            std_error: 0.0,
            trials: 1,
            analytic: None,
        };
        assert_eq!(empirical_optimal_k(&[one]).unwrap(), 1);
        assert!(empirical_optimal_k(&[]).is_err());
        let curve: Vec<AoiEstimate> = (1..=20)
            .map(|k| AoiEstimate {
                k,
                mean: crate::analytic::expected_aoi(20, k, 1.0, 5.0).unwrap(),
                std_error: 0.0,
                trials: 1,
                analytic: None,
            })
            .collect();
        assert_eq!(empirical_optimal_k(&curve).unwrap(), 8);
        let flat: Vec<AoiEstimate> = (1..=3).map(|k| AoiEstimate { k, ..one }).collect();
        assert_eq!(empirical_optimal_k(&flat).unwrap(), 1);
    }

    #[test]
    fn curve_shapes() {
        assert_eq!(classify_curve(&[1.0, 2.0, 3.0]), CurveShape::Increasing);
        assert_eq!(classify_curve(&[3.0, 2.0, 1.0]), CurveShape::Decreasing);
        assert_eq!(classify_curve(&[3.0, 1.0, 2.0]), CurveShape::Unimodal);
        assert_eq!(classify_curve(&[3.0, 1.0, 1.0, 2.0]), CurveShape::Unimodal);
        assert_eq!(classify_curve(&[1.0, 1.0]), CurveShape::Flat);
        assert_eq!(classify_curve(&[1.0, 3.0, 2.0]), CurveShape::Irregular);
        assert_eq!(classify_curve(&[1.0]), CurveShape::Flat);
    }
}
