//! End-to-end trials and their aggregation into estimates.
//!
//! Trial `i` of a run draws from its own ChaCha8 stream `i` under the run's
//! master seed, and trials are reduced in fixed-size blocks whose partial
//! sums are combined in index order. The result therefore depends only on
//! the seed and the trial count, never on the number of worker threads.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{effective_gain, Beam};
use crate::error::{invalid, Error, Result};
use crate::geometry::{sample_deployment_nonempty, SectorRegion, DEFAULT_RETRY_CAP};
use crate::noma::{PowerAllocation, RateTargets, Snr, TrialOutcome};
use crate::pairing::{select_pair, PairingScheme};
use crate::stats::{mean_halfwidth, wald_halfwidth};

const BLOCK: u64 = 4096;

/// A complete scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Wedge sector holding the near group.
    pub region_a: SectorRegion,
    /// Sector ring holding the far group.
    pub region_b: SectorRegion,
    pub antennas: u32,
    pub path_loss_exponent: f64,
    pub power: PowerAllocation,
    pub rates: RateTargets,
    pub snr: Snr,
    pub scheme: PairingScheme,
    /// Beam direction `ν` used when `randomize_beam` is off.
    pub beam_direction: f64,
    /// Draw `ν` uniformly on `[−1, 1]` per trial, with both sectors following it.
    pub randomize_beam: bool,
    /// Draw cap when conditioning a deployment on being non-empty.
    pub retry_cap: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            region_a: SectorRegion::wedge(0.1, 2.5, 6.0).expect("valid default"),
            region_b: SectorRegion::ring(0.1, 8.0, 10.0, 2.0).expect("valid default"),
            antennas: 4,
            path_loss_exponent: 2.0,
            power: PowerAllocation::new(0.25, 0.75).expect("valid default"),
            rates: RateTargets::new(4.0, 1.5).expect("valid default"),
            snr: Snr::from_db(30.0),
            scheme: PairingScheme::Rnrf,
            beam_direction: 0.0,
            randomize_beam: false,
            retry_cap: DEFAULT_RETRY_CAP,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let (a, b) = (&self.region_a, &self.region_b);
        if a.r_min() != 0.0 {
            return Err(invalid("radius_a", "the near sector must start at the base station"));
        }
        if b.r_min() < a.r_max() {
            return Err(invalid(
                "radius_c",
                format!(
                    "ring inner radius {} lies inside the near sector of radius {}",
                    b.r_min(),
                    a.r_max()
                ),
            ));
        }
        if a.half_angle() != b.half_angle() {
            return Err(invalid("delta", "both groups must share one half-angle"));
        }
        if a.center() != b.center() {
            return Err(invalid("beam_direction", "both groups must share one center direction"));
        }
        if self.antennas == 0 {
            return Err(invalid("antennas", "must be at least 1"));
        }
        if !(self.path_loss_exponent > 0.0 && self.path_loss_exponent.is_finite()) {
            return Err(invalid(
                "alpha",
                format!("must be positive, got {}", self.path_loss_exponent),
            ));
        }
        if !(-1.0..=1.0).contains(&self.beam_direction) {
            return Err(invalid(
                "beam_direction",
                format!("must lie in [-1, 1], got {}", self.beam_direction),
            ));
        }
        if self.retry_cap == 0 {
            return Err(invalid("retry_cap", "must be at least 1"));
        }
        Ok(())
    }

    pub fn with_snr_db(mut self, db: f64) -> Self {
        self.snr = Snr::from_db(db);
        self
    }

    pub fn with_scheme(mut self, scheme: PairingScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_power(mut self, power: PowerAllocation) -> Self {
        self.power = power;
        self
    }

    pub fn with_rates(mut self, rates: RateTargets) -> Self {
        self.rates = rates;
        self
    }

    pub fn with_path_loss_exponent(mut self, alpha: f64) -> Self {
        self.path_loss_exponent = alpha;
        self
    }

    /// Sets `Δ` on both sectors.
    pub fn with_half_angle(mut self, delta: f64) -> Result<Self> {
        self.region_a = self.region_a.with_half_angle(delta)?;
        self.region_b = self.region_b.with_half_angle(delta)?;
        Ok(self)
    }

    pub fn with_density_a(mut self, density: f64) -> Result<Self> {
        self.region_a = self.region_a.with_density(density)?;
        Ok(self)
    }

    pub fn with_density_b(mut self, density: f64) -> Result<Self> {
        self.region_b = self.region_b.with_density(density)?;
        Ok(self)
    }
}

/// Where a number came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimateSource {
    MonteCarlo,
    ClosedForm,
    Quadrature,
}

impl EstimateSource {
    pub const ALL: [EstimateSource; 3] = [
        EstimateSource::MonteCarlo,
        EstimateSource::ClosedForm,
        EstimateSource::Quadrature,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EstimateSource::MonteCarlo => "mc",
            EstimateSource::ClosedForm => "cf",
            EstimateSource::Quadrature => "quad",
        }
    }
}

impl fmt::Display for EstimateSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimateSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mc" | "montecarlo" => Ok(EstimateSource::MonteCarlo),
            "cf" | "closed_form" => Ok(EstimateSource::ClosedForm),
            "quad" | "quadrature" => Ok(EstimateSource::Quadrature),
            _ => Err(invalid(
                "sources",
                format!("unknown source `{s}`, expected mc, cf or quad"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimate {
    pub p_hat: f64,
    pub n_trials: u64,
    /// 95% half-width; zero for analytic sources.
    pub ci_halfwidth: f64,
    pub source: EstimateSource,
}

impl OutageEstimate {
    pub fn from_counts(outages: u64, n_trials: u64) -> Self {
        let p_hat = if n_trials == 0 {
            0.0
        } else {
            outages as f64 / n_trials as f64
        };
        Self {
            p_hat,
            n_trials,
            ci_halfwidth: wald_halfwidth(p_hat, n_trials),
            source: EstimateSource::MonteCarlo,
        }
    }

    pub fn analytic(p: f64, source: EstimateSource) -> Self {
        Self {
            p_hat: p.clamp(0.0, 1.0),
            n_trials: 0,
            ci_halfwidth: 0.0,
            source,
        }
    }

    /// A Monte Carlo interval from fewer than two trials carries no information.
    pub fn is_degenerate(&self) -> bool {
        self.source == EstimateSource::MonteCarlo && self.n_trials < 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub mean: f64,
    pub n_trials: u64,
    pub ci_halfwidth: f64,
    pub source: EstimateSource,
}

impl RateEstimate {
    fn from_sums(sum: f64, sum_sq: f64, n: u64) -> Self {
        let nf = n as f64;
        let mean = sum / nf;
        let variance = if n > 1 {
            (sum_sq - nf * mean * mean) / (nf - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            n_trials: n,
            ci_halfwidth: mean_halfwidth(variance, n),
            source: EstimateSource::MonteCarlo,
        }
    }

    pub fn analytic(mean: f64, source: EstimateSource) -> Self {
        Self {
            mean,
            n_trials: 0,
            ci_halfwidth: 0.0,
            source,
        }
    }
}

/// Everything one Monte Carlo run reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub near: OutageEstimate,
    pub far: OutageEstimate,
    pub oma_near: OutageEstimate,
    pub oma_far: OutageEstimate,
    /// Outage sum rate under NOMA.
    pub noma_rate: RateEstimate,
    /// OMA sum of the target rates that were met.
    pub oma_rate: RateEstimate,
    /// OMA sum of the achieved half-block rates of devices not in outage.
    pub oma_capacity: RateEstimate,
}

/// The random stream of trial `index` under `master_seed`.
pub fn trial_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// One realization: deploy both groups, pair, and evaluate both access schemes.
/// Deployments are drawn before the pairing step so the schemes see the same
/// devices under one stream.
pub fn run_trial<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<TrialOutcome> {
    let nu = if cfg.randomize_beam {
        rng.random_range(-1.0..=1.0)
    } else {
        cfg.beam_direction
    };
    let (region_a, region_b) = if nu == cfg.region_a.center() {
        (cfg.region_a, cfg.region_b)
    } else {
        (cfg.region_a.recentered(nu), cfg.region_b.recentered(nu))
    };
    let group_a = sample_deployment_nonempty(&region_a, rng, cfg.retry_cap)?;
    let group_b = sample_deployment_nonempty(&region_b, rng, cfg.retry_cap)?;
    let pair = select_pair(cfg.scheme, &group_a, &group_b, rng)?;
    let beam = Beam::new(nu, cfg.antennas)?;
    let g_near = effective_gain(&pair.near, &beam, cfg.path_loss_exponent);
    let g_far = effective_gain(&pair.far, &beam, cfg.path_loss_exponent);
    Ok(TrialOutcome::evaluate(g_near, g_far, cfg.snr, &cfg.power, &cfg.rates))
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Tally {
    n: u64,
    near: u64,
    far: u64,
    oma_near: u64,
    oma_far: u64,
    noma: (f64, f64),
    oma: (f64, f64),
    capacity: (f64, f64),
}

impl Tally {
    fn push(&mut self, t: &TrialOutcome) {
        self.n += 1;
        self.near += u64::from(t.near_outage);
        self.far += u64::from(t.far_outage);
        self.oma_near += u64::from(t.oma_near_outage);
        self.oma_far += u64::from(t.oma_far_outage);
        accumulate(&mut self.noma, t.noma_rate);
        accumulate(&mut self.oma, t.oma_rate);
        accumulate(&mut self.capacity, t.oma_capacity);
    }

    fn merge(mut self, other: &Tally) -> Self {
        self.n += other.n;
        self.near += other.near;
        self.far += other.far;
        self.oma_near += other.oma_near;
        self.oma_far += other.oma_far;
        for (a, b) in [
            (&mut self.noma, other.noma),
            (&mut self.oma, other.oma),
            (&mut self.capacity, other.capacity),
        ] {
            a.0 += b.0;
            a.1 += b.1;
        }
        self
    }

    fn finish(&self) -> Estimate {
        let rate = |(s, q): (f64, f64)| RateEstimate::from_sums(s, q, self.n);
        Estimate {
            near: OutageEstimate::from_counts(self.near, self.n),
            far: OutageEstimate::from_counts(self.far, self.n),
            oma_near: OutageEstimate::from_counts(self.oma_near, self.n),
            oma_far: OutageEstimate::from_counts(self.oma_far, self.n),
            noma_rate: rate(self.noma),
            oma_rate: rate(self.oma),
            oma_capacity: rate(self.capacity),
        }
    }
}

fn accumulate(acc: &mut (f64, f64), x: f64) {
    acc.0 += x;
    acc.1 += x * x;
}

/// Runs trials on a dedicated worker pool.
#[derive(Debug)]
pub struct Engine {
    pool: rayon::ThreadPool,
}

impl Engine {
    /// `threads = 0` uses one worker per available core.
    pub fn new(threads: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| invalid("threads", e.to_string()))?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn estimate(&self, cfg: &SystemConfig, n_trials: u64, master_seed: u64) -> Result<Estimate> {
        if n_trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        cfg.validate()?;
        let blocks = n_trials.div_ceil(BLOCK);
        let tallies: Vec<Tally> = self.pool.install(|| {
            (0..blocks)
                .into_par_iter()
                .map(|b| {
                    let start = b * BLOCK;
                    let end = (start + BLOCK).min(n_trials);
                    let mut tally = Tally::default();
                    for i in start..end {
                        let mut rng = trial_rng(master_seed, i);
                        tally.push(&run_trial(cfg, &mut rng)?);
                    }
                    Ok(tally)
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let total = tallies.iter().fold(Tally::default(), |acc, t| acc.merge(t));
        Ok(total.finish())
    }
}

/// [`Engine::estimate`] on a pool sized to the machine.
pub fn estimate(cfg: &SystemConfig, n_trials: u64, master_seed: u64) -> Result<Estimate> {
    Engine::new(0)?.estimate(cfg, n_trials, master_seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        SystemConfig::default().validate().unwrap();
    }

    #[test]
    fn validation_names_the_problem() {
        let cfg = SystemConfig {
            region_b: SectorRegion::ring(0.1, 2.0, 10.0, 2.0).unwrap(),
            ..SystemConfig::default()
        };
        assert!(matches!(
            cfg.validate(),
            Err(Error::InvalidParameter { name: "radius_c", .. })
        ));
        let mut cfg = SystemConfig::default();
        cfg.region_b = cfg.region_b.with_half_angle(0.2).unwrap();
        assert!(matches!(
            cfg.validate(),
            Err(Error::InvalidParameter { name: "delta", .. })
        ));
    }

    #[test]
    fn infeasible_split_always_outage() {
        let cfg = SystemConfig::default()
            .with_power(PowerAllocation::new(0.4, 0.6).unwrap())
            .with_snr_db(60.0);
        let est = estimate(&cfg, 2000, 1).unwrap();
        assert_eq!(est.near.p_hat, 1.0);
        assert_eq!(est.far.p_hat, 1.0);
        assert_eq!(est.noma_rate.mean, 0.0);
    }

    #[test]
    fn outage_vanishes_at_very_high_snr() {
        let cfg = SystemConfig::default().with_snr_db(90.0);
        let est = estimate(&cfg, 5000, 2).unwrap();
        assert!(est.near.p_hat < 1e-3 && est.far.p_hat < 1e-3);
        assert!((est.noma_rate.mean - 5.5).abs() < 0.01);
    }

    #[test]
    fn single_trial_is_flagged() {
        let est = estimate(&SystemConfig::default(), 1, 3).unwrap();
        assert!(est.near.is_degenerate());
        assert_eq!(est.near.n_trials, 1);
        assert!(!estimate(&SystemConfig::default(), 10, 3).unwrap().near.is_degenerate());
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(estimate(&SystemConfig::default(), 0, 0).is_err());
    }

    #[test]
    fn trial_streams_are_independent_of_order() {
        let cfg = SystemConfig::default();
        let forward: Vec<_> = (0..20)
            .map(|i| run_trial(&cfg, &mut trial_rng(9, i)).unwrap())
            .collect();
        let backward: Vec<_> = (0..20)
            .rev()
            .map(|i| run_trial(&cfg, &mut trial_rng(9, i)).unwrap())
            .collect();
        assert!(forward.iter().eq(backward.iter().rev()));
    }

    #[test]
    fn deterministic_schemes_share_near_outcomes() {
        let cfg = SystemConfig::default().with_snr_db(20.0);
        for i in 0..500 {
            let a = run_trial(&cfg.clone().with_scheme(PairingScheme::Nnnf), &mut trial_rng(4, i)).unwrap();
            let b = run_trial(&cfg.clone().with_scheme(PairingScheme::Nnff), &mut trial_rng(4, i)).unwrap();
            assert_eq!(a.near_outage, b.near_outage);
        }
    }

    #[test]
    fn retry_cap_error_propagates() {
        let mut cfg = SystemConfig::default();
        cfg.region_a = cfg.region_a.with_density(1e-300).unwrap();
        cfg.retry_cap = 10;
        assert!(matches!(estimate(&cfg, 5, 0), Err(Error::RetryCapExceeded { .. })));
    }

    #[test]
    fn source_names_round_trip() {
        for s in EstimateSource::ALL {
            assert_eq!(s.as_str().parse::<EstimateSource>().unwrap(), s);
        }
        assert!("plot".parse::<EstimateSource>().is_err());
    }
}
