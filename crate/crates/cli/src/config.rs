//! Experiment files: flat TOML, one `key = value` per line, every key optional.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mmnoma::{EstimateSource, PairingScheme, PowerAllocation, RateTargets, SectorRegion, Snr, SystemConfig};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
}

fn bad(key: &str, message: impl fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_owned(),
        message: message.to_string(),
    }
}

/// The swept parameter of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Transmit SNR in dB.
    Snr,
    /// Sector half-angle `Δ` of both groups.
    Delta,
    /// Near-group density `λ_A`.
    DensityA,
    /// Far target rate `R₂`.
    RateFar,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::Snr => "snr_db",
            SweepVariable::Delta => "delta",
            SweepVariable::DensityA => "density_a",
            SweepVariable::RateFar => "rate_far",
        }
    }

    /// `base` with this variable set to `value`.
    pub fn apply(self, base: &SystemConfig, value: f64) -> mmnoma::Result<SystemConfig> {
        let cfg = base.clone();
        let cfg = match self {
            SweepVariable::Snr => cfg.with_snr_db(value),
            SweepVariable::Delta => cfg.with_half_angle(value)?,
            SweepVariable::DensityA => cfg.with_density_a(value)?,
            SweepVariable::RateFar => {
                let near = cfg.rates.near();
                cfg.with_rates(RateTargets::new(near, value)?)
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl FromStr for SweepVariable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "snr" | "snr_db" => Ok(SweepVariable::Snr),
            "delta" => Ok(SweepVariable::Delta),
            "density_a" => Ok(SweepVariable::DensityA),
            "rate_far" => Ok(SweepVariable::RateFar),
            other => Err(format!(
                "unknown sweep `{other}`, expected snr, delta, density_a or rate_far"
            )),
        }
    }
}

/// What each grid point reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// NOMA outage of the near and far device.
    Outage,
    /// Outage of the same devices served by OMA.
    OmaOutage,
    /// NOMA and OMA outage sum rates.
    SumRate,
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "outage" => Ok(Metric::Outage),
            "oma_outage" => Ok(Metric::OmaOutage),
            "sum_rate" => Ok(Metric::SumRate),
            other => Err(format!(
                "unknown metric `{other}`, expected outage, oma_outage or sum_rate"
            )),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawConfig {
    snr_db: f64,
    alpha: f64,
    antennas: i64,
    delta: f64,
    beam_direction: f64,
    randomize_beam: bool,
    radius_a: f64,
    radius_c: f64,
    radius_b: f64,
    density_a: f64,
    density_b: f64,
    power_near: f64,
    power_far: Option<f64>,
    rate_near: f64,
    rate_far: f64,
    retry_cap: i64,
    sweep: String,
    grid: Option<Vec<f64>>,
    schemes: Vec<String>,
    sources: Vec<String>,
    metrics: Vec<String>,
    trials: i64,
    seed: i64,
    threads: i64,
    output: Option<PathBuf>,
}

impl Default for RawConfig {
    fn default() -> Self {
        Self {
            snr_db: 30.0,
            alpha: 2.0,
            antennas: 4,
            delta: 0.1,
            beam_direction: 0.0,
            randomize_beam: false,
            radius_a: 2.5,
            radius_c: 8.0,
            radius_b: 10.0,
            density_a: 6.0,
            density_b: 2.0,
            power_near: 0.25,
            power_far: None,
            rate_near: 4.0,
            rate_far: 1.5,
            retry_cap: mmnoma::geometry::DEFAULT_RETRY_CAP as i64,
            sweep: "snr".into(),
            grid: None,
            schemes: vec!["RNRF".into(), "NNNF".into(), "NNFF".into()],
            sources: vec!["mc".into(), "cf".into(), "quad".into()],
            metrics: vec!["outage".into()],
            trials: 100_000,
            seed: 1,
            threads: 0,
            output: None,
        }
    }
}

/// A parsed, validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub base: SystemConfig,
    pub sweep: SweepVariable,
    pub grid: Vec<f64>,
    pub schemes: Vec<PairingScheme>,
    pub sources: Vec<EstimateSource>,
    pub metrics: Vec<Metric>,
    pub trials: u64,
    pub seed: u64,
    /// Worker threads for Monte Carlo; 0 means one per core.
    pub threads: usize,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        parse_config("").expect("defaults are valid")
    }
}

/// SNR grid `0, 5, …, 40` dB.
pub fn default_snr_grid() -> Vec<f64> {
    (0..=8).map(|i| 5.0 * f64::from(i)).collect()
}

pub fn load_config(path: &Path) -> Result<ExperimentSpec, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ExperimentSpec, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    build(raw)
}

fn positive_count(key: &str, v: i64) -> Result<u64, ConfigError> {
    if v < 1 {
        return Err(bad(key, format!("must be at least 1, got {v}")));
    }
    Ok(v as u64)
}

fn parse_list<T: FromStr>(key: &str, items: &[String]) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    if items.is_empty() {
        return Err(bad(key, "must not be empty"));
    }
    items.iter().map(|s| s.parse::<T>().map_err(|e| bad(key, e))).collect()
}

fn build(raw: RawConfig) -> Result<ExperimentSpec, ConfigError> {
    let wrap = |key: &'static str| move |e: mmnoma::Error| bad(key, e);

    if !raw.snr_db.is_finite() {
        return Err(bad("snr_db", "must be finite"));
    }
    let antennas = u32::try_from(raw.antennas)
        .ok()
        .filter(|&m| m >= 1)
        .ok_or_else(|| bad("antennas", format!("must be a positive integer, got {}", raw.antennas)))?;
    let region_a =
        SectorRegion::new(raw.delta, 0.0, raw.radius_a, raw.density_a, raw.beam_direction).map_err(|e| match e {
            mmnoma::Error::InvalidParameter {
                name: "density",
                reason,
            } => bad("density_a", reason),
            mmnoma::Error::InvalidParameter { name: "r_max", reason } => bad("radius_a", reason),
            mmnoma::Error::InvalidParameter { name: "center", reason } => bad("beam_direction", reason),
            other => bad("delta", other),
        })?;
    let region_b = SectorRegion::new(raw.delta, raw.radius_c, raw.radius_b, raw.density_b, raw.beam_direction)
        .map_err(|e| match e {
            mmnoma::Error::InvalidParameter {
                name: "density",
                reason,
            } => bad("density_b", reason),
            mmnoma::Error::InvalidParameter { name: "r_max", reason } => bad("radius_b", reason),
            mmnoma::Error::InvalidParameter { name: "r_min", reason } => bad("radius_c", reason),
            mmnoma::Error::InvalidParameter { name: "center", reason } => bad("beam_direction", reason),
            other => bad("delta", other),
        })?;
    let power = PowerAllocation::new(raw.power_near, raw.power_far.unwrap_or(1.0 - raw.power_near)).map_err(wrap(
        if raw.power_far.is_some() {
            "power_far"
        } else {
            "power_near"
        },
    ))?;
    let rates = RateTargets::new(raw.rate_near, raw.rate_far).map_err(|e| match e {
        mmnoma::Error::InvalidParameter {
            name: "rate_near",
            reason,
        } => bad("rate_near", reason),
        other => bad("rate_far", other),
    })?;
    let base = SystemConfig {
        region_a,
        region_b,
        antennas,
        path_loss_exponent: raw.alpha,
        power,
        rates,
        snr: Snr::from_db(raw.snr_db),
        scheme: PairingScheme::Rnrf,
        beam_direction: raw.beam_direction,
        randomize_beam: raw.randomize_beam,
        retry_cap: positive_count("retry_cap", raw.retry_cap)?,
    };
    base.validate().map_err(|e| match e {
        mmnoma::Error::InvalidParameter { name, reason } => bad(name, reason),
        other => bad("config", other),
    })?;

    let sweep: SweepVariable = raw.sweep.parse().map_err(|e| bad("sweep", e))?;
    let grid = match raw.grid {
        Some(g) => g,
        None if sweep == SweepVariable::Snr => default_snr_grid(),
        None => return Err(bad("grid", format!("required for sweep `{}`", raw.sweep))),
    };
    if grid.is_empty() {
        return Err(bad("grid", "must not be empty"));
    }
    for &v in &grid {
        if !v.is_finite() {
            return Err(bad("grid", format!("non-finite value {v}")));
        }
        sweep
            .apply(&base, v)
            .map_err(|e| bad("grid", format!("value {v}: {e}")))?;
    }

    let trials = positive_count("trials", raw.trials)?;
    if raw.seed < 0 {
        return Err(bad("seed", format!("must be non-negative, got {}", raw.seed)));
    }
    let threads = usize::try_from(raw.threads).map_err(|_| bad("threads", "must be non-negative"))?;

    Ok(ExperimentSpec {
        base,
        sweep,
        grid,
        schemes: parse_list("schemes", &raw.schemes)?,
        sources: parse_list("sources", &raw.sources)?,
        metrics: parse_list("metrics", &raw.metrics)?,
        trials,
        seed: raw.seed as u64,
        threads,
        output: raw.output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_reference_scenario() {
        let spec = parse_config("").unwrap();
        assert_eq!(spec.base, SystemConfig::default());
        assert_eq!(spec.grid, default_snr_grid());
        assert_eq!(spec.schemes, PairingScheme::ALL.to_vec());
        assert_eq!(spec.sweep, SweepVariable::Snr);
    }

    #[test]
    fn alpha_override() {
        let spec = parse_config("alpha = 3").unwrap();
        assert_eq!(spec.base.path_loss_exponent, 3.0);
    }

    #[test]
    fn errors_name_the_key() {
        for (text, key) in [
            ("density_a = -1.0", "density_a"),
            ("density_b = 0.0", "density_b"),
            ("radius_c = 1.0", "radius_c"),
            ("antennas = 0", "antennas"),
            ("trials = 0", "trials"),
            ("power_near = 0.6", "power_near"),
            ("sweep = \"delta\"", "grid"),
            ("schemes = [\"XYZ\"]", "schemes"),
            ("sources = []", "sources"),
            ("sweep = \"delta\"\ngrid = [0.1, -0.2]", "grid"),
        ] {
            match parse_config(text) {
                Err(ConfigError::Invalid { key: k, .. }) => assert_eq!(k, key, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn unknown_and_mistyped_keys_are_reported() {
        let err = parse_config("snr = 3").unwrap_err().to_string();
        assert!(err.contains("snr"), "{err}");
        let err = parse_config("alpha = \"two\"").unwrap_err().to_string();
        assert!(err.contains("alpha"), "{err}");
    }

    #[test]
    fn sweep_applies_value() {
        let base = SystemConfig::default();
        let cfg = SweepVariable::Delta.apply(&base, 0.05).unwrap();
        assert_eq!(cfg.region_a.half_angle(), 0.05);
        assert_eq!(cfg.region_b.half_angle(), 0.05);
        let cfg = SweepVariable::RateFar.apply(&base, 1.0).unwrap();
        assert_eq!(cfg.rates.far(), 1.0);
        assert_eq!(cfg.rates.near(), 4.0);
    }
}
