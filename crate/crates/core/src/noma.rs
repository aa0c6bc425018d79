//! SIC decoding events and rate accounting for one scheduled near/far pair.

use crate::channel::EffectiveGain;
use crate::error::{invalid, Result};

/// Transmit SNR `ρ`, stored linear.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Snr(f64);

impl Snr {
    pub fn from_linear(rho: f64) -> Result<Self> {
        if rho.is_nan() || rho <= 0.0 {
            return Err(invalid("snr", format!("must be positive, got {rho}")));
        }
        Ok(Self(rho))
    }

    pub fn from_db(db: f64) -> Self {
        Self(10f64.powf(db / 10.0))
    }

    pub fn linear(self) -> f64 {
        self.0
    }

    pub fn db(self) -> f64 {
        10.0 * self.0.log10()
    }
}

/// Power split `β₁² + β₂² = 1` with the far device getting the larger share.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerAllocation {
    near: f64,
    far: f64,
}

impl PowerAllocation {
    pub fn new(near: f64, far: f64) -> Result<Self> {
        if !(near > 0.0 && far < 1.0 && near < far) {
            return Err(invalid(
                "power",
                format!("need 0 < near < far < 1, got near = {near}, far = {far}"),
            ));
        }
        if ((near + far) - 1.0).abs() > 1e-12 {
            return Err(invalid("power", format!("fractions must sum to 1, got {}", near + far)));
        }
        Ok(Self { near, far })
    }

    /// Split with `β₁² = near` and `β₂² = 1 − near`.
    pub fn from_near_fraction(near: f64) -> Result<Self> {
        Self::new(near, 1.0 - near)
    }

    /// `β₁²`.
    pub fn near(&self) -> f64 {
        self.near
    }

    /// `β₂²`.
    pub fn far(&self) -> f64 {
        self.far
    }
}

/// Target rates in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTargets {
    near: f64,
    far: f64,
}

impl RateTargets {
    pub fn new(near: f64, far: f64) -> Result<Self> {
        if !(near > 0.0 && near.is_finite()) {
            return Err(invalid("rate_near", format!("must be positive, got {near}")));
        }
        if !(far > 0.0 && far.is_finite()) {
            return Err(invalid("rate_far", format!("must be positive, got {far}")));
        }
        Ok(Self { near, far })
    }

    pub fn near(&self) -> f64 {
        self.near
    }

    pub fn far(&self) -> f64 {
        self.far
    }

    /// `ε_A = 2^{R₁} − 1`.
    pub fn eps_near(&self) -> f64 {
        self.near.exp2() - 1.0
    }

    /// `ε_B = 2^{R₂} − 1`.
    pub fn eps_far(&self) -> f64 {
        self.far.exp2() - 1.0
    }
}

/// SIC is possible at all only when `β₂² − β₁² ε_B > 0`.
pub fn sic_feasible(power: &PowerAllocation, rates: &RateTargets) -> bool {
    power.far - power.near * rates.eps_far() > 0.0
}

/// SINR of the far device's signal at the near device, before cancellation.
pub fn sinr_far_at_near(g_near: EffectiveGain, snr: Snr, power: &PowerAllocation) -> f64 {
    interference_limited(g_near.value(), snr.linear(), power)
}

/// SNR of the near device's own signal after cancelling the far signal.
pub fn snr_near(g_near: EffectiveGain, snr: Snr, power: &PowerAllocation) -> f64 {
    snr.linear() * g_near.value() * power.near
}

/// SINR of the far device, which treats the near signal as noise.
pub fn sinr_far(g_far: EffectiveGain, snr: Snr, power: &PowerAllocation) -> f64 {
    interference_limited(g_far.value(), snr.linear(), power)
}

fn interference_limited(g: f64, rho: f64, power: &PowerAllocation) -> f64 {
    let rx = rho * g;
    rx * power.far / (rx * power.near + 1.0)
}

/// Near device fails unless it both cancels the far signal and decodes its own.
pub fn near_outage(g_near: EffectiveGain, snr: Snr, power: &PowerAllocation, rates: &RateTargets) -> bool {
    let sic_ok = sinr_far_at_near(g_near, snr, power) > rates.eps_far();
    let own_ok = snr_near(g_near, snr, power) > rates.eps_near();
    !(sic_ok && own_ok)
}

pub fn far_outage(g_far: EffectiveGain, snr: Snr, power: &PowerAllocation, rates: &RateTargets) -> bool {
    sinr_far(g_far, snr, power) < rates.eps_far()
}

/// Delivered NOMA rate of one realization: each target rate counts when met.
pub fn noma_outage_sum_rate(near_out: bool, far_out: bool, rates: &RateTargets) -> f64 {
    let near = if near_out { 0.0 } else { rates.near };
    let far = if far_out { 0.0 } else { rates.far };
    near + far
}

/// OMA link of one device: half the resource block at full power.
pub fn oma_rate(g: EffectiveGain, snr: Snr) -> f64 {
    0.5 * (snr.linear() * g.value()).ln_1p() / std::f64::consts::LN_2
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmaOutcome {
    pub near_outage: bool,
    pub far_outage: bool,
    /// Target rates of the devices not in outage.
    pub rate: f64,
    /// Achieved half-block rates of the devices not in outage.
    pub capacity: f64,
}

/// Both devices served orthogonally against the same targets `R₁`, `R₂`.
pub fn oma_trial(g_near: EffectiveGain, g_far: EffectiveGain, snr: Snr, rates: &RateTargets) -> OmaOutcome {
    let near_rate = oma_rate(g_near, snr);
    let far_rate = oma_rate(g_far, snr);
    let near_outage = near_rate < rates.near;
    let far_outage = far_rate < rates.far;
    let served = |out: bool, v: f64| if out { 0.0 } else { v };
    OmaOutcome {
        near_outage,
        far_outage,
        rate: served(near_outage, rates.near) + served(far_outage, rates.far),
        capacity: served(near_outage, near_rate) + served(far_outage, far_rate),
    }
}

/// Everything one Monte Carlo realization reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub near_outage: bool,
    pub far_outage: bool,
    pub noma_rate: f64,
    pub oma_near_outage: bool,
    pub oma_far_outage: bool,
    pub oma_rate: f64,
    pub oma_capacity: f64,
}

impl TrialOutcome {
    pub fn evaluate(
        g_near: EffectiveGain,
        g_far: EffectiveGain,
        snr: Snr,
        power: &PowerAllocation,
        rates: &RateTargets,
    ) -> Self {
        let near = near_outage(g_near, snr, power, rates);
        let far = far_outage(g_far, snr, power, rates);
        let oma = oma_trial(g_near, g_far, snr, rates);
        Self {
            near_outage: near,
            far_outage: far,
            noma_rate: noma_outage_sum_rate(near, far, rates),
            oma_near_outage: oma.near_outage,
            oma_far_outage: oma.far_outage,
            oma_rate: oma.rate,
            oma_capacity: oma.capacity,
        }
    }
}
