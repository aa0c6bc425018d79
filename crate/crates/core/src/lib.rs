//! Downlink millimeter-wave NOMA for cellular M2M device pairing.
//!
//! Two groups of machine-type devices are scattered by homogeneous Poisson
//! point processes over a wedge sector (near group) and a sector ring (far
//! group). One random beam serves one near/far pair under power-domain NOMA
//! with successive interference cancellation. The crate offers two
//! independent views of the resulting outage performance:
//!
//! * [`montecarlo`] draws deployments, pairs devices with one of the
//!   [`PairingScheme`]s, evaluates the single-path channel and the SIC
//!   decoding events trial by trial;
//! * [`analytic`] evaluates the asymptotic closed forms for every scheme and
//!   the exact outage integrals they approximate, by adaptive quadrature.
//!
//! ```
//! use mmnoma::{analytic, PairingScheme, Role, SystemConfig};
//!
//! let cfg = SystemConfig::default().with_snr_db(30.0);
//! let approx = analytic::closed_form_outage(&cfg, PairingScheme::Rnrf, Role::Near);
//! let exact = analytic::exact_outage_quadrature(&cfg, PairingScheme::Rnrf, Role::Near).unwrap();
//! assert!((approx - exact).abs() / exact < 0.10);
//! ```

pub mod analytic;
pub mod channel;
mod error;
pub mod geometry;
pub mod montecarlo;
pub mod noma;
pub mod pairing;
pub mod stats;

pub use channel::{Beam, EffectiveGain};
pub use error::{Error, Result};
pub use geometry::{DevicePoint, SectorRegion};
pub use montecarlo::{Engine, Estimate, EstimateSource, OutageEstimate, RateEstimate, SystemConfig};
pub use noma::{PowerAllocation, RateTargets, Snr, TrialOutcome};
pub use pairing::{PairSelection, PairingScheme};

/// Which member of the scheduled pair a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    /// The device drawn from the wedge sector, which performs SIC.
    Near,
    /// The device drawn from the sector ring.
    Far,
}

impl Role {
    pub const ALL: [Role; 2] = [Role::Near, Role::Far];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Near => "near",
            Role::Far => "far",
        }
    }
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
