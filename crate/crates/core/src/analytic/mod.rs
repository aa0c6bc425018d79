//! Closed-form outage approximations and the exact integrals behind them.
//!
//! Every closed form here is the high-SNR, narrow-sector expansion of an
//! outage integral of the shape
//!
//! ```text
//! P = (1/2Δ) ∫∫ (1 − exp(−η (1 + r^α) / F_M(ν − θ))) f(r) dr dθ
//! ```
//!
//! where `f` is the distance law of the device the scheme picks. The same
//! integral is available in [`exact`] by two-dimensional adaptive quadrature
//! with the exact Fejér kernel.

mod closed_form;
pub mod exact;
pub mod quadrature;
pub mod special;

pub use closed_form::{
    closed_form_outage, closed_form_outage_unclamped, comparison_terms, nnff_far_outage, nnnf_far_outage,
    nnnf_near_outage, omega, omega_closed_form_alpha2, rnrf_far_outage, rnrf_near_outage, ComparisonTerms,
};
pub use exact::{exact_outage_quadrature, oma_outage_quadrature, outage_integral};
pub use special::lower_incomplete_gamma;

use crate::noma::{sic_feasible, PowerAllocation, RateTargets, Snr};

/// Outage thresholds on the normalized gain `|α|² F_M / (1 + d^α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdCoefficients {
    /// `η_A`; infinite when SIC is infeasible.
    pub near: f64,
    /// `η_B`; infinite when SIC is infeasible.
    pub far: f64,
    pub feasible: bool,
}

pub fn thresholds(snr: Snr, power: &PowerAllocation, rates: &RateTargets) -> ThresholdCoefficients {
    if !sic_feasible(power, rates) {
        return ThresholdCoefficients {
            near: f64::INFINITY,
            far: f64::INFINITY,
            feasible: false,
        };
    }
    let rho = snr.linear();
    let eps_b = rates.eps_far();
    let far = eps_b / (rho * (power.far() - power.near() * eps_b));
    let own = rates.eps_near() / (rho * power.near());
    ThresholdCoefficients {
        near: far.max(own),
        far,
        feasible: true,
    }
}

/// Threshold for one device served alone on half the block: `(2^{2R} − 1) / ρ`.
pub fn oma_threshold(snr: Snr, rate: f64) -> f64 {
    ((2.0 * rate).exp2() - 1.0) / snr.linear()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> (PowerAllocation, RateTargets) {
        (
            PowerAllocation::new(0.25, 0.75).unwrap(),
            RateTargets::new(4.0, 1.5).unwrap(),
        )
    }

    #[test]
    fn thresholds_at_reference_point() {
        let (pw, rt) = reference();
        let t = thresholds(Snr::from_db(30.0), &pw, &rt);
        assert!(t.feasible);
        assert!((t.far - 0.006_243).abs() < 1e-6, "{}", t.far);
        assert!((t.near - 0.06).abs() < 1e-12);
    }

    #[test]
    fn infeasible_split() {
        let pw = PowerAllocation::new(0.4, 0.6).unwrap();
        let rt = RateTargets::new(4.0, 1.5).unwrap();
        let t = thresholds(Snr::from_db(30.0), &pw, &rt);
        assert!(!t.feasible);
        assert!(t.near.is_infinite() && t.far.is_infinite());
    }

    #[test]
    fn oma_threshold_values() {
        let rho = Snr::from_linear(1000.0).unwrap();
        assert!((oma_threshold(rho, 4.0) - 0.255).abs() < 1e-12);
        assert!((oma_threshold(rho, 1.5) - 0.007).abs() < 1e-12);
    }
}
