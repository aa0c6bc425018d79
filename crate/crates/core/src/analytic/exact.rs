//! Outage integrals evaluated without the small-sector or high-SNR expansions.

use super::quadrature::{integrate, Tolerance};
use super::{oma_threshold, thresholds};
use crate::channel::fejer_kernel;
use crate::error::Result;
use crate::geometry::{pdf_farthest_distance, pdf_nearest_distance, pdf_uniform_distance, SectorRegion};
use crate::montecarlo::SystemConfig;
use crate::pairing::PairingScheme;
use crate::Role;

const INNER_TOLERANCE: f64 = 1e-10;
const OUTER_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DistanceLaw {
    Uniform,
    Nearest,
    Farthest,
}

impl DistanceLaw {
    fn of(scheme: PairingScheme, role: Role) -> Self {
        match (scheme, role) {
            (PairingScheme::Rnrf, _) => DistanceLaw::Uniform,
            (_, Role::Near) | (PairingScheme::Nnnf, Role::Far) => DistanceLaw::Nearest,
            (PairingScheme::Nnff, Role::Far) => DistanceLaw::Farthest,
        }
    }

    fn pdf(self, region: &SectorRegion, r: f64) -> f64 {
        match self {
            DistanceLaw::Uniform => pdf_uniform_distance(region, r),
            DistanceLaw::Nearest => pdf_nearest_distance(region, r),
            DistanceLaw::Farthest => pdf_farthest_distance(region, r),
        }
    }
}

fn region_of(cfg: &SystemConfig, role: Role) -> &SectorRegion {
    match role {
        Role::Near => &cfg.region_a,
        Role::Far => &cfg.region_b,
    }
}

/// `(1/2Δ) ∫∫ (1 − e^{−η(1 + r^α)/F_M(x)}) f(r) dr dx` for the device picked
/// by `scheme` in `role`, with `x` the offset from the beam direction.
pub fn outage_integral(cfg: &SystemConfig, scheme: PairingScheme, role: Role, eta: f64) -> Result<f64> {
    if eta.is_infinite() {
        return Ok(1.0);
    }
    if eta <= 0.0 {
        return Ok(0.0);
    }
    let region = region_of(cfg, role);
    let law = DistanceLaw::of(scheme, role);
    let alpha = cfg.path_loss_exponent;
    let delta = region.half_angle();
    let (lo, hi) = (region.r_min(), region.r_max());

    let mut inner_error = None;
    let outer = integrate(
        |x| {
            let kernel = fejer_kernel(x, cfg.antennas);
            if kernel <= 0.0 {
                return 1.0;
            }
            let scale = eta / kernel;
            let radial = integrate(
                |r| -(-scale * (1.0 + r.powf(alpha))).exp_m1() * law.pdf(region, r),
                lo,
                hi,
                Tolerance::relative(INNER_TOLERANCE),
            );
            match radial {
                Ok(q) => q.value,
                Err(e) => {
                    inner_error.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        0.0,
        delta,
        Tolerance::relative(OUTER_TOLERANCE),
    );
    if let Some(e) = inner_error {
        return Err(e);
    }
    // The kernel is even, so the symmetric angular window folds onto [0, Δ].
    Ok((outer?.value / delta).clamp(0.0, 1.0))
}

/// Exact NOMA outage of the device picked by `scheme` in `role`.
pub fn exact_outage_quadrature(cfg: &SystemConfig, scheme: PairingScheme, role: Role) -> Result<f64> {
    let t = thresholds(cfg.snr, &cfg.power, &cfg.rates);
    let eta = match role {
        Role::Near => t.near,
        Role::Far => t.far,
    };
    outage_integral(cfg, scheme, role, eta)
}

/// Exact outage of the same device served alone on half the resource block.
pub fn oma_outage_quadrature(cfg: &SystemConfig, scheme: PairingScheme, role: Role) -> Result<f64> {
    let rate = match role {
        Role::Near => cfg.rates.near(),
        Role::Far => cfg.rates.far(),
    };
    outage_integral(cfg, scheme, role, oma_threshold(cfg.snr, rate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::closed_form_outage;

    fn at_db(db: f64) -> SystemConfig {
        SystemConfig::default().with_snr_db(db)
    }

    #[test]
    fn extreme_thresholds() {
        let cfg = at_db(30.0);
        for scheme in PairingScheme::ALL {
            for role in Role::ALL {
                assert_eq!(outage_integral(&cfg, scheme, role, f64::INFINITY).unwrap(), 1.0);
                assert_eq!(outage_integral(&cfg, scheme, role, 0.0).unwrap(), 0.0);
                let big = outage_integral(&cfg, scheme, role, 1e6).unwrap();
                assert!((big - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn tiny_threshold_matches_first_order_term() {
        // With η → 0 the integrand is η(1 + r²)/F_M(x): a separable oracle.
        let cfg = at_db(30.0);
        let eta = 1e-9;
        let inv_kernel = integrate(|x| 1.0 / fejer_kernel(x, 4), 0.0, 0.1, Tolerance::relative(1e-12))
            .unwrap()
            .value
            / 0.1;
        let mean_loss = 1.0 + 6.25 / 2.0;
        let expected = eta * inv_kernel * mean_loss;
        let got = outage_integral(&cfg, PairingScheme::Rnrf, Role::Near, eta).unwrap();
        assert!((got / expected - 1.0).abs() < 1e-6, "{got} vs {expected}");
    }

    #[test]
    fn closed_forms_tighten_with_snr() {
        for scheme in PairingScheme::ALL {
            for role in Role::ALL {
                let err = |db| {
                    let cfg = at_db(db);
                    let exact = exact_outage_quadrature(&cfg, scheme, role).unwrap();
                    (closed_form_outage(&cfg, scheme, role) - exact).abs() / exact
                };
                let (e30, e40, e50) = (err(30.0), err(40.0), err(50.0));
                assert!(e40 < e30 && e50 < e40, "{scheme} {role}: {e30} {e40} {e50}");
            }
        }
    }

    #[test]
    fn deterministic_near_device_is_shared() {
        let cfg = at_db(25.0);
        let a = exact_outage_quadrature(&cfg, PairingScheme::Nnnf, Role::Near).unwrap();
        let b = exact_outage_quadrature(&cfg, PairingScheme::Nnff, Role::Near).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn oma_is_worse_per_device_at_reference_targets() {
        let cfg = at_db(30.0);
        for scheme in PairingScheme::ALL {
            for role in Role::ALL {
                let noma = exact_outage_quadrature(&cfg, scheme, role).unwrap();
                let oma = oma_outage_quadrature(&cfg, scheme, role).unwrap();
                assert!(oma > noma, "{scheme} {role}");
            }
        }
    }
}
