//! Asymptotic outage expressions, one per scheme and role.

use std::f64::consts::PI;

use super::quadrature::{integrate_estimate, Tolerance};
use super::special::{lower_incomplete_gamma, scaled_gamma_window};
use super::thresholds;
use crate::montecarlo::SystemConfig;
use crate::pairing::PairingScheme;
use crate::Role;

const OMEGA_TOLERANCE: f64 = 1e-10;

/// `2 + π²M²Δ²/18`, the averaged inverse Fejér kernel scaled by `2M`.
fn fejer_factor(cfg: &SystemConfig) -> f64 {
    let m = f64::from(cfg.antennas);
    let delta = cfg.region_a.half_angle();
    2.0 + PI * PI * m * m * delta * delta / 18.0
}

fn ring(cfg: &SystemConfig) -> (f64, f64) {
    (cfg.region_b.r_min(), cfg.region_b.r_max())
}

/// `Δλ` of a region.
fn rate_of(region: &crate::SectorRegion) -> f64 {
    region.half_angle() * region.density()
}

pub fn rnrf_near_outage(cfg: &SystemConfig) -> f64 {
    rnrf_near_unclamped(cfg).clamp(0.0, 1.0)
}

pub fn rnrf_far_outage(cfg: &SystemConfig) -> f64 {
    rnrf_far_unclamped(cfg).clamp(0.0, 1.0)
}

pub fn nnnf_near_outage(cfg: &SystemConfig) -> f64 {
    nnnf_near_unclamped(cfg).clamp(0.0, 1.0)
}

pub fn nnnf_far_outage(cfg: &SystemConfig) -> f64 {
    nnnf_far_unclamped(cfg).clamp(0.0, 1.0)
}

pub fn nnff_far_outage(cfg: &SystemConfig) -> f64 {
    nnff_far_unclamped(cfg).clamp(0.0, 1.0)
}

fn rnrf_near_unclamped(cfg: &SystemConfig) -> f64 {
    let t = thresholds(cfg.snr, &cfg.power, &cfg.rates);
    if !t.feasible {
        return 1.0;
    }
    let alpha = cfg.path_loss_exponent;
    let radius = cfg.region_a.r_max();
    t.near / f64::from(cfg.antennas) * fejer_factor(cfg) * (0.5 + radius.powf(alpha) / (alpha + 2.0))
}

fn rnrf_far_unclamped(cfg: &SystemConfig) -> f64 {
    let t = thresholds(cfg.snr, &cfg.power, &cfg.rates);
    if !t.feasible {
        return 1.0;
    }
    let alpha = cfg.path_loss_exponent;
    let (rc, rb) = ring(cfg);
    let span = rb * rb - rc * rc;
    let geometry = span / 2.0 + (rb.powf(alpha + 2.0) - rc.powf(alpha + 2.0)) / (alpha + 2.0);
    t.far / (f64::from(cfg.antennas) * span) * fejer_factor(cfg) * geometry
}

fn nnnf_near_unclamped(cfg: &SystemConfig) -> f64 {
    let t = thresholds(cfg.snr, &cfg.power, &cfg.rates);
    if !t.feasible {
        return 1.0;
    }
    let alpha = cfg.path_loss_exponent;
    let delta = cfg.region_a.half_angle();
    let lambda = cfg.region_a.density();
    let c = delta * lambda;
    let radius = cfg.region_a.r_max();
    let m = f64::from(cfg.antennas);
    let hit = -(-c * radius * radius).exp_m1();
    let upsilon = lower_incomplete_gamma(alpha / 2.0 + 1.0, c * radius * radius)
        .expect("validated configuration keeps the gamma arguments in domain");
    let angular = 2.0 * delta + PI * PI * m * m * delta.powi(3) / 18.0;
    t.near * lambda / (m * hit) * angular * (hit / (2.0 * c) + c.powf(-(alpha + 2.0) / 2.0) / 2.0 * upsilon)
}

fn nnnf_far_unclamped(cfg: &SystemConfig) -> f64 {
    let t = thresholds(cfg.snr, &cfg.power, &cfg.rates);
    if !t.feasible {
        return 1.0;
    }
    let alpha = cfg.path_loss_exponent;
    let delta = cfg.region_b.half_angle();
    let lambda = cfg.region_b.density();
    let c = delta * lambda;
    let (rc, rb) = ring(cfg);
    let m = f64::from(cfg.antennas);
    let hit = -(-c * (rb * rb - rc * rc)).exp_m1();
    // e^{cR_C²}(γ(s, cR_B²) − γ(s, cR_C²)), formed without the difference.
    let window = scaled_gamma_window(alpha / 2.0 + 1.0, c * rc * rc, c * rb * rb)
        .expect("validated configuration keeps the gamma arguments in domain");
    let angular = 2.0 * delta + PI * PI * m * m * delta.powi(3) / 18.0;
    t.far * lambda / (m * hit) * angular * (hit / (2.0 * c) + c.powf(-(alpha + 2.0) / 2.0) / 2.0 * window)
}

fn nnff_far_unclamped(cfg: &SystemConfig) -> f64 {
    let t = thresholds(cfg.snr, &cfg.power, &cfg.rates);
    if !t.feasible {
        return 1.0;
    }
    let delta = cfg.region_b.half_angle();
    let lambda = cfg.region_b.density();
    let c = delta * lambda;
    let (rc, rb) = ring(cfg);
    let m = f64::from(cfg.antennas);
    let hit = -(-c * (rb * rb - rc * rc)).exp_m1();
    let angular = 2.0 * delta + PI * PI * m * m * delta.powi(3) / 18.0;
    t.far * lambda / (m * hit) * angular * (hit / (2.0 * c) + omega_scaled(cfg))
}

/// `e^{−Δλ_B R_B²} Ω`, integrated directly so large `Δλ_B R_B²` cannot overflow.
fn omega_scaled(cfg: &SystemConfig) -> f64 {
    let alpha = cfg.path_loss_exponent;
    let c = rate_of(&cfg.region_b);
    let (rc, rb) = ring(cfg);
    integrate_estimate(
        |r| r.powf(alpha + 1.0) * (-c * (rb * rb - r * r)).exp(),
        rc,
        rb,
        Tolerance::relative(OMEGA_TOLERANCE),
    )
    .value
}

/// `Ω = ∫_{R_C}^{R_B} r^{α+1} e^{Δλ_B r²} dr` by adaptive quadrature.
pub fn omega(cfg: &SystemConfig) -> crate::Result<f64> {
    let alpha = cfg.path_loss_exponent;
    let c = rate_of(&cfg.region_b);
    let (rc, rb) = ring(cfg);
    super::quadrature::integrate(
        |r| r.powf(alpha + 1.0) * (c * r * r).exp(),
        rc,
        rb,
        Tolerance::relative(OMEGA_TOLERANCE),
    )
    .map(|q| q.value)
}

/// `Ω` at `α = 2`: `[(cr² − 1) e^{cr²} / (2c²)]` between the ring radii.
pub fn omega_closed_form_alpha2(cfg: &SystemConfig) -> f64 {
    let c = rate_of(&cfg.region_b);
    let (rc, rb) = ring(cfg);
    let antiderivative = |r: f64| (c * r * r - 1.0) * (c * r * r).exp() / (2.0 * c * c);
    antiderivative(rb) - antiderivative(rc)
}

/// Closed form for `scheme` and `role`, clamped to `[0, 1]`.
pub fn closed_form_outage(cfg: &SystemConfig, scheme: PairingScheme, role: Role) -> f64 {
    closed_form_outage_unclamped(cfg, scheme, role).clamp(0.0, 1.0)
}

/// Closed form before clamping; exceeds 1 at low SNR where the expansion breaks down.
pub fn closed_form_outage_unclamped(cfg: &SystemConfig, scheme: PairingScheme, role: Role) -> f64 {
    match (scheme, role) {
        (PairingScheme::Rnrf, Role::Near) => rnrf_near_unclamped(cfg),
        (PairingScheme::Rnrf, Role::Far) => rnrf_far_unclamped(cfg),
        (PairingScheme::Nnnf | PairingScheme::Nnff, Role::Near) => nnnf_near_unclamped(cfg),
        (PairingScheme::Nnnf, Role::Far) => nnnf_far_unclamped(cfg),
        (PairingScheme::Nnff, Role::Far) => nnff_far_unclamped(cfg),
    }
}

/// Geometric factors that separate the schemes, with their narrow-sector expansions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonTerms {
    /// `R_A^α / (α+2)`, the random near device's factor.
    pub rnrf_near: f64,
    /// `L_A* = γ(α/2+1, Δλ_A R_A²) / (2 (Δλ_A)^{α/2} (1 − e^{−Δλ_A R_A²}))`.
    pub l_a_star: f64,
    /// `R_A^α/(α+2) − Δλ_A R_A^{α+2}/(α+4)`.
    pub l_a_star_expansion: f64,
    /// `(R_B² − R_C²)/2 + (R_B^{α+2} − R_C^{α+2})/(α+2)`, the random far device's factor.
    pub rnrf_far: f64,
    /// Nearest far device's factor, on the same footing as `rnrf_far`: the
    /// closed form equals `η_B (2 + π²M²Δ²/18) L / (M (R_B² − R_C²))`.
    pub l_b_star: f64,
    /// `rnrf_far − Δλ_B (R_B^{α+4} − R_C^{α+4})/(α+4)`.
    pub l_b_star_expansion: f64,
    pub l_b_prime: f64,
    /// `rnrf_far + Δλ_B (R_B^{α+4} − R_C^{α+4})/(α+4)`.
    pub l_b_prime_expansion: f64,
    /// Closed forms give near outage RNRF > NNNF = NNFF.
    pub near_chain: bool,
    /// Closed forms give far outage NNNF < RNRF < NNFF.
    pub far_chain: bool,
}

/// Evaluates the scheme comparison terms. Verdicts use the unclamped closed
/// forms, since clamping ties every scheme at 1 when the SNR is low.
pub fn comparison_terms(cfg: &SystemConfig) -> ComparisonTerms {
    let alpha = cfg.path_loss_exponent;
    let ra = cfg.region_a.r_max();
    let ca = rate_of(&cfg.region_a);
    let (rc, rb) = ring(cfg);
    let cb = rate_of(&cfg.region_b);

    let rnrf_near = ra.powf(alpha) / (alpha + 2.0);
    let upsilon = lower_incomplete_gamma(alpha / 2.0 + 1.0, ca * ra * ra)
        .expect("validated configuration keeps the gamma arguments in domain");
    let l_a_star = upsilon / (2.0 * ca.powf(alpha / 2.0) * -(-ca * ra * ra).exp_m1());
    let l_a_star_expansion = rnrf_near - ca * ra.powf(alpha + 2.0) / (alpha + 4.0);

    let rnrf_far = (rb * rb - rc * rc) / 2.0 + (rb.powf(alpha + 2.0) - rc.powf(alpha + 2.0)) / (alpha + 2.0);
    let hit = -(-cb * (rb * rb - rc * rc)).exp_m1();
    let window = scaled_gamma_window(alpha / 2.0 + 1.0, cb * rc * rc, cb * rb * rb)
        .expect("validated configuration keeps the gamma arguments in domain");
    // The ring's own normalization `Δλ_B/(1 − e^{−Δλ_B(R_B² − R_C²)})` folded in.
    let scale = cb * (rb * rb - rc * rc) / hit;
    let l_b_star = scale * (hit / (2.0 * cb) + cb.powf(-(alpha + 2.0) / 2.0) / 2.0 * window);
    let l_b_prime = scale * (hit / (2.0 * cb) + omega_scaled(cfg));
    let correction = cb * (rb.powf(alpha + 4.0) - rc.powf(alpha + 4.0)) / (alpha + 4.0);

    let p = |scheme, role| closed_form_outage_unclamped(cfg, scheme, role);
    let (rn, nn, fnear) = (
        p(PairingScheme::Rnrf, Role::Near),
        p(PairingScheme::Nnnf, Role::Near),
        p(PairingScheme::Nnff, Role::Near),
    );
    let (rf, nf, ff) = (
        p(PairingScheme::Rnrf, Role::Far),
        p(PairingScheme::Nnnf, Role::Far),
        p(PairingScheme::Nnff, Role::Far),
    );

    ComparisonTerms {
        rnrf_near,
        l_a_star,
        l_a_star_expansion,
        rnrf_far,
        l_b_star,
        l_b_star_expansion: rnrf_far - correction,
        l_b_prime,
        l_b_prime_expansion: rnrf_far + correction,
        near_chain: rn > nn && nn == fnear,
        far_chain: nf < rf && rf < ff,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn at_db(db: f64) -> SystemConfig {
        SystemConfig::default().with_snr_db(db)
    }

    #[test]
    fn rnrf_near_reference_value() {
        // (0.06/4)(2 + π²·16·0.01/18)(1/2 + 6.25/4)
        let v = rnrf_near_outage(&at_db(30.0));
        let expected = 0.06 / 4.0 * (2.0 + PI * PI * 0.16 / 18.0) * (0.5 + 6.25 / 4.0);
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 0.0646).abs() < 5e-4, "{v}");
    }

    #[test]
    fn rnrf_far_reference_value() {
        let v = rnrf_far_outage(&at_db(40.0));
        assert!((v - 0.013_52).abs() < 5e-5, "{v}");
    }

    #[test]
    fn decays_like_inverse_snr() {
        for scheme in PairingScheme::ALL {
            for role in Role::ALL {
                let a = closed_form_outage(&at_db(30.0), scheme, role);
                let b = closed_form_outage(&at_db(40.0), scheme, role);
                assert!((a / b - 10.0).abs() < 1e-9, "{scheme} {role}");
            }
        }
    }

    #[test]
    fn infeasible_split_gives_certain_outage() {
        let cfg = at_db(40.0).with_power(crate::PowerAllocation::new(0.4, 0.6).unwrap());
        for scheme in PairingScheme::ALL {
            for role in Role::ALL {
                assert_eq!(closed_form_outage(&cfg, scheme, role), 1.0);
            }
        }
    }

    #[test]
    fn clamped_at_low_snr() {
        let cfg = at_db(0.0);
        assert!(closed_form_outage_unclamped(&cfg, PairingScheme::Rnrf, Role::Near) > 1.0);
        assert_eq!(closed_form_outage(&cfg, PairingScheme::Rnrf, Role::Near), 1.0);
    }

    #[test]
    fn doubling_antennas_halves_in_the_narrow_limit() {
        let narrow = |m: u32| {
            let mut cfg = at_db(40.0);
            cfg.antennas = m;
            cfg.region_a = cfg.region_a.with_half_angle(1e-6).unwrap();
            cfg.region_b = cfg.region_b.with_half_angle(1e-6).unwrap();
            rnrf_near_outage(&cfg)
        };
        assert!((narrow(4) / narrow(8) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn sparse_near_group_reduces_to_random_pick() {
        let mut cfg = at_db(40.0);
        // μ_A = 0.1 · 6.25 · λ ≤ 10⁻³
        cfg.region_a = cfg.region_a.with_density(1.6e-3).unwrap();
        let nearest = nnnf_near_outage(&cfg);
        let random = rnrf_near_outage(&cfg);
        assert!((nearest / random - 1.0).abs() < 0.01);
        assert!(nearest < random);
    }

    #[test]
    fn omega_matches_alpha_two_closed_form() {
        let cfg = at_db(30.0);
        let q = omega(&cfg).unwrap();
        let exact = omega_closed_form_alpha2(&cfg);
        assert!((q / exact - 1.0).abs() < 1e-8, "{q} vs {exact}");
    }

    #[test]
    fn omega_sparse_limit() {
        let mut cfg = at_db(30.0);
        cfg.region_b = cfg.region_b.with_density(1e-9).unwrap();
        let expected = (1e4 - 8f64.powi(4)) / 4.0;
        assert!((omega(&cfg).unwrap() / expected - 1.0).abs() < 1e-6);
    }

    #[test]
    fn comparison_terms_at_reference() {
        let terms = comparison_terms(&at_db(30.0));
        assert!(terms.near_chain && terms.far_chain);
        // The exact factor sits below the random-pick factor.
        assert!(terms.l_a_star < terms.rnrf_near);
        assert!(terms.l_b_star < terms.rnrf_far);
        assert!(terms.l_b_prime > terms.rnrf_far);
        let gap = terms.l_b_prime_expansion - terms.l_b_star_expansion;
        let expected = 2.0 * 0.2 * (1e6 - 8f64.powi(6)) / 6.0;
        assert!((gap / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn comparison_terms_narrow_limit() {
        let mut cfg = at_db(30.0);
        cfg.region_a = cfg.region_a.with_half_angle(1e-7).unwrap();
        let terms = comparison_terms(&cfg);
        assert!((terms.l_a_star / terms.rnrf_near - 1.0).abs() < 1e-5);
        assert!((terms.l_a_star_expansion / terms.rnrf_near - 1.0).abs() < 1e-5);
    }

    #[test]
    fn chains_hold_over_snr_grid() {
        for i in 0..=8 {
            let terms = comparison_terms(&at_db(5.0 * f64::from(i)));
            assert!(terms.near_chain && terms.far_chain, "{} dB", 5 * i);
        }
    }

    proptest! {
        #[test]
        fn monotone_in_snr_and_targets(db in 0.0f64..50.0, step in 0.1f64..10.0, r1 in 0.5f64..5.0, r2 in 0.2f64..1.5, bump in 0.01f64..0.3) {
            let base = SystemConfig::default().with_rates(crate::RateTargets::new(r1, r2).unwrap());
            for scheme in PairingScheme::ALL {
                for role in Role::ALL {
                    let lo = closed_form_outage(&base.clone().with_snr_db(db), scheme, role);
                    let hi = closed_form_outage(&base.clone().with_snr_db(db + step), scheme, role);
                    prop_assert!(hi <= lo);

                    let cfg = base.clone().with_snr_db(db);
                    let near = cfg.clone().with_rates(crate::RateTargets::new(r1 + bump, r2).unwrap());
                    let far = cfg.clone().with_rates(crate::RateTargets::new(r1, r2 + bump).unwrap());
                    prop_assert!(closed_form_outage(&near, scheme, role) >= closed_form_outage(&cfg, scheme, role));
                    prop_assert!(closed_form_outage(&far, scheme, role) >= closed_form_outage(&cfg, scheme, role));
                }
            }
        }
    }
}
