//! Single-path mmWave channel under one random beam.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::geometry::DevicePoint;

/// Below this `|sin(πx/2)|` the Fejér kernel takes its limit value `M`.
const KERNEL_SINGULARITY: f64 = 1e-9;

/// Beamforming vector `a(ν)` of an `M`-element uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beam {
    direction: f64,
    antennas: u32,
}

impl Beam {
    pub fn new(direction: f64, antennas: u32) -> Result<Self> {
        if antennas == 0 {
            return Err(invalid("antennas", "must be at least 1"));
        }
        if !(-1.0..=1.0).contains(&direction) {
            return Err(invalid("direction", format!("must lie in [-1, 1], got {direction}")));
        }
        Ok(Self { direction, antennas })
    }

    pub fn direction(&self) -> f64 {
        self.direction
    }

    pub fn antennas(&self) -> u32 {
        self.antennas
    }

    pub fn weights(&self) -> Vec<Complex64> {
        steering_vector(self.direction, self.antennas)
    }
}

/// Post-beamforming channel power `|hᴴp|²`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct EffectiveGain(f64);

impl EffectiveGain {
    pub fn new(value: f64) -> Self {
        debug_assert!(value >= 0.0, "effective gain must be non-negative");
        Self(value.max(0.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `a(θ)`, element `n` equal to `e^{-jπnθ} / √M`.
pub fn steering_vector(theta: f64, antennas: u32) -> Vec<Complex64> {
    let scale = 1.0 / f64::from(antennas).sqrt();
    (0..antennas)
        .map(|n| Complex64::from_polar(scale, -PI * f64::from(n) * theta))
        .collect()
}

/// Fejér kernel `F_M(x) = sin²(πMx/2) / (M sin²(πx/2))`, with value in `[0, M]`.
pub fn fejer_kernel(x: f64, antennas: u32) -> f64 {
    let m = f64::from(antennas);
    // The kernel is 2-periodic; reduce so the denominator never cancels near ±2k.
    let x = x - 2.0 * (x / 2.0).round();
    let den = (PI * x / 2.0).sin();
    if den.abs() < KERNEL_SINGULARITY {
        return m;
    }
    let num = (PI * m * x / 2.0).sin();
    (num * num / (m * den * den)).min(m)
}

/// Small-angle approximation `M (1 − π²M²x²/12)` of the Fejér kernel.
pub fn fejer_small_delta_approx(x: f64, antennas: u32) -> f64 {
    let m = f64::from(antennas);
    m * (1.0 - PI * PI * m * m * x * x / 12.0)
}

/// Distance-dependent attenuation `1 + d^α`.
pub fn path_loss(distance: f64, exponent: f64) -> f64 {
    1.0 + distance.powf(exponent)
}

/// `|hᴴp|² = |α|² F_M(ν − θ) / (1 + d^α)`.
pub fn effective_gain(point: &DevicePoint, beam: &Beam, path_loss_exponent: f64) -> EffectiveGain {
    let array = fejer_kernel(beam.direction - point.direction, beam.antennas);
    EffectiveGain::new(point.fading_power() * array / path_loss(point.distance, path_loss_exponent))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `|Σₙ e^{-jπnx}|² / M`, the summation form of the kernel.
    fn kernel_by_sum(x: f64, m: u32) -> f64 {
        let s: Complex64 = (0..m).map(|n| Complex64::from_polar(1.0, -PI * f64::from(n) * x)).sum();
        s.norm_sqr() / f64::from(m)
    }

    #[test]
    fn steering_vector_broadside() {
        let a = steering_vector(0.0, 4);
        for z in &a {
            assert!((z - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn steering_vector_endfire_two_elements() {
        let a = steering_vector(1.0, 2);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((a[0] - Complex64::new(s, 0.0)).norm() < 1e-15);
        assert!((a[1] - Complex64::new(-s, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn steering_vector_has_unit_norm() {
        for m in [1, 3, 8, 64] {
            for theta in [-1.0, -0.37, 0.0, 0.5, 0.99] {
                let n: f64 = steering_vector(theta, m).iter().map(|z| z.norm_sqr()).sum();
                assert!((n - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kernel_reference_values() {
        assert_eq!(fejer_kernel(0.0, 4), 4.0);
        assert!(fejer_kernel(0.5, 4).abs() < 1e-15);
        let oracle = kernel_by_sum(0.1, 4);
        assert!((fejer_kernel(0.1, 4) - oracle).abs() < 1e-12);
        assert!((oracle - 3.529).abs() < 5e-4, "oracle {oracle}");
    }

    #[test]
    fn kernel_is_even_and_two_periodic() {
        for m in [1, 2, 5, 16] {
            for x in [0.013, 0.2, 0.77, 1.3] {
                let f = fejer_kernel(x, m);
                assert!((fejer_kernel(-x, m) - f).abs() < 1e-12);
                assert!((fejer_kernel(x + 2.0, m) - f).abs() < 1e-9);
                assert!((fejer_kernel(x - 4.0, m) - f).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn kernel_at_period_returns_limit() {
        assert_eq!(fejer_kernel(2.0, 8), 8.0);
        assert_eq!(fejer_kernel(-2.0, 3), 3.0);
    }

    #[test]
    fn small_angle_approximation_gap() {
        assert_eq!(fejer_small_delta_approx(0.0, 4), 4.0);
        let approx = fejer_small_delta_approx(0.05, 4);
        assert!((approx - 3.868).abs() < 1e-3, "approx {approx}");
        assert!((fejer_kernel(0.05, 4) / approx - 1.0).abs() < 0.01);
        for i in 0..=100 {
            let x = 0.1 * f64::from(i) / 100.0;
            let exact = fejer_kernel(x, 4);
            let rel = (fejer_small_delta_approx(x, 4) - exact).abs() / exact;
            assert!(rel <= 0.05, "x = {x}: rel {rel}");
        }
    }

    #[test]
    fn gain_reference_values() {
        let beam = Beam::new(0.0, 4).unwrap();
        let unit = Complex64::new(1.0, 0.0);
        let at_bs = DevicePoint::new(0.0, 0.0, unit);
        assert_eq!(effective_gain(&at_bs, &beam, 2.0).value(), 4.0);
        let faded = DevicePoint::new(1.0, 0.0, Complex64::new(0.0, 0.0));
        assert_eq!(effective_gain(&faded, &beam, 2.0).value(), 0.0);
        let edge = DevicePoint::new(2.5, 0.0, unit);
        assert!((effective_gain(&edge, &beam, 2.0).value() - 4.0 / 7.25).abs() < 1e-12);
    }

    #[test]
    fn gain_matches_inner_product_form() {
        let beam = Beam::new(0.3, 6).unwrap();
        let p = beam.weights();
        for (d, theta, re, im) in [(1.2, 0.25, 0.3, -1.1), (7.5, 0.41, -0.8, 0.2)] {
            let point = DevicePoint::new(d, theta, Complex64::new(re, im));
            let a = steering_vector(theta, 6);
            let inner: Complex64 = a.iter().zip(&p).map(|(x, y)| x.conj() * y).sum();
            let expected = inner.norm_sqr() * 6.0 * point.fading_power() / (1.0 + d * d);
            let got = effective_gain(&point, &beam, 2.0).value();
            assert!((got - expected).abs() < 1e-12 * expected.max(1.0));
        }
    }

    #[test]
    fn gain_decreases_with_distance() {
        let beam = Beam::new(0.0, 4).unwrap();
        let mut last = f64::INFINITY;
        for i in 0..50 {
            let d = 0.2 * f64::from(i);
            let g = effective_gain(&DevicePoint::new(d, 0.03, Complex64::new(1.0, 0.5)), &beam, 3.0);
            assert!(g.value() < last);
            last = g.value();
        }
    }

    #[test]
    fn beam_validation() {
        assert!(Beam::new(0.0, 0).is_err());
        assert!(Beam::new(1.2, 4).is_err());
    }
}
