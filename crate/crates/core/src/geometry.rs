//! Device deployments over sector regions.
//!
//! A [`SectorRegion`] is the set of points at distance `r_min..=r_max` from
//! the base station whose normalized direction lies within `half_angle` of
//! the beam direction. With `r_min = 0` it is the wedge holding the near
//! group; with `r_min > 0` it is the ring holding the far group. Directions
//! use the normalized convention of the array steering vector, so the area
//! element is `r dr dθ` and a region's measure is `Δ (r_max² − r_min²)`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{invalid, Error, Result};

/// Draw cap used by [`sample_deployment_nonempty`] when none is configured.
pub const DEFAULT_RETRY_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorRegion {
    half_angle: f64,
    r_min: f64,
    r_max: f64,
    density: f64,
    center: f64,
}

impl SectorRegion {
    pub fn new(half_angle: f64, r_min: f64, r_max: f64, density: f64, center: f64) -> Result<Self> {
        if !(half_angle > 0.0 && half_angle.is_finite()) {
            return Err(invalid("half_angle", format!("must be positive, got {half_angle}")));
        }
        if !(r_min >= 0.0 && r_min.is_finite()) {
            return Err(invalid("r_min", format!("must be non-negative, got {r_min}")));
        }
        if !(r_max > r_min && r_max.is_finite()) {
            return Err(invalid("r_max", format!("must exceed r_min = {r_min}, got {r_max}")));
        }
        if !(density > 0.0 && density.is_finite()) {
            return Err(invalid("density", format!("must be positive, got {density}")));
        }
        if !(-1.0..=1.0).contains(&center) {
            return Err(invalid("center", format!("must lie in [-1, 1], got {center}")));
        }
        Ok(Self {
            half_angle,
            r_min,
            r_max,
            density,
            center,
        })
    }

    /// Wedge sector `0 ≤ r ≤ radius`.
    pub fn wedge(half_angle: f64, radius: f64, density: f64) -> Result<Self> {
        Self::new(half_angle, 0.0, radius, density, 0.0)
    }

    /// Sector ring `inner ≤ r ≤ outer`.
    pub fn ring(half_angle: f64, inner: f64, outer: f64, density: f64) -> Result<Self> {
        Self::new(half_angle, inner, outer, density, 0.0)
    }

    pub fn half_angle(&self) -> f64 {
        self.half_angle
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn with_half_angle(self, half_angle: f64) -> Result<Self> {
        Self::new(half_angle, self.r_min, self.r_max, self.density, self.center)
    }

    pub fn with_density(self, density: f64) -> Result<Self> {
        Self::new(self.half_angle, self.r_min, self.r_max, density, self.center)
    }

    pub fn with_radii(self, r_min: f64, r_max: f64) -> Result<Self> {
        Self::new(self.half_angle, r_min, r_max, self.density, self.center)
    }

    /// Same region re-centered on another beam direction. The center is not
    /// range-checked here: only differences of directions matter and the
    /// array response is 2-periodic.
    pub fn recentered(self, center: f64) -> Self {
        Self { center, ..self }
    }

    /// Region measure `Δ (r_max² − r_min²)`.
    pub fn area(&self) -> f64 {
        self.half_angle * (self.r_max * self.r_max - self.r_min * self.r_min)
    }

    /// Mean device count `μ = λ Δ (r_max² − r_min²)`.
    pub fn mean_count(&self) -> f64 {
        self.density * self.area()
    }

    /// CDF of the distance of one area-uniform point.
    pub fn radial_cdf(&self, r: f64) -> f64 {
        let lo = self.r_min * self.r_min;
        let span = self.r_max * self.r_max - lo;
        ((r * r - lo) / span).clamp(0.0, 1.0)
    }

    pub fn contains(&self, point: &DevicePoint) -> bool {
        (self.r_min..=self.r_max).contains(&point.distance) && (point.direction - self.center).abs() <= self.half_angle
    }

    /// One point uniform over the region area, with a fresh fading gain.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> DevicePoint {
        let lo = self.r_min * self.r_min;
        let span = self.r_max * self.r_max - lo;
        let u: f64 = rng.random();
        let distance = (lo + u * span).sqrt().clamp(self.r_min, self.r_max);
        let v: f64 = rng.random();
        let direction = (self.center + self.half_angle * (2.0 * v - 1.0))
            .clamp(self.center - self.half_angle, self.center + self.half_angle);
        DevicePoint {
            distance,
            direction,
            gain: sample_fading(rng),
        }
    }
}

/// A deployed device: polar position and small-scale fading coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DevicePoint {
    pub distance: f64,
    pub direction: f64,
    pub gain: Complex64,
}

impl DevicePoint {
    pub fn new(distance: f64, direction: f64, gain: Complex64) -> Self {
        Self {
            distance,
            direction,
            gain,
        }
    }

    /// `|α|²`.
    pub fn fading_power(&self) -> f64 {
        self.gain.norm_sqr()
    }
}

/// Circularly-symmetric complex Gaussian with unit variance.
pub fn sample_fading<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// One HPPP realization over `region`. An empty deployment is a valid outcome.
pub fn sample_deployment<R: Rng + ?Sized>(region: &SectorRegion, rng: &mut R) -> Vec<DevicePoint> {
    let n = sample_count(region, rng);
    (0..n).map(|_| region.sample_point(rng)).collect()
}

/// HPPP realization conditioned on holding at least one device, by rejection.
pub fn sample_deployment_nonempty<R: Rng + ?Sized>(
    region: &SectorRegion,
    rng: &mut R,
    retry_cap: u64,
) -> Result<Vec<DevicePoint>> {
    for _ in 0..retry_cap {
        let n = sample_count(region, rng);
        if n > 0 {
            return Ok((0..n).map(|_| region.sample_point(rng)).collect());
        }
    }
    Err(Error::RetryCapExceeded {
        attempts: retry_cap,
        mean_count: region.mean_count(),
    })
}

fn sample_count<R: Rng + ?Sized>(region: &SectorRegion, rng: &mut R) -> usize {
    let mu = region.mean_count();
    match Poisson::new(mu) {
        Ok(poisson) => {
            let n: f64 = poisson.sample(rng);
            n as usize
        }
        // Only reachable when the mean underflows to zero.
        Err(_) => 0,
    }
}

/// Density of one area-uniform point, per unit area: `1 / (Δ (r_max² − r_min²))`.
pub fn pdf_uniform_point(region: &SectorRegion) -> f64 {
    1.0 / region.area()
}

/// Density of the distance to the nearest device, given at least one device.
pub fn pdf_nearest_distance(region: &SectorRegion, r: f64) -> f64 {
    if r < region.r_min || r > region.r_max {
        return 0.0;
    }
    let c = region.half_angle * region.density;
    let norm = -(-region.mean_count()).exp_m1();
    2.0 * c * r * (-c * (r * r - region.r_min * region.r_min)).exp() / norm
}

/// Density of the distance to the farthest device, given at least one device.
pub fn pdf_farthest_distance(region: &SectorRegion, r: f64) -> f64 {
    if r < region.r_min || r > region.r_max {
        return 0.0;
    }
    let c = region.half_angle * region.density;
    let norm = -(-region.mean_count()).exp_m1();
    2.0 * c * r * (-c * (region.r_max * region.r_max - r * r)).exp() / norm
}

/// Radial marginal of one area-uniform point: `2r / (r_max² − r_min²)`.
pub fn pdf_uniform_distance(region: &SectorRegion, r: f64) -> f64 {
    if r < region.r_min || r > region.r_max {
        return 0.0;
    }
    2.0 * region.half_angle * r * pdf_uniform_point(region)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn wedge() -> SectorRegion {
        SectorRegion::wedge(0.1, 2.5, 6.0).unwrap()
    }

    fn ring() -> SectorRegion {
        SectorRegion::ring(0.1, 8.0, 10.0, 2.0).unwrap()
    }

    #[test]
    fn rejects_invalid_regions() {
        assert!(SectorRegion::new(0.0, 0.0, 1.0, 1.0, 0.0).is_err());
        assert!(SectorRegion::new(0.1, 2.0, 1.0, 1.0, 0.0).is_err());
        assert!(SectorRegion::new(0.1, 0.0, 1.0, -1.0, 0.0).is_err());
        assert!(SectorRegion::new(0.1, 0.0, 1.0, 1.0, 1.5).is_err());
        assert!(SectorRegion::new(0.1, -0.5, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn mean_count_of_reference_wedge() {
        assert!((wedge().mean_count() - 3.75).abs() < 1e-12);
        assert!((ring().mean_count() - 7.2).abs() < 1e-12);
    }

    #[test]
    fn uniform_point_density_values() {
        assert!((pdf_uniform_point(&wedge()) - 1.6).abs() < 1e-12);
        let r = SectorRegion::ring(0.1, 8.0, 10.0, 1.0).unwrap();
        assert!((pdf_uniform_point(&r) - 1.0 / 3.6).abs() < 1e-12);
    }

    #[test]
    fn radial_cdf_endpoints() {
        let r = ring();
        assert_eq!(r.radial_cdf(10.0), 1.0);
        assert_eq!(r.radial_cdf(8.0), 0.0);
        assert_eq!(r.radial_cdf(100.0), 1.0);
    }

    #[test]
    fn empirical_mean_count_matches_measure() {
        let region = wedge();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 200_000;
        let total: usize = (0..n).map(|_| sample_deployment(&region, &mut rng).len()).sum();
        let mean = total as f64 / n as f64;
        // Poisson variance equals the mean.
        let se = (3.75f64 / n as f64).sqrt();
        assert!((mean - 3.75).abs() < 4.0 * se, "mean {mean}");
    }

    #[test]
    fn vanishing_density_gives_empty_deployments() {
        let region = SectorRegion::wedge(0.1, 2.5, 1e-12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            assert!(sample_deployment(&region, &mut rng).is_empty());
        }
    }

    #[test]
    fn nonempty_sampling_hits_retry_cap() {
        let region = SectorRegion::wedge(0.1, 2.5, 1e-12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let err = sample_deployment_nonempty(&region, &mut rng, 100).unwrap_err();
        assert!(matches!(err, Error::RetryCapExceeded { attempts: 100, .. }));
    }

    #[test]
    fn nonempty_sampling_matches_conditional_mean() {
        let region = wedge();
        let mu = region.mean_count();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 200_000;
        let mut total = 0usize;
        for _ in 0..n {
            let d = sample_deployment_nonempty(&region, &mut rng, DEFAULT_RETRY_CAP).unwrap();
            assert!(!d.is_empty());
            total += d.len();
        }
        let mean = total as f64 / n as f64;
        let p0 = (-mu).exp();
        let expected = mu / (1.0 - p0);
        // Var of zero-truncated Poisson: m (1 + μ − m).
        let var = expected * (1.0 + mu - expected);
        let se = (var / n as f64).sqrt();
        assert!((mean - expected).abs() < 4.0 * se, "mean {mean} vs {expected}");
    }

    #[test]
    fn points_stay_inside_region() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for region in [wedge(), ring(), ring().recentered(0.95)] {
            for _ in 0..20_000 {
                let p = region.sample_point(&mut rng);
                assert!(region.contains(&p), "{p:?} outside {region:?}");
            }
        }
    }

    #[test]
    fn fading_power_has_unit_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 400_000;
        let sum: f64 = (0..n).map(|_| sample_fading(&mut rng).norm_sqr()).sum();
        let mean = sum / n as f64;
        // |α|² ~ Exp(1): standard deviation 1.
        assert!((mean - 1.0).abs() < 3.0 / (n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn order_statistic_pdfs_vanish_off_support() {
        let r = ring();
        assert_eq!(pdf_nearest_distance(&r, 7.9), 0.0);
        assert_eq!(pdf_farthest_distance(&r, 10.1), 0.0);
        assert_eq!(pdf_uniform_distance(&r, 0.0), 0.0);
    }

    #[test]
    fn sparse_limit_reduces_to_uniform_radial_law() {
        let r = SectorRegion::ring(0.1, 8.0, 10.0, 1e-9).unwrap();
        for x in [8.0, 8.7, 9.3, 10.0] {
            let uniform = 2.0 * x / 36.0;
            assert!((pdf_nearest_distance(&r, x) / uniform - 1.0).abs() < 1e-6);
            assert!((pdf_farthest_distance(&r, x) / uniform - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn nearest_and_farthest_are_mirror_forms() {
        // Both are 2cr·exp(..)/norm with the exponent anchored at opposite edges.
        let reg = ring();
        let c = reg.half_angle() * reg.density();
        for x in [8.1, 8.9, 9.6] {
            let near = pdf_nearest_distance(&reg, x) * (c * (x * x - 64.0)).exp();
            let far = pdf_farthest_distance(&reg, x) * (c * (100.0 - x * x)).exp();
            assert!((near - far).abs() < 1e-12 * near);
        }
    }
}
