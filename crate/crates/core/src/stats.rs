//! Interval estimates and the few hypothesis tests the oracles need.

use crate::analytic::special::regularized_upper_gamma;

/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wald half-width `z √(p(1−p)/n) + 1/(2n)` with continuity correction.
/// Returns infinity for `n = 0`.
pub fn wald_halfwidth(p_hat: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    let n = n as f64;
    Z95 * (p_hat * (1.0 - p_hat) / n).sqrt() + 0.5 / n
}

/// Half-width of a normal interval on a sample mean.
pub fn mean_halfwidth(variance: f64, n: u64) -> f64 {
    if n < 2 {
        return f64::INFINITY;
    }
    Z95 * (variance.max(0.0) / n as f64).sqrt()
}

/// Upper tail `P(X² > x)` of a chi-square law with `dof` degrees of freedom.
pub fn chi_square_sf(x: f64, dof: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    regularized_upper_gamma(dof / 2.0, x / 2.0).unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: f64,
    pub p_value: f64,
}

/// Pearson goodness of fit of `observed` counts against `expected` counts.
/// Cells are pooled left to right until each expected count reaches 5.
pub fn chi_square_gof(observed: &[u64], expected: &[f64], fitted_parameters: usize) -> ChiSquare {
    assert_eq!(observed.len(), expected.len(), "cell count mismatch");
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&obs, &exp) in observed.iter().zip(expected) {
        o += obs as f64;
        e += exp;
        if e >= 5.0 {
            cells.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => cells.push((o, e)),
        }
    }
    let statistic: f64 = cells.iter().map(|&(o, e)| (o - e).powi(2) / e).sum();
    let dof = (cells.len() as f64 - 1.0 - fitted_parameters as f64).max(1.0);
    ChiSquare {
        statistic,
        dof,
        p_value: chi_square_sf(statistic, dof),
    }
}

/// Chi-square test that several binomial samples share one success probability.
pub fn proportions_homogeneity(successes: &[u64], trials: &[u64]) -> ChiSquare {
    assert_eq!(successes.len(), trials.len(), "group count mismatch");
    let total_s: f64 = successes.iter().map(|&s| s as f64).sum();
    let total_n: f64 = trials.iter().map(|&n| n as f64).sum();
    let pooled = total_s / total_n;
    let mut statistic = 0.0;
    if pooled > 0.0 && pooled < 1.0 {
        for (&s, &n) in successes.iter().zip(trials) {
            let n = n as f64;
            let expected = n * pooled;
            statistic += (s as f64 - expected).powi(2) / (expected * (1.0 - pooled));
        }
    }
    let dof = (successes.len() as f64 - 1.0).max(1.0);
    ChiSquare {
        statistic,
        dof,
        p_value: chi_square_sf(statistic, dof),
    }
}

/// Index-of-dispersion test for Poisson counts: `Σ(xᵢ − x̄)² / x̄ ~ χ²(n−1)`.
/// The p-value is two-sided.
pub fn poisson_dispersion(counts: &[u64]) -> ChiSquare {
    let n = counts.len() as f64;
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
    let statistic = if mean > 0.0 {
        counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / mean
    } else {
        0.0
    };
    let dof = n - 1.0;
    let upper = chi_square_sf(statistic, dof);
    ChiSquare {
        statistic,
        dof,
        p_value: (2.0 * upper.min(1.0 - upper)).min(1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halfwidth_values() {
        assert!((wald_halfwidth(0.5, 100) - (Z95 * 0.05 + 0.005)).abs() < 1e-15);
        assert_eq!(wald_halfwidth(0.0, 1000), 0.0005);
        assert!(wald_halfwidth(0.3, 0).is_infinite());
    }

    #[test]
    fn chi_square_tail_reference_points() {
        // 0.95 quantiles: 3.841 (1 dof), 5.991 (2 dof), 16.919 (9 dof).
        assert!((chi_square_sf(3.841_458_820_694_124, 1.0) - 0.05).abs() < 1e-10);
        assert!((chi_square_sf(5.991_464_547_107_979, 2.0) - 0.05).abs() < 1e-10);
        assert!((chi_square_sf(16.918_977_604_620_45, 9.0) - 0.05).abs() < 1e-9);
        assert_eq!(chi_square_sf(0.0, 3.0), 1.0);
    }

    #[test]
    fn perfect_fit_has_unit_p_value() {
        let r = chi_square_gof(&[10, 20, 30], &[10.0, 20.0, 30.0], 0);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.dof, 2.0);
    }

    #[test]
    fn sparse_cells_are_pooled() {
        let r = chi_square_gof(&[3, 1, 1, 20], &[2.0, 2.0, 2.0, 19.0], 0);
        assert_eq!(r.dof, 1.0);
    }

    #[test]
    fn homogeneity_detects_difference() {
        let same = proportions_homogeneity(&[100, 104, 98], &[1000, 1000, 1000]);
        assert!(same.p_value > 0.5);
        let differ = proportions_homogeneity(&[100, 200], &[1000, 1000]);
        assert!(differ.p_value < 1e-6);
    }

    #[test]
    fn dispersion_of_constant_counts_is_flagged() {
        let r = poisson_dispersion(&[5; 1000]);
        assert!(r.p_value < 1e-6);
    }
}
