//! Oracle suite behind `mmnoma validate` and the `acceptance` test target.
//!
//! Every check prints one verdict line. Tolerances are pinned as constants.

use std::fmt;

use mmnoma::analytic::quadrature::{integrate, Tolerance};
use mmnoma::analytic::special::lower_incomplete_gamma;
use mmnoma::analytic::{
    closed_form_outage, closed_form_outage_unclamped, exact_outage_quadrature, oma_outage_quadrature,
};
use mmnoma::channel::fejer_kernel;
use mmnoma::geometry::{
    pdf_farthest_distance, pdf_nearest_distance, pdf_uniform_distance, pdf_uniform_point, sample_deployment_nonempty,
    SectorRegion, DEFAULT_RETRY_CAP,
};
use mmnoma::montecarlo::trial_rng;
use mmnoma::stats::{chi_square_gof, proportions_homogeneity};
use mmnoma::{Engine, Estimate, OutageEstimate, PairingScheme, Role, SystemConfig};
use num_complex::Complex64;

use crate::config::{default_snr_grid, parse_config};
use crate::experiment::{csv_bytes, run_experiment};

pub const GAMMA_RELATIVE_TOLERANCE: f64 = 1e-10;
pub const KERNEL_ABSOLUTE_TOLERANCE: f64 = 1e-12;
pub const KERNEL_GRID_POINTS: usize = 10_000;
pub const MC_CI_MULTIPLE: f64 = 2.0;
pub const CLOSED_FORM_TOLERANCE_30DB: f64 = 0.10;
pub const CLOSED_FORM_TOLERANCE_40DB: f64 = 0.05;
/// Grid points at or above this SNR must separate beyond the intervals.
pub const STRICT_FROM_DB: f64 = 20.0;
pub const GAP_OUTAGE_LEVEL: f64 = 1e-2;
pub const GAP_TARGET_DB: f64 = 3.0;
pub const GAP_TOLERANCE_DB: f64 = 1.0;
pub const RATE_SLACK: f64 = 1e-12;
pub const FLATNESS_P_MIN: f64 = 0.01;
pub const PDF_MASS_TOLERANCE: f64 = 1e-8;
pub const GOF_BINS: usize = 20;
pub const GOF_P_MIN: f64 = 0.01;
pub const DETERMINISM_THREADS: (usize, usize) = (1, 3);

/// Figure presets shipped with the crate, by file name.
pub const PRESETS: [(&str, &str); 14] = [
    ("fig2.toml", include_str!("../../../presets/fig2.toml")),
    ("fig3_alpha2.toml", include_str!("../../../presets/fig3_alpha2.toml")),
    ("fig3_alpha3.toml", include_str!("../../../presets/fig3_alpha3.toml")),
    ("fig4_alpha2.toml", include_str!("../../../presets/fig4_alpha2.toml")),
    ("fig4_alpha3.toml", include_str!("../../../presets/fig4_alpha3.toml")),
    ("fig5a.toml", include_str!("../../../presets/fig5a.toml")),
    ("fig5b_alpha2.toml", include_str!("../../../presets/fig5b_alpha2.toml")),
    ("fig5b_alpha3.toml", include_str!("../../../presets/fig5b_alpha3.toml")),
    ("fig6.toml", include_str!("../../../presets/fig6.toml")),
    ("fig7_ra2_0.toml", include_str!("../../../presets/fig7_ra2_0.toml")),
    ("fig7_ra2_5.toml", include_str!("../../../presets/fig7_ra2_5.toml")),
    ("fig7_ra3_0.toml", include_str!("../../../presets/fig7_ra3_0.toml")),
    (
        "fig8_ring8_10.toml",
        include_str!("../../../presets/fig8_ring8_10.toml"),
    ),
    (
        "fig8_ring12_14.toml",
        include_str!("../../../presets/fig8_ring12_14.toml"),
    ),
];

/// Sample sizes and seeds for one validation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub mc_trials: u64,
    pub gof_samples: usize,
    /// Trials per preset point in the determinism check.
    pub determinism_trials: u64,
    /// Worker threads for Monte Carlo; 0 means one per core.
    pub threads: usize,
    pub seed: u64,
}

impl Budget {
    pub fn full() -> Self {
        Self {
            mc_trials: 1_000_000,
            gof_samples: 100_000,
            determinism_trials: 20_000,
            threads: 0,
            seed: 20_240_601,
        }
    }

    /// A smoke run. Statistical checks lose power and may fail.
    pub fn quick() -> Self {
        Self {
            mc_trials: 100_000,
            gof_samples: 20_000,
            determinism_trials: 5_000,
            ..Self::full()
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Self::full()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub details: Vec<String>,
}

impl CriterionReport {
    fn new(id: u8, title: &'static str) -> Self {
        Self {
            id,
            title,
            passed: true,
            details: Vec::new(),
        }
    }

    fn note(&mut self, line: impl Into<String>) {
        self.details.push(line.into());
    }

    fn require(&mut self, ok: bool, line: impl Into<String>) {
        if !ok {
            self.passed = false;
            self.details.push(format!("violated: {}", line.into()));
        }
    }

    fn fail(mut self, line: impl Into<String>) -> Self {
        self.passed = false;
        self.details.push(format!("error: {}", line.into()));
        self
    }

    pub fn verdict_line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        format!("criterion {} {}: {verdict}", self.id, self.title)
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.verdict_line())?;
        for d in &self.details {
            writeln!(f, "    {d}")?;
        }
        Ok(())
    }
}

pub fn run_all(budget: &Budget) -> Vec<CriterionReport> {
    vec![
        special_functions(),
        kernel_equivalence(),
        oracle_triangle(budget),
        ordering_chains(budget),
        path_loss_and_gap(budget),
        sum_rate_ordering(budget),
        density_and_radius(budget),
        geometry_soundness(budget),
        determinism(budget),
    ]
}

pub fn run_one(id: u8, budget: &Budget) -> Option<CriterionReport> {
    Some(match id {
        1 => special_functions(),
        2 => kernel_equivalence(),
        3 => oracle_triangle(budget),
        4 => ordering_chains(budget),
        5 => path_loss_and_gap(budget),
        6 => sum_rate_ordering(budget),
        7 => density_and_radius(budget),
        8 => geometry_soundness(budget),
        9 => determinism(budget),
        _ => return None,
    })
}

fn relative_error(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

/// `γ(2, x)`, with its series where `1 − (1 + x)e^{−x}` cancels.
fn gamma_2_closed(x: f64) -> f64 {
    if x < 1e-3 {
        // x²/2 − x³/3 + x⁴/8 − x⁵/30
        x * x * (0.5 - x * (1.0 / 3.0 - x * (0.125 - x / 30.0)))
    } else {
        -(-x).exp_m1() - x * (-x).exp()
    }
}

pub fn special_functions() -> CriterionReport {
    let mut report = CriterionReport::new(1, "lower incomplete gamma");
    let orders: Vec<f64> = (1..=8).map(|k| 0.5 * f64::from(k)).collect();
    let mut xs: Vec<f64> = vec![0.0, 1e-6, 1e-4, 1e-2, 0.1];
    xs.extend((1..=100).map(|k| 0.5 * f64::from(k)));

    let (mut worst_closed, mut worst_quad) = (0.0f64, 0.0f64);
    for &s in &orders {
        for &x in &xs {
            let got = match lower_incomplete_gamma(s, x) {
                Ok(v) => v,
                Err(e) => return report.fail(format!("gamma({s}, {x}): {e}")),
            };
            if x == 0.0 {
                report.require(got == 0.0, format!("gamma({s}, 0) = {got}"));
                continue;
            }
            let closed = match s {
                1.0 => Some(-(-x).exp_m1()),
                2.0 => Some(gamma_2_closed(x)),
                _ => None,
            };
            if let Some(want) = closed {
                let err = relative_error(got, want);
                worst_closed = worst_closed.max(err);
                report.require(
                    err <= GAMMA_RELATIVE_TOLERANCE,
                    format!("s={s} x={x}: closed form off by {err:.2e}"),
                );
            }
            let quad = integrate(|t| t.powf(s - 1.0) * (-t).exp(), 0.0, x, Tolerance::relative(1e-13));
            match quad {
                Ok(q) => {
                    let err = relative_error(got, q.value);
                    worst_quad = worst_quad.max(err);
                    report.require(
                        err <= GAMMA_RELATIVE_TOLERANCE,
                        format!("s={s} x={x}: quadrature off by {err:.2e}"),
                    );
                }
                Err(e) => return report.fail(format!("quadrature oracle at s={s} x={x}: {e}")),
            }
        }
    }
    report.note(format!(
        "{} points; worst relative error {worst_closed:.2e} vs closed forms, {worst_quad:.2e} vs quadrature",
        orders.len() * xs.len()
    ));
    report
}

fn kernel_by_sum(x: f64, m: u32) -> f64 {
    let s: Complex64 = (0..m)
        .map(|n| Complex64::from_polar(1.0, -std::f64::consts::PI * f64::from(n) * x))
        .sum();
    s.norm_sqr() / f64::from(m)
}

pub fn kernel_equivalence() -> CriterionReport {
    let mut report = CriterionReport::new(2, "Fejer kernel equivalence");
    let mut worst = 0.0f64;
    for m in [1u32, 2, 4, 8, 16] {
        report.require(
            fejer_kernel(0.0, m) == f64::from(m),
            format!("F_{m}(0) = {}", fejer_kernel(0.0, m)),
        );
        for i in 0..KERNEL_GRID_POINTS {
            let x = -1.0 + 2.0 * i as f64 / (KERNEL_GRID_POINTS - 1) as f64;
            let err = (fejer_kernel(x, m) - kernel_by_sum(x, m)).abs();
            worst = worst.max(err);
            report.require(
                err <= KERNEL_ABSOLUTE_TOLERANCE,
                format!("M={m} x={x}: differs by {err:.2e}"),
            );
        }
    }
    report.note(format!(
        "{KERNEL_GRID_POINTS}-point grid on [-1, 1], worst absolute difference {worst:.2e}"
    ));
    report
}

fn role_estimate(est: &Estimate, role: Role) -> OutageEstimate {
    match role {
        Role::Near => est.near,
        Role::Far => est.far,
    }
}

fn engine(budget: &Budget) -> mmnoma::Result<Engine> {
    Engine::new(budget.threads)
}

pub fn oracle_triangle(budget: &Budget) -> CriterionReport {
    let mut report = CriterionReport::new(3, "oracle triangle");
    let engine = match engine(budget) {
        Ok(e) => e,
        Err(e) => return report.fail(e.to_string()),
    };
    for (db, cf_tol) in [(30.0, CLOSED_FORM_TOLERANCE_30DB), (40.0, CLOSED_FORM_TOLERANCE_40DB)] {
        for scheme in PairingScheme::ALL {
            let cfg = SystemConfig::default().with_snr_db(db).with_scheme(scheme);
            let est = match engine.estimate(&cfg, budget.mc_trials, budget.seed) {
                Ok(e) => e,
                Err(e) => return report.fail(e.to_string()),
            };
            for role in Role::ALL {
                let quad = match exact_outage_quadrature(&cfg, scheme, role) {
                    Ok(q) => q,
                    Err(e) => return report.fail(e.to_string()),
                };
                let mc = role_estimate(&est, role);
                let cf = closed_form_outage(&cfg, scheme, role);
                let mc_dev = (mc.p_hat - quad).abs() / mc.ci_halfwidth;
                let cf_err = relative_error(cf, quad);
                report.note(format!(
                    "{db} dB {scheme} {role}: quad {quad:.5}, mc {:.5} ({mc_dev:.2} CI), cf {cf:.5} ({:.2}%)",
                    mc.p_hat,
                    100.0 * cf_err
                ));
                report.require(
                    mc_dev <= MC_CI_MULTIPLE,
                    format!("{db} dB {scheme} {role}: mc beyond {MC_CI_MULTIPLE} CI"),
                );
                report.require(
                    cf_err <= cf_tol,
                    format!("{db} dB {scheme} {role}: closed form beyond {cf_tol}"),
                );
            }
        }
    }
    report
}

/// `a` below `b` with no significant reversal, and beyond both intervals when `strict`.
fn below(a: &OutageEstimate, b: &OutageEstimate, strict: bool) -> bool {
    let slack = a.ci_halfwidth + b.ci_halfwidth;
    if strict {
        b.p_hat - a.p_hat > slack
    } else {
        b.p_hat - a.p_hat >= -slack
    }
}

fn estimates_by_scheme(engine: &Engine, base: &SystemConfig, budget: &Budget) -> mmnoma::Result<Vec<Estimate>> {
    PairingScheme::ALL
        .iter()
        .map(|&s| engine.estimate(&base.clone().with_scheme(s), budget.mc_trials, budget.seed))
        .collect()
}

pub fn ordering_chains(budget: &Budget) -> CriterionReport {
    let mut report = CriterionReport::new(4, "ordering chains");
    let engine = match engine(budget) {
        Ok(e) => e,
        Err(e) => return report.fail(e.to_string()),
    };
    let [rnrf, nnnf, nnff] = PairingScheme::ALL;
    for db in default_snr_grid() {
        let cfg = SystemConfig::default().with_snr_db(db);
        let cf = |s, r| closed_form_outage_unclamped(&cfg, s, r);
        let near = [cf(rnrf, Role::Near), cf(nnnf, Role::Near), cf(nnff, Role::Near)];
        let far = [cf(rnrf, Role::Far), cf(nnnf, Role::Far), cf(nnff, Role::Far)];
        report.require(
            near[0] > near[1] && near[1] == near[2],
            format!("{db} dB closed-form near chain {near:?}"),
        );
        report.require(
            far[1] < far[0] && far[0] < far[2],
            format!("{db} dB closed-form far chain {far:?}"),
        );

        let est = match estimates_by_scheme(&engine, &cfg, budget) {
            Ok(e) => e,
            Err(e) => return report.fail(e.to_string()),
        };
        let strict = db >= STRICT_FROM_DB;
        let (r, n, f) = (&est[0], &est[1], &est[2]);
        report.require(below(&n.near, &r.near, strict), format!("{db} dB mc near RNRF > NNNF"));
        report.require(n.near.p_hat == f.near.p_hat, format!("{db} dB mc near NNNF = NNFF"));
        report.require(below(&n.far, &r.far, strict), format!("{db} dB mc far NNNF < RNRF"));
        report.require(below(&r.far, &f.far, strict), format!("{db} dB mc far RNRF < NNFF"));
        report.note(format!(
            "{db} dB mc near {:.4}/{:.4}/{:.4} far {:.4}/{:.4}/{:.4} (RNRF/NNNF/NNFF)",
            r.near.p_hat, n.near.p_hat, f.near.p_hat, r.far.p_hat, n.far.p_hat, f.far.p_hat
        ));
    }
    report.note(format!(
        "strict separation required from {STRICT_FROM_DB} dB, no reversal below"
    ));
    report
}

/// SNR in dB where `outage(db)` falls to `level`, by bisection on `[lo, hi]`.
fn snr_at_outage(mut outage: impl FnMut(f64) -> mmnoma::Result<f64>, level: f64) -> mmnoma::Result<f64> {
    let (mut lo, mut hi) = (0.0, 80.0);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if outage(mid)? > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn path_loss_and_gap(budget: &Budget) -> CriterionReport {
    let mut report = CriterionReport::new(5, "path loss exponent and SNR gap");
    let engine = match engine(budget) {
        Ok(e) => e,
        Err(e) => return report.fail(e.to_string()),
    };
    let grid: Vec<f64> = default_snr_grid()
        .into_iter()
        .filter(|&db| db >= STRICT_FROM_DB)
        .collect();
    for &db in &grid {
        let cfg2 = SystemConfig::default().with_snr_db(db);
        let cfg3 = cfg2.clone().with_path_loss_exponent(3.0);
        let (e2, e3) = match (
            estimates_by_scheme(&engine, &cfg2, budget),
            estimates_by_scheme(&engine, &cfg3, budget),
        ) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return report.fail(e.to_string()),
        };
        for (k, scheme) in PairingScheme::ALL.into_iter().enumerate() {
            for role in Role::ALL {
                let (q2, q3) = match (
                    exact_outage_quadrature(&cfg2, scheme, role),
                    exact_outage_quadrature(&cfg3, scheme, role),
                ) {
                    (Ok(a), Ok(b)) => (a, b),
                    (Err(e), _) | (_, Err(e)) => return report.fail(e.to_string()),
                };
                report.require(
                    q3 > q2,
                    format!("{db} dB {scheme} {role}: quadrature alpha 3 {q3} <= alpha 2 {q2}"),
                );
                let (m2, m3) = (role_estimate(&e2[k], role), role_estimate(&e3[k], role));
                report.require(
                    below(&m2, &m3, true),
                    format!("{db} dB {scheme} {role}: mc alpha 3 not above alpha 2"),
                );
            }
        }
    }
    for alpha in [2.0, 3.0] {
        let base = SystemConfig::default().with_path_loss_exponent(alpha);
        let at = |scheme: PairingScheme| {
            let base = base.clone();
            snr_at_outage(
                move |db| exact_outage_quadrature(&base.clone().with_snr_db(db), scheme, Role::Near),
                GAP_OUTAGE_LEVEL,
            )
        };
        match (at(PairingScheme::Rnrf), at(PairingScheme::Nnnf)) {
            (Ok(r), Ok(n)) => {
                let gap = r - n;
                report.note(format!(
                    "alpha {alpha}: near outage {GAP_OUTAGE_LEVEL} at {r:.2} dB (RNRF), {n:.2} dB (NNNF), gap {gap:.2} dB"
                ));
                report.require(
                    (gap - GAP_TARGET_DB).abs() <= GAP_TOLERANCE_DB,
                    format!("alpha {alpha}: gap {gap:.2} dB outside {GAP_TARGET_DB} +- {GAP_TOLERANCE_DB}"),
                );
            }
            (Err(e), _) | (_, Err(e)) => return report.fail(e.to_string()),
        }
    }
    report
}

pub fn sum_rate_ordering(budget: &Budget) -> CriterionReport {
    let mut report = CriterionReport::new(6, "outage sum rate ordering");
    let engine = match engine(budget) {
        Ok(e) => e,
        Err(e) => return report.fail(e.to_string()),
    };
    for db in default_snr_grid() {
        let cfg = SystemConfig::default().with_snr_db(db);
        let rates = cfg.rates;
        let sum = |n: f64, f: f64| rates.near() * (1.0 - n) + rates.far() * (1.0 - f);
        let mut noma = [0.0; 3];
        for (k, scheme) in PairingScheme::ALL.into_iter().enumerate() {
            let outages = (
                exact_outage_quadrature(&cfg, scheme, Role::Near),
                exact_outage_quadrature(&cfg, scheme, Role::Far),
                oma_outage_quadrature(&cfg, scheme, Role::Near),
                oma_outage_quadrature(&cfg, scheme, Role::Far),
            );
            let (n, f, on, of) = match outages {
                (Ok(a), Ok(b), Ok(c), Ok(d)) => (a, b, c, d),
                (Err(e), ..) | (_, Err(e), ..) | (_, _, Err(e), _) | (.., Err(e)) => return report.fail(e.to_string()),
            };
            noma[k] = sum(n, f);
            let oma = sum(on, of);
            report.require(
                noma[k] >= oma - RATE_SLACK,
                format!("{db} dB {scheme}: quadrature NOMA {} < OMA {oma}", noma[k]),
            );
        }
        let [r, n, f] = noma;
        report.require(
            n >= f - RATE_SLACK && f >= r - RATE_SLACK,
            format!("{db} dB quadrature order {noma:?}"),
        );
        if n > RATE_SLACK {
            report.require(n > r, format!("{db} dB quadrature NNNF not above RNRF {noma:?}"));
        }

        let est = match estimates_by_scheme(&engine, &cfg, budget) {
            Ok(e) => e,
            Err(e) => return report.fail(e.to_string()),
        };
        for (k, scheme) in PairingScheme::ALL.into_iter().enumerate() {
            let (a, b) = (&est[k].noma_rate, &est[k].oma_rate);
            report.require(
                a.mean - b.mean >= -(a.ci_halfwidth + b.ci_halfwidth),
                format!("{db} dB {scheme}: mc NOMA {} below OMA {}", a.mean, b.mean),
            );
        }
        let rate = |k: usize| &est[k].noma_rate;
        let not_below =
            |hi: usize, lo: usize| rate(hi).mean - rate(lo).mean >= -(rate(hi).ci_halfwidth + rate(lo).ci_halfwidth);
        report.require(
            not_below(1, 2) && not_below(2, 0),
            format!("{db} dB mc scheme order reversed"),
        );
        report.note(format!(
            "{db} dB quadrature NOMA sum rate {r:.4}/{n:.4}/{f:.4} (RNRF/NNNF/NNFF)"
        ));
    }
    report
}

/// The near-density scenario: 20 dB, targets 2.5 and 1 BPCU, far ring 12..14.
pub fn density_scenario(radius_a: f64, density_a: f64) -> mmnoma::Result<SystemConfig> {
    let mut cfg = SystemConfig::default()
        .with_snr_db(20.0)
        .with_rates(mmnoma::RateTargets::new(2.5, 1.0)?);
    cfg.region_a = cfg.region_a.with_radii(0.0, radius_a)?.with_density(density_a)?;
    cfg.region_b = cfg.region_b.with_radii(12.0, 14.0)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn density_and_radius(budget: &Budget) -> CriterionReport {
    let mut report = CriterionReport::new(7, "near density and radius");
    let engine = match engine(budget) {
        Ok(e) => e,
        Err(e) => return report.fail(e.to_string()),
    };
    let radii = [2.0, 2.5, 3.0];
    let densities: Vec<f64> = (1..=10).map(f64::from).collect();
    // near[radius][scheme][density], schemes RNRF then NNNF
    let mut near = vec![vec![Vec::new(); 2]; radii.len()];
    for (i, &ra) in radii.iter().enumerate() {
        for (j, scheme) in [PairingScheme::Rnrf, PairingScheme::Nnnf].into_iter().enumerate() {
            for (k, &lambda) in densities.iter().enumerate() {
                let est = density_scenario(ra, lambda).and_then(|cfg| {
                    engine.estimate(&cfg.with_scheme(scheme), budget.mc_trials, budget.seed + k as u64)
                });
                match est {
                    Ok(e) => near[i][j].push(e.near),
                    Err(e) => return report.fail(e.to_string()),
                }
            }
        }
    }
    for (i, &ra) in radii.iter().enumerate() {
        let nnnf = &near[i][1];
        for k in 1..nnnf.len() {
            report.require(
                below(&nnnf[k], &nnnf[k - 1], true),
                format!(
                    "radius {ra}: NNNF near outage not decreasing from density {} to {}",
                    k,
                    k + 1
                ),
            );
        }
        let rnrf = &near[i][0];
        let outages: Vec<u64> = rnrf
            .iter()
            .map(|e| (e.p_hat * e.n_trials as f64).round() as u64)
            .collect();
        let trials: Vec<u64> = rnrf.iter().map(|e| e.n_trials).collect();
        let flat = proportions_homogeneity(&outages, &trials);
        report.require(
            flat.p_value > FLATNESS_P_MIN,
            format!("radius {ra}: RNRF varies with density, p = {:.2e}", flat.p_value),
        );
        report.note(format!(
            "radius {ra}: NNNF {:.4} -> {:.4}, RNRF {:.4}..{:.4} (homogeneity p = {:.3})",
            nnnf[0].p_hat,
            nnnf[nnnf.len() - 1].p_hat,
            rnrf.iter().map(|e| e.p_hat).fold(f64::INFINITY, f64::min),
            rnrf.iter().map(|e| e.p_hat).fold(0.0, f64::max),
            flat.p_value
        ));
    }
    for (j, name) in ["RNRF", "NNNF"].into_iter().enumerate() {
        for (k, lambda) in densities.iter().enumerate() {
            let (small, mid, large) = (&near[0][j][k], &near[1][j][k], &near[2][j][k]);
            report.require(
                below(small, large, true) && below(small, mid, false) && below(mid, large, false),
                format!("{name} density {lambda}: outage does not shrink with the radius"),
            );
        }
    }
    report
}

fn bin_masses(pdf: impl Fn(f64) -> f64, lo: f64, hi: f64, bins: usize) -> mmnoma::Result<Vec<f64>> {
    let width = (hi - lo) / bins as f64;
    (0..bins)
        .map(|b| {
            let a = lo + b as f64 * width;
            integrate(&pdf, a, a + width, Tolerance::relative(1e-12)).map(|q| q.value)
        })
        .collect()
}

fn histogram(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<u64> {
    let mut counts = vec![0u64; bins];
    let width = (hi - lo) / bins as f64;
    for &x in samples {
        let b = (((x - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
}

/// Poisson(mu) mass at `k`, conditioned on `k ≥ 1`.
fn truncated_poisson_pmf(mu: f64, k: u64) -> f64 {
    let ln = k as f64 * mu.ln() - mu - mmnoma::analytic::special::ln_gamma(k as f64 + 1.0);
    ln.exp() / -(-mu).exp_m1()
}

pub fn geometry_soundness(budget: &Budget) -> CriterionReport {
    let mut report = CriterionReport::new(8, "geometry soundness");
    let regions = [
        ("A", SectorRegion::wedge(0.1, 2.5, 6.0)),
        ("B", SectorRegion::ring(0.1, 8.0, 10.0, 2.0)),
    ];
    for (name, region) in regions {
        let region = match region {
            Ok(r) => r,
            Err(e) => return report.fail(e.to_string()),
        };
        let (lo, hi) = (region.r_min(), region.r_max());
        type Pdf = fn(&SectorRegion, f64) -> f64;
        let laws: [(&str, Pdf); 3] = [
            ("nearest", pdf_nearest_distance),
            ("farthest", pdf_farthest_distance),
            ("uniform", pdf_uniform_distance),
        ];
        for (law, pdf) in laws {
            match integrate(|r| pdf(&region, r), lo, hi, Tolerance::relative(1e-13)) {
                Ok(q) => report.require(
                    (q.value - 1.0).abs() <= PDF_MASS_TOLERANCE,
                    format!("region {name} {law} pdf mass {}", q.value),
                ),
                Err(e) => return report.fail(e.to_string()),
            }
        }
        let delta = region.half_angle();
        let point_mass = integrate(
            |r| 2.0 * delta * r * pdf_uniform_point(&region),
            lo,
            hi,
            Tolerance::relative(1e-13),
        );
        match point_mass {
            Ok(q) => report.require(
                (q.value - 1.0).abs() <= PDF_MASS_TOLERANCE,
                format!("region {name} point pdf mass {}", q.value),
            ),
            Err(e) => return report.fail(e.to_string()),
        }

        let mut rng = trial_rng(budget.seed, 0);
        let (mut nearest, mut farthest) = (Vec::new(), Vec::new());
        let mut sizes = Vec::new();
        for _ in 0..budget.gof_samples {
            let devices = match sample_deployment_nonempty(&region, &mut rng, DEFAULT_RETRY_CAP) {
                Ok(d) => d,
                Err(e) => return report.fail(e.to_string()),
            };
            let d = devices.iter().map(|p| p.distance);
            nearest.push(d.clone().fold(f64::INFINITY, f64::min));
            farthest.push(d.fold(0.0, f64::max));
            sizes.push(devices.len() as u64);
        }
        let n = budget.gof_samples as f64;
        let gof: [(&str, Pdf, &[f64]); 2] = [
            ("nearest", pdf_nearest_distance, &nearest),
            ("farthest", pdf_farthest_distance, &farthest),
        ];
        for (law, pdf, samples) in gof {
            let masses = match bin_masses(|r| pdf(&region, r), lo, hi, GOF_BINS) {
                Ok(m) => m,
                Err(e) => return report.fail(e.to_string()),
            };
            let expected: Vec<f64> = masses.iter().map(|m| m * n).collect();
            let test = chi_square_gof(&histogram(samples, lo, hi, GOF_BINS), &expected, 0);
            report.note(format!(
                "region {name} {law} distance: chi2 {:.1} on {} dof, p = {:.3}",
                test.statistic, test.dof, test.p_value
            ));
            report.require(
                test.p_value > GOF_P_MIN,
                format!("region {name} {law} distance histogram, p = {:.2e}", test.p_value),
            );
        }

        let mu = region.mean_count();
        let kmax = sizes.iter().copied().max().unwrap_or(1);
        let observed: Vec<u64> = (1..=kmax)
            .map(|k| sizes.iter().filter(|&&s| s == k).count() as u64)
            .collect();
        let mut expected: Vec<f64> = (1..=kmax).map(|k| n * truncated_poisson_pmf(mu, k)).collect();
        let listed: f64 = expected.iter().sum();
        if let Some(last) = expected.last_mut() {
            *last += n - listed;
        }
        let test = chi_square_gof(&observed, &expected, 0);
        report.note(format!(
            "region {name} device count: chi2 {:.1} on {} dof, p = {:.3}",
            test.statistic, test.dof, test.p_value
        ));
        report.require(
            test.p_value > GOF_P_MIN,
            format!("region {name} device counts, p = {:.2e}", test.p_value),
        );
    }
    report
}

pub fn determinism(budget: &Budget) -> CriterionReport {
    let mut report = CriterionReport::new(9, "determinism across thread counts");
    for (name, text) in PRESETS {
        let mut spec = match parse_config(text) {
            Ok(s) => s,
            Err(e) => return report.fail(format!("{name}: {e}")),
        };
        spec.trials = budget.determinism_trials;
        let mut run = |threads| {
            spec.threads = threads;
            run_experiment(&spec)
        };
        let (a, b) = (run(DETERMINISM_THREADS.0), run(DETERMINISM_THREADS.1));
        report.require(
            a.is_complete() && b.is_complete(),
            format!("{name}: run failed: {:?}", a.failure.as_ref().or(b.failure.as_ref())),
        );
        let (ba, bb) = (csv_bytes(&a), csv_bytes(&b));
        report.require(
            ba == bb,
            format!("{name}: CSV differs between {DETERMINISM_THREADS:?} threads"),
        );
        report.note(format!("{name}: {} rows, {} bytes", a.rows.len(), ba.len()));
    }
    report
}
