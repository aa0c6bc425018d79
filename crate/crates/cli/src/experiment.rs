//! Sweeps over one parameter and the CSV table they produce.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;

use mmnoma::analytic::{closed_form_outage, exact_outage_quadrature, oma_outage_quadrature};
use mmnoma::stats::proportions_homogeneity;
use mmnoma::{Engine, EstimateSource, PairingScheme, Role, SystemConfig};
use serde::Serialize;

use crate::config::{ExperimentSpec, Metric, SweepVariable};

pub const HEADER: [&str; 9] = [
    "sweep_var",
    "value",
    "scheme",
    "role",
    "source",
    "estimate",
    "ci_halfwidth",
    "n_trials",
    "seed",
];

/// Scheme column of the row written when a run aborts.
pub const FAILURE_MARKER: &str = "FAILED";

/// One CSV line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub sweep_var: String,
    pub value: f64,
    pub scheme: String,
    pub role: String,
    pub source: String,
    pub estimate: f64,
    pub ci_halfwidth: f64,
    pub n_trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub rows: Vec<Row>,
    /// Set when the run stopped early; the last row is then a failure marker.
    pub failure: Option<String>,
}

impl Table {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }
}

struct RowSink<'a> {
    spec: &'a ExperimentSpec,
    value: f64,
    scheme: PairingScheme,
    rows: &'a mut Vec<Row>,
}

impl RowSink<'_> {
    fn push(&mut self, role: &str, source: EstimateSource, estimate: f64, ci: f64, n: u64) {
        self.rows.push(Row {
            sweep_var: self.spec.sweep.as_str().into(),
            value: self.value,
            scheme: self.scheme.as_str().into(),
            role: role.into(),
            source: source.as_str().into(),
            estimate,
            ci_halfwidth: ci,
            n_trials: n,
            seed: self.spec.seed,
        });
    }
}

/// Runs every grid point, scheme and source of `spec`. Monte Carlo points all
/// use the spec's master seed, so schemes and grid points share their draws.
pub fn run_experiment(spec: &ExperimentSpec) -> Table {
    let mut table = Table::default();
    let engine = match Engine::new(spec.threads) {
        Ok(e) => e,
        Err(e) => {
            mark_failure(
                spec,
                spec.grid.first().copied().unwrap_or(f64::NAN),
                &mut table,
                e.to_string(),
            );
            return table;
        }
    };
    for &value in &spec.grid {
        for &scheme in &spec.schemes {
            let result = SweepVariable::apply(spec.sweep, &spec.base, value)
                .map(|cfg| cfg.with_scheme(scheme))
                .and_then(|cfg| {
                    let mut sink = RowSink {
                        spec,
                        value,
                        scheme,
                        rows: &mut table.rows,
                    };
                    run_point(spec, &engine, &cfg, &mut sink)
                });
            if let Err(e) = result {
                mark_failure(spec, value, &mut table, e.to_string());
                return table;
            }
        }
    }
    table
}

fn mark_failure(spec: &ExperimentSpec, value: f64, table: &mut Table, message: String) {
    table.rows.push(Row {
        sweep_var: spec.sweep.as_str().into(),
        value,
        scheme: FAILURE_MARKER.into(),
        role: message.clone(),
        source: String::new(),
        estimate: f64::NAN,
        ci_halfwidth: f64::NAN,
        n_trials: 0,
        seed: spec.seed,
    });
    table.failure = Some(message);
}

fn run_point(spec: &ExperimentSpec, engine: &Engine, cfg: &SystemConfig, sink: &mut RowSink) -> mmnoma::Result<()> {
    let want = |s| spec.sources.contains(&s);
    let scheme = cfg.scheme;
    let rates = cfg.rates;

    if want(EstimateSource::MonteCarlo) {
        let est = engine.estimate(cfg, spec.trials, spec.seed)?;
        let n = spec.trials;
        let mc = EstimateSource::MonteCarlo;
        for metric in &spec.metrics {
            match metric {
                Metric::Outage => {
                    sink.push("near", mc, est.near.p_hat, est.near.ci_halfwidth, n);
                    sink.push("far", mc, est.far.p_hat, est.far.ci_halfwidth, n);
                }
                Metric::OmaOutage => {
                    sink.push("oma_near", mc, est.oma_near.p_hat, est.oma_near.ci_halfwidth, n);
                    sink.push("oma_far", mc, est.oma_far.p_hat, est.oma_far.ci_halfwidth, n);
                }
                Metric::SumRate => {
                    sink.push("noma_sum", mc, est.noma_rate.mean, est.noma_rate.ci_halfwidth, n);
                    sink.push("oma_sum", mc, est.oma_rate.mean, est.oma_rate.ci_halfwidth, n);
                    sink.push(
                        "oma_capacity",
                        mc,
                        est.oma_capacity.mean,
                        est.oma_capacity.ci_halfwidth,
                        n,
                    );
                }
            }
        }
    }

    if want(EstimateSource::ClosedForm) {
        let cf = EstimateSource::ClosedForm;
        let near = closed_form_outage(cfg, scheme, Role::Near);
        let far = closed_form_outage(cfg, scheme, Role::Far);
        for metric in &spec.metrics {
            match metric {
                Metric::Outage => {
                    sink.push("near", cf, near, 0.0, 0);
                    sink.push("far", cf, far, 0.0, 0);
                }
                // No closed form exists for the orthogonal baseline.
                Metric::OmaOutage => {}
                Metric::SumRate => {
                    let rate = rates.near() * (1.0 - near) + rates.far() * (1.0 - far);
                    sink.push("noma_sum", cf, rate, 0.0, 0);
                }
            }
        }
    }

    if want(EstimateSource::Quadrature) {
        let q = EstimateSource::Quadrature;
        let needs_noma = spec
            .metrics
            .iter()
            .any(|m| matches!(m, Metric::Outage | Metric::SumRate));
        let needs_oma = spec
            .metrics
            .iter()
            .any(|m| matches!(m, Metric::OmaOutage | Metric::SumRate));
        let noma = if needs_noma {
            Some((
                exact_outage_quadrature(cfg, scheme, Role::Near)?,
                exact_outage_quadrature(cfg, scheme, Role::Far)?,
            ))
        } else {
            None
        };
        let oma = if needs_oma {
            Some((
                oma_outage_quadrature(cfg, scheme, Role::Near)?,
                oma_outage_quadrature(cfg, scheme, Role::Far)?,
            ))
        } else {
            None
        };
        let sum = |(n, f): (f64, f64)| rates.near() * (1.0 - n) + rates.far() * (1.0 - f);
        for metric in &spec.metrics {
            match (metric, noma, oma) {
                (Metric::Outage, Some((n, f)), _) => {
                    sink.push("near", q, n, 0.0, 0);
                    sink.push("far", q, f, 0.0, 0);
                }
                (Metric::OmaOutage, _, Some((n, f))) => {
                    sink.push("oma_near", q, n, 0.0, 0);
                    sink.push("oma_far", q, f, 0.0, 0);
                }
                (Metric::SumRate, Some(noma), Some(oma)) => {
                    sink.push("noma_sum", q, sum(noma), 0.0, 0);
                    sink.push("oma_sum", q, sum(oma), 0.0, 0);
                }
                _ => unreachable!("quadrature inputs computed for every requested metric"),
            }
        }
    }
    Ok(())
}

pub fn write_csv<W: io::Write>(table: &Table, out: W) -> csv::Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(HEADER)?;
    for row in &table.rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn csv_bytes(table: &Table) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv(table, &mut buf).expect("writing to memory cannot fail");
    buf
}

type SeriesKey = (String, String, String);

fn series(table: &Table) -> BTreeMap<SeriesKey, Vec<&Row>> {
    let mut map: BTreeMap<SeriesKey, Vec<&Row>> = BTreeMap::new();
    for row in table.rows.iter().filter(|r| r.scheme != FAILURE_MARKER) {
        map.entry((row.scheme.clone(), row.role.clone(), row.source.clone()))
            .or_default()
            .push(row);
    }
    map
}

fn lookup<'a>(table: &'a Table, value: f64, scheme: &str, role: &str, source: &str) -> Option<&'a Row> {
    table
        .rows
        .iter()
        .find(|r| r.value == value && r.scheme == scheme && r.role == role && r.source == source)
}

fn grid_values(table: &Table) -> Vec<f64> {
    let mut values: Vec<f64> = Vec::new();
    for r in &table.rows {
        if !values.contains(&r.value) {
            values.push(r.value);
        }
    }
    values
}

/// Plain-text digest of a table: ranges, ordering verdicts and agreement.
pub fn emit_summary(table: &Table) -> String {
    let mut out = String::new();
    let Some(first) = table.rows.first() else {
        return "empty table\n".into();
    };
    let sweep = first.sweep_var.clone();
    let values = grid_values(table);
    let _ = writeln!(out, "sweep {sweep}: {} grid points", values.len());
    if let Some(msg) = &table.failure {
        let _ = writeln!(out, "run FAILED: {msg}");
    }

    let groups = series(table);
    for ((scheme, role, source), rows) in &groups {
        let lo = rows.iter().map(|r| r.estimate).fold(f64::INFINITY, f64::min);
        let hi = rows.iter().map(|r| r.estimate).fold(f64::NEG_INFINITY, f64::max);
        let _ = writeln!(out, "  {scheme:<4} {role:<12} {source:<4} min {lo:.6} max {hi:.6}");
    }

    let outage_rows: Vec<&Row> = table
        .rows
        .iter()
        .filter(|r| matches!(r.role.as_str(), "near" | "far"))
        .collect();
    if !outage_rows.is_empty() && outage_rows.iter().all(|r| r.estimate == 1.0) {
        let _ = writeln!(
            out,
            "all outage = 1 (SIC infeasible for this power split and far target)"
        );
    }

    for source in ["mc", "cf", "quad"] {
        let (mut near_ok, mut far_ok, mut checked) = (0, 0, 0);
        for &v in &values {
            let get = |s: &str, role: &str| lookup(table, v, s, role, source).map(|r| r.estimate);
            if let (Some(rn), Some(nn), Some(fnear), Some(rf), Some(nf), Some(ff)) = (
                get("RNRF", "near"),
                get("NNNF", "near"),
                get("NNFF", "near"),
                get("RNRF", "far"),
                get("NNNF", "far"),
                get("NNFF", "far"),
            ) {
                checked += 1;
                near_ok += usize::from(rn >= nn && nn == fnear);
                far_ok += usize::from(nf <= rf && rf <= ff);
            }
        }
        if checked > 0 {
            let _ = writeln!(
                out,
                "ordering [{source}]: near RNRF >= NNNF = NNFF at {near_ok}/{checked}, far NNNF <= RNRF <= NNFF at {far_ok}/{checked}"
            );
        }
    }

    let upper: Vec<f64> = {
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        sorted[sorted.len() / 2..].to_vec()
    };
    for analytic in ["cf", "quad"] {
        let mut worst: Option<(f64, f64, String)> = None;
        for r in table
            .rows
            .iter()
            .filter(|r| r.source == "mc" && upper.contains(&r.value))
        {
            if let Some(a) = lookup(table, r.value, &r.scheme, &r.role, analytic) {
                if a.estimate > 0.0 {
                    let dev = (r.estimate - a.estimate).abs() / a.estimate;
                    if worst.as_ref().is_none_or(|w| dev > w.0) {
                        worst = Some((dev, r.value, format!("{} {}", r.scheme, r.role)));
                    }
                }
            }
        }
        if let Some((dev, v, what)) = worst {
            let _ = writeln!(
                out,
                "max |mc - {analytic}| / {analytic} over upper half of grid: {:.2}% ({what} at {v})",
                100.0 * dev
            );
        }
    }

    let mut rate_checked = 0;
    let mut rate_ok = 0;
    for r in table.rows.iter().filter(|r| r.role == "noma_sum") {
        if let Some(o) = lookup(table, r.value, &r.scheme, "oma_sum", &r.source) {
            rate_checked += 1;
            rate_ok += usize::from(r.estimate >= o.estimate);
        }
    }
    if rate_checked > 0 {
        let _ = writeln!(out, "NOMA sum rate >= OMA sum rate at {rate_ok}/{rate_checked} points");
    }

    if sweep == SweepVariable::DensityA.as_str() {
        let rows: Vec<&Row> = table
            .rows
            .iter()
            .filter(|r| r.scheme == "RNRF" && r.role == "near" && r.source == "mc")
            .collect();
        if rows.len() > 1 {
            let successes: Vec<u64> = rows
                .iter()
                .map(|r| (r.estimate * r.n_trials as f64).round() as u64)
                .collect();
            let trials: Vec<u64> = rows.iter().map(|r| r.n_trials).collect();
            let test = proportions_homogeneity(&successes, &trials);
            let verdict = if test.p_value > 0.01 { "flat" } else { "NOT flat" };
            let _ = writeln!(
                out,
                "RNRF near outage across density_a: {verdict} (chi-square {:.2}, p = {:.3})",
                test.statistic, test.p_value
            );
        }
    }
    out
}
