//! Monte Carlo campaigns over grids of `(model, n, p)` and their checks.
//!
//! Trials run in parallel on a rayon pool whose size is capped by the
//! `RMT_SHARP_THREADS` environment variable. Each trial draws from its own
//! random stream, derived from the seed and the trial's grid coordinates, so
//! results do not depend on scheduling.

pub mod config;
pub mod record;
pub mod stats;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{ExperimentConfig, ExperimentKind, ExperimentParams, GridPoint, PGrid, SCHEMA_VERSION};
pub use record::{TrialRecord, CSV_HEADER};
pub use stats::{aggregate, quantile, wilson_interval, AggregateReport, AggregateStats, EventFrequency, NumericSummary};

use crate::error::{Error, Result};
use crate::matrix::SparseBinaryMatrix;
use crate::models::GraphModel;
use crate::rng::SeededRng;
use crate::spectral::lu::Lu;
use crate::spectral::{self, certify_singularity, distance_column_to_span, distance_via_quadratic_form, DistanceInstance, DistanceKind, Singularity};
use crate::structure::{check_typical_structure, detect_zero_lines, light_columns, omega_col_probability};
use crate::vectors::compute_rho_ell0;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "RMT_SHARP_THREADS";

/// A pass/fail statement about a run. Diagnostics are reported but carry
/// `enforced = false`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub enforced: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            enforced: true,
            detail: detail.into(),
        }
    }

    fn diagnostic(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            enforced: false,
            ..Self::new(name, passed, detail)
        }
    }
}

/// Per-cell constants reported alongside the records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointInfo {
    pub point: GridPoint,
    /// `1 − (1 − (1−p)ⁿ)ⁿ`.
    pub omega_col_formula: f64,
    pub ell0: Option<u32>,
    pub rho: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub config: ExperimentConfig,
    pub points: Vec<PointInfo>,
    /// Canonically ordered.
    pub records: Vec<TrialRecord>,
    pub checks: Vec<Check>,
}

impl RunOutput {
    pub fn enforced_failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.enforced && !c.passed)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream id of one trial, a hash of its coordinates. Streams with the top
/// bit set are reserved for auxiliary draws.
pub fn trial_stream(kind: ExperimentKind, point: &GridPoint, trial: usize) -> u64 {
    let mut h = splitmix(kind as u64);
    h = splitmix(h ^ point.model.kind as u64);
    h = splitmix(h ^ point.model.n as u64);
    h = splitmix(h ^ point.model.p.to_bits());
    h = splitmix(h ^ trial as u64);
    h >> 1
}

/// Worker count from `RMT_SHARP_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&t: &usize| t > 0)
}

fn run_parallel<T, F>(jobs: Vec<(usize, usize)>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, usize) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_cap().unwrap_or(0))
        .build()
        .map_err(|e| Error::param(format!("thread pool: {e}")))?;
    pool.install(|| jobs.into_par_iter().map(|(pi, t)| f(pi, t)).collect())
}

struct Trial<'a> {
    cfg: &'a ExperimentConfig,
    point: &'a GridPoint,
    trial: usize,
    rng: SeededRng,
    started: Instant,
}

impl Trial<'_> {
    fn record(&self) -> TrialRecord {
        let m = &self.point.model;
        TrialRecord::new(self.cfg.experiment, m.kind, m.n, m.p, self.point.grid_value, self.trial, self.cfg.seed, self.rng.stream_id)
    }

    fn sample(&self) -> Result<SparseBinaryMatrix> {
        self.point.model.sample(&self.rng)
    }

    fn finish(&self, mut r: TrialRecord) -> TrialRecord {
        if self.cfg.params.record_timing {
            r.wall_time_ms = Some(self.started.elapsed().as_secs_f64() * 1e3);
        }
        r
    }
}

/// Run every trial of every grid cell through `f`, which may emit several
/// records per trial.
fn run_trials<F>(cfg: &ExperimentConfig, points: &[GridPoint], f: F) -> Result<Vec<TrialRecord>>
where
    F: Fn(&Trial) -> Result<Vec<TrialRecord>> + Sync + Send,
{
    let jobs: Vec<(usize, usize)> = (0..points.len()).flat_map(|pi| (0..cfg.trials).map(move |t| (pi, t))).collect();
    let nested = run_parallel(jobs, |pi, t| {
        let point = &points[pi];
        let trial = Trial {
            cfg,
            point,
            trial: t,
            rng: SeededRng::new(cfg.seed, trial_stream(cfg.experiment, point, t)),
            started: Instant::now(),
        };
        f(&trial)
    })?;
    let mut records: Vec<TrialRecord> = nested.into_iter().flatten().collect();
    records.sort_by(TrialRecord::canonical_cmp);
    Ok(records)
}

fn point_infos(cfg: &ExperimentConfig, points: &[GridPoint]) -> Vec<PointInfo> {
    points
        .iter()
        .map(|pt| {
            let rho = compute_rho_ell0(pt.model.n, pt.model.p, &cfg.params.vectors).ok();
            PointInfo {
                point: *pt,
                omega_col_formula: omega_col_probability(pt.model.n, pt.model.p),
                ell0: rho.map(|r| r.0),
                rho: rho.map(|r| r.1),
            }
        })
        .collect()
}

fn records_at<'a>(records: &'a [TrialRecord], pt: &GridPoint) -> impl Iterator<Item = &'a TrialRecord> {
    let (kind, n, p) = (pt.model.kind, pt.model.n, pt.model.p);
    records.iter().filter(move |r| r.model == kind && r.n == n && r.p.to_bits() == p.to_bits())
}

fn label(pt: &GridPoint) -> String {
    format!("{} n={} p={:.6}", pt.model.kind, pt.model.n, pt.model.p)
}

fn freq(flags: impl IntoIterator<Item = bool>) -> Option<EventFrequency> {
    EventFrequency::from_flags(flags)
}

/// Dispatch on `cfg.experiment`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    match cfg.experiment {
        ExperimentKind::ZeroColumnProbability => run_zero_column_probability(cfg),
        ExperimentKind::PhaseTransition => run_phase_transition(cfg),
        ExperimentKind::SminScaling => run_smin_scaling(cfg),
        ExperimentKind::NormConcentration => run_norm_concentration(cfg),
        ExperimentKind::StructureAudit => run_structure_audit(cfg),
        ExperimentKind::DistanceIdentity => run_distance_identity(cfg),
        ExperimentKind::HsNormCheck => run_hs_norm_check(cfg),
    }
}

fn require_kind(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<Vec<GridPoint>> {
    if cfg.experiment != kind {
        return Err(Error::param(format!("config is for {}, not {kind}", cfg.experiment)));
    }
    cfg.validate()?;
    cfg.points()
}

fn finish(cfg: &ExperimentConfig, points: &[GridPoint], records: Vec<TrialRecord>, checks: Vec<Check>) -> RunOutput {
    RunOutput {
        config: cfg.clone(),
        points: point_infos(cfg, points),
        records,
        checks,
    }
}

/// Frequency of a zero column against the closed form, with a 3σ band.
pub fn run_zero_column_probability(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let points = require_kind(cfg, ExperimentKind::ZeroColumnProbability)?;
    if let Some(bad) = cfg.models.iter().find(|k| !k.is_iid()) {
        return Err(Error::param(format!(
            "the zero-column formula needs i.i.d. entries; model {bad} does not have them"
        )));
    }
    let records = run_trials(cfg, &points, |t| {
        let a = t.sample()?;
        let z = detect_zero_lines(&a);
        let mut r = t.record();
        r.omega0 = z.omega0;
        r.omega_col = !z.zero_cols.is_empty();
        if z.omega0 {
            r.invertible = Some(false);
            r.sigma_tilde = Some(f64::INFINITY);
        }
        Ok(vec![t.finish(r)])
    })?;
    let checks = points
        .iter()
        .map(|pt| {
            let f = freq(records_at(&records, pt).map(|r| r.omega_col)).expect("trials >= 1");
            let q = omega_col_probability(pt.model.n, pt.model.p);
            let sigma = (q * (1.0 - q) / f.trials as f64).sqrt();
            let gap = (f.freq - q).abs();
            Check::new(
                format!("zero-column frequency within 3 sigma [{}]", label(pt)),
                gap <= 3.0 * sigma,
                format!("freq {} formula {q} |diff| {gap} band {}", f.freq, 3.0 * sigma),
            )
        })
        .collect();
    Ok(finish(cfg, &points, records, checks))
}

/// Spectral summary of one sampled matrix, with the exact certificate.
fn spectral_trial(t: &Trial, a: &SparseBinaryMatrix, r: &mut TrialRecord, eigenpair: bool) -> Result<()> {
    let opts = &t.cfg.params.spectral;
    let z = detect_zero_lines(a);
    r.omega0 = z.omega0;
    r.omega_col = !z.zero_cols.is_empty();
    let s = spectral::summarize(a, &t.point.model, opts, eigenpair)?;
    r.invertible = Some(s.singular_exact == Singularity::Invertible);
    r.s_min = Some(s.s_min);
    r.s2 = Some(s.s2);
    r.s_max = Some(s.s_max);
    r.centered_norm = Some(s.centered_norm);
    r.sigma_tilde = Some(s.sigma_tilde);
    r.lambda0 = s.lambda0;
    r.eigvec_dev = s.eigvec_dev;
    r.lambda_flag = s.lambda0.map(|l| l >= t.point.model.np() / 2.0);
    Ok(())
}

/// `K̂` per grid cell (q99 of `centered_norm/√(np)`), then the eigenvector
/// flag `eigvec_dev·√(np) ≤ 16·K̂`.
fn fill_eigvec_flags(records: &mut [TrialRecord], points: &[GridPoint]) {
    for pt in points {
        let np = pt.model.np();
        let mut ratios: Vec<f64> = records_at(records, pt).filter_map(|r| r.centered_norm).map(|c| c / np.sqrt()).collect();
        if ratios.is_empty() {
            continue;
        }
        ratios.sort_by(f64::total_cmp);
        let k_hat = quantile(&ratios, 0.99);
        for r in records.iter_mut() {
            if r.model == pt.model.kind && r.n == pt.model.n && r.p.to_bits() == pt.model.p.to_bits() {
                r.eigvec_flag = r.eigvec_dev.map(|d| d * np.sqrt() <= 16.0 * k_hat);
            }
        }
    }
}

fn consistency_checks(records: &[TrialRecord]) -> Vec<Check> {
    let bad_omega = records.iter().filter(|r| r.omega0 && r.invertible == Some(true)).count();
    let bad_sigma = records
        .iter()
        .filter(|r| match (r.invertible, r.sigma_tilde) {
            (Some(true), Some(s)) => !s.is_finite(),
            (Some(false), Some(s)) => s != f64::INFINITY,
            _ => false,
        })
        .count();
    vec![
        Check::new("omega0 implies singular", bad_omega == 0, format!("{bad_omega} violations")),
        Check::new("sigma_tilde infinite exactly when singular", bad_sigma == 0, format!("{bad_sigma} violations")),
    ]
}

/// Cells of one `(model, n)` series, ordered by grid value.
fn series(points: &[GridPoint]) -> Vec<Vec<GridPoint>> {
    let mut out: Vec<Vec<GridPoint>> = Vec::new();
    for pt in points {
        match out.iter_mut().find(|s| s[0].model.kind == pt.model.kind && s[0].model.n == pt.model.n) {
            Some(s) => s.push(*pt),
            None => out.push(vec![*pt]),
        }
    }
    for s in &mut out {
        s.sort_by(|a, b| a.model.p.total_cmp(&b.model.p));
    }
    out
}

/// Invertibility across the threshold `np = log n`.
pub fn run_phase_transition(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let points = require_kind(cfg, ExperimentKind::PhaseTransition)?;
    let eigenpair = cfg.params.eigenpair;
    let mut records = run_trials(cfg, &points, |t| {
        let a = t.sample()?;
        let mut r = t.record();
        spectral_trial(t, &a, &mut r, eigenpair)?;
        r.light_count = Some(light_columns(&a, t.point.model.p, &t.cfg.params.structure).len());
        Ok(vec![t.finish(r)])
    })?;
    if eigenpair {
        fill_eigvec_flags(&mut records, &points);
    }
    let mut checks = consistency_checks(&records);
    let offsets = matches!(cfg.grid, PGrid::Offsets(_));
    for s in series(&points) {
        for pt in &s {
            let rs: Vec<&TrialRecord> = records_at(&records, pt).collect();
            if offsets && pt.grid_value >= 6.0 {
                let f = freq(rs.iter().filter(|r| !r.omega0).map(|r| r.invertible == Some(true)));
                checks.push(Check::new(
                    format!("P(invertible | no zero line) >= 0.99 [{}]", label(pt)),
                    f.as_ref().is_some_and(|f| f.freq >= 0.99),
                    f.map(|f| format!("{}/{} = {}", f.successes, f.trials, f.freq)).unwrap_or_else(|| "no trials without zero lines".into()),
                ));
                let mut st: Vec<f64> = rs.iter().filter(|r| r.invertible == Some(true)).filter_map(|r| r.sigma_tilde).collect();
                st.sort_by(f64::total_cmp);
                let n2 = (pt.model.n * pt.model.n) as f64;
                checks.push(Check::new(
                    format!("q90(sigma_tilde) <= n^2 [{}]", label(pt)),
                    !st.is_empty() && quantile(&st, 0.9) <= n2,
                    if st.is_empty() { "no invertible trials".into() } else { format!("q50 {} q90 {} n^2 {n2}", quantile(&st, 0.5), quantile(&st, 0.9)) },
                ));
            }
            if offsets && pt.grid_value <= -6.0 {
                let f = freq(rs.iter().map(|r| r.omega0)).expect("trials >= 1");
                checks.push(Check::new(
                    format!("P(zero line) >= 0.95 [{}]", label(pt)),
                    f.freq >= 0.95,
                    format!("{}/{} = {}", f.successes, f.trials, f.freq),
                ));
            }
            if eigenpair {
                let lf = freq(rs.iter().filter_map(|r| r.lambda_flag));
                let ef = freq(rs.iter().filter_map(|r| r.eigvec_flag));
                if let (Some(lf), Some(ef)) = (lf, ef) {
                    checks.push(Check::diagnostic(
                        format!("large eigenvalue flags [{}]", label(pt)),
                        lf.freq == 1.0 && ef.freq >= 0.99,
                        format!("lambda0 >= np/2 in {}, eigvec bound in {}", lf.freq, ef.freq),
                    ));
                }
            }
        }
        for w in s.windows(2) {
            let lo = freq(records_at(&records, &w[0]).map(|r| r.invertible == Some(true))).expect("trials >= 1");
            let hi = freq(records_at(&records, &w[1]).map(|r| r.invertible == Some(true))).expect("trials >= 1");
            checks.push(Check::new(
                format!("P(invertible) monotone up to CI [{} -> p={:.6}]", label(&w[0]), w[1].model.p),
                hi.wilson_hi >= lo.wilson_lo,
                format!("{} [{}, {}] -> {} [{}, {}]", lo.freq, lo.wilson_lo, lo.wilson_hi, hi.freq, hi.wilson_lo, hi.wilson_hi),
            ));
        }
    }
    Ok(finish(cfg, &points, records, checks))
}

/// `s_min·√(n/p)` deep in the invertible phase.
pub fn run_smin_scaling(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let points = require_kind(cfg, ExperimentKind::SminScaling)?;
    if let Some(pt) = points.iter().find(|pt| pt.model.np() < (pt.model.n as f64).ln() + 4.0) {
        return Err(Error::param(format!("s_min scaling needs np >= log n + 4; {} is below", label(pt))));
    }
    let records = run_trials(cfg, &points, |t| {
        let a = t.sample()?;
        let mut r = t.record();
        spectral_trial(t, &a, &mut r, false)?;
        Ok(vec![t.finish(r)])
    })?;
    let mut checks = consistency_checks(&records);
    let numerically_zero = records
        .iter()
        .filter(|r| r.invertible == Some(true) && r.s_min.zip(r.s_max).is_some_and(|(lo, hi)| lo <= 1e-8 * hi))
        .count();
    checks.push(Check::new(
        "no numerically vanishing s_min among invertible matrices",
        numerically_zero == 0,
        format!("{numerically_zero} with s_min <= 1e-8 s_max"),
    ));
    // series over n for each (model, grid value)
    let mut families: Vec<(crate::models::ModelKind, f64)> = points.iter().map(|p| (p.model.kind, p.grid_value)).collect();
    families.dedup();
    families.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    families.dedup();
    for (kind, v) in families {
        let mut q10s: Vec<(usize, f64)> = Vec::new();
        for pt in points.iter().filter(|p| p.model.kind == kind && p.grid_value == v) {
            let rs: Vec<&TrialRecord> = records_at(&records, pt).collect();
            let omega = rs.iter().filter(|r| r.omega0).count();
            let mut cond: Vec<f64> = rs
                .iter()
                .filter(|r| !r.omega0 && r.invertible == Some(true))
                .filter_map(|r| r.s_min.map(|s| s * (r.n as f64 / r.p).sqrt()))
                .collect();
            let singular_other = rs.len() - omega - cond.len();
            checks.push(Check::diagnostic(
                format!("conditional sample bookkeeping [{}]", label(pt)),
                cond.len() + omega + singular_other == cfg.trials,
                format!("{} conditional + {omega} zero-line + {singular_other} other singular = {}", cond.len(), cfg.trials),
            ));
            if !cond.is_empty() {
                cond.sort_by(f64::total_cmp);
                q10s.push((pt.model.n, quantile(&cond, 0.1)));
            }
        }
        q10s.sort_by_key(|x| x.0);
        if let (Some(&(n0, q0)), Some(&(n1, q1))) = (q10s.first(), q10s.last()) {
            if n1 > n0 {
                let floor = (n1 as f64 / n0 as f64).powf(-0.25);
                checks.push(Check::new(
                    format!("q10 decay no faster than n^-0.25 [{kind} grid value {v}]"),
                    q1 / q0 >= floor,
                    format!("q10 {q0} at n={n0}, {q1} at n={n1}, ratio {} vs {floor}", q1 / q0),
                ));
            }
        }
    }
    Ok(finish(cfg, &points, records, checks))
}

/// `‖A − EA‖/√(np)` across sizes.
pub fn run_norm_concentration(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let points = require_kind(cfg, ExperimentKind::NormConcentration)?;
    let records = run_trials(cfg, &points, |t| {
        let a = t.sample()?;
        let mut r = t.record();
        let z = detect_zero_lines(&a);
        r.omega0 = z.omega0;
        r.omega_col = !z.zero_cols.is_empty();
        r.centered_norm = Some(spectral::centered_operator_norm(&a, &t.point.model, &t.cfg.params.spectral)?);
        Ok(vec![t.finish(r)])
    })?;
    let mut checks = Vec::new();
    let mut families: Vec<(crate::models::ModelKind, f64)> = points.iter().map(|p| (p.model.kind, p.grid_value)).collect();
    families.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    families.dedup();
    for (kind, v) in families {
        let mut maxima = Vec::new();
        for pt in points.iter().filter(|p| p.model.kind == kind && p.grid_value == v) {
            let np = pt.model.np();
            let mut ratios: Vec<f64> = records_at(&records, pt).filter_map(|r| r.centered_norm).map(|c| c / np.sqrt()).collect();
            ratios.sort_by(f64::total_cmp);
            let max = *ratios.last().expect("trials >= 1");
            checks.push(Check::new(
                format!("max norm ratio <= 10 [{}]", label(pt)),
                max <= 10.0,
                format!("max {max} q90 {}", quantile(&ratios, 0.9)),
            ));
            maxima.push(max);
        }
        if maxima.len() > 1 {
            let hi = maxima.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = maxima.iter().cloned().fold(f64::INFINITY, f64::min);
            checks.push(Check::new(
                format!("norm ratio flat across n [{kind} grid value {v}]"),
                hi / lo <= 1.5,
                format!("max/min of per-n maxima {}", hi / lo),
            ));
        }
    }
    Ok(finish(cfg, &points, records, checks))
}

/// The six structure properties, light columns and the normal-coordinates
/// probe.
pub fn run_structure_audit(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let points = require_kind(cfg, ExperimentKind::StructureAudit)?;
    if let Some(pt) = points.iter().find(|pt| pt.model.np() < (1.0 / pt.model.p).ln()) {
        return Err(Error::param(format!("structure audit needs np >= log(1/p); {} is below", label(pt))));
    }
    let params = cfg.params.clone();
    let records = run_trials(cfg, &points, |t| {
        let a = t.sample()?;
        let mut r = t.record();
        let report = check_typical_structure(&a, t.point.model.p, &params.structure, &t.rng)?;
        r.omega0 = report.omega0;
        r.omega_col = !report.zero_cols.is_empty();
        r.light_count = Some(report.light_cols.len());
        r.structure_props = Some(report.properties());
        if params.normal_coordinates && !report.omega0 && report.all_properties() {
            let (s, x) = spectral::smallest_singular_pair(&a, &params.spectral)?;
            r.s_min = Some(s);
            if s < 0.25 {
                let mut off: f64 = x.iter().map(|v| v * v).sum();
                for &j in &report.light_cols {
                    off -= x[j] * x[j];
                }
                r.offlight_norm = Some(off.max(0.0).sqrt());
            }
        }
        Ok(vec![t.finish(r)])
    })?;
    let mut checks = Vec::new();
    for pt in &points {
        let rs: Vec<&TrialRecord> = records_at(&records, pt).collect();
        for i in 0..6 {
            let f = freq(rs.iter().filter_map(|r| r.structure_props.map(|p| p[i]))).expect("trials >= 1");
            checks.push(Check::new(
                format!("property {} frequency >= 0.95 [{}]", i + 1, label(pt)),
                f.freq >= 0.95,
                format!("{}/{} = {}", f.successes, f.trials, f.freq),
            ));
        }
        let np = pt.model.np();
        // relative slack so that a grid placed exactly at 8 log n is included
        if np >= 8.0 * (pt.model.n as f64).ln() * (1.0 - 1e-12) {
            let f = freq(rs.iter().filter_map(|r| r.light_count.map(|c| c == 0))).expect("trials >= 1");
            checks.push(Check::new(
                format!("P(no light columns) >= 0.99 [{}]", label(pt)),
                f.freq >= 0.99,
                format!("{}/{} = {}", f.successes, f.trials, f.freq),
            ));
        }
        let bound = 1.0 / (cfg.params.normal_c * np);
        let probes: Vec<f64> = rs.iter().filter_map(|r| r.offlight_norm).collect();
        let violations = probes.iter().filter(|&&v| v < bound).count();
        checks.push(Check::diagnostic(
            format!("normal-coordinates probe [{}]", label(pt)),
            violations == 0,
            format!("{} probes, {violations} below 1/(C' np) = {bound}", probes.len()),
        ));
    }
    Ok(finish(cfg, &points, records, checks))
}

/// Relative gap used by the distance identity: `|a − b| / max(a, b)`,
/// zero when both are below 1e-12.
pub fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale <= 1e-12 { 0.0 } else { (a - b).abs() / scale }
}

/// Quadratic-form distance against the projection oracle.
pub fn run_distance_identity(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let points = require_kind(cfg, ExperimentKind::DistanceIdentity)?;
    if let Some(&n) = cfg.n.iter().find(|&&n| !(5..=200).contains(&n)) {
        return Err(Error::param(format!("distance identity sizes must lie in [5, 200], got {n}")));
    }
    let records = run_trials(cfg, &points, |t| {
        let a = t.sample()?;
        let mut r = t.record();
        let z = detect_zero_lines(&a);
        r.omega0 = z.omega0;
        r.omega_col = !z.zero_cols.is_empty();
        let d = distance_column_to_span(&a, 0)?;
        let q = distance_via_quadratic_form(&DistanceInstance::new(&a)?)?;
        r.dist_projection = Some(d);
        r.dist_formula = Some(q.value);
        r.dist_branch = Some(q.kind);
        r.dist_rel_gap = Some(relative_gap(q.value, d));
        Ok(vec![t.finish(r)])
    })?;
    let exact: Vec<&TrialRecord> = records.iter().filter(|r| r.dist_branch == Some(DistanceKind::Exact)).collect();
    let max_gap = exact.iter().filter_map(|r| r.dist_rel_gap).fold(0.0, f64::max);
    let lower: Vec<&TrialRecord> = records.iter().filter(|r| r.dist_branch == Some(DistanceKind::LowerBound)).collect();
    let bad_lower = lower
        .iter()
        .filter(|r| r.dist_formula.zip(r.dist_projection).is_some_and(|(f, d)| f > d + 1e-8))
        .count();
    let checks = vec![
        Check::new(
            "quadratic form equals projection distance (invertible C)",
            max_gap <= 1e-8,
            format!("{} instances, max relative gap {max_gap}", exact.len()),
        ),
        Check::new(
            "kernel lower bound below projection distance (singular C)",
            bad_lower == 0,
            format!("{} instances, {bad_lower} violations", lower.len()),
        ),
    ];
    Ok(finish(cfg, &points, records, checks))
}

/// `‖A⁻¹x̄‖` against `ε⋆^{-1/2}·√(p(1−p))·‖A⁻¹‖_HS` for centered Bernoulli
/// vectors `x̄`.
pub fn run_hs_norm_check(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let points = require_kind(cfg, ExperimentKind::HsNormCheck)?;
    if cfg.params.eps_star.is_empty() || cfg.params.x_draws == 0 {
        return Err(Error::param("the Hilbert-Schmidt check needs eps_star levels and x_draws >= 1"));
    }
    let eps = cfg.params.eps_star.clone();
    let draws = cfg.params.x_draws;
    let records = run_trials(cfg, &points, |t| {
        let a = t.sample()?;
        let mut base = t.record();
        let z = detect_zero_lines(&a);
        base.omega0 = z.omega0;
        base.omega_col = !z.zero_cols.is_empty();
        let invertible = !z.omega0 && certify_singularity(&a) == Singularity::Invertible;
        base.invertible = Some(invertible);
        let mut ratios = Vec::new();
        if invertible {
            let n = a.rows();
            let lu = Lu::factor(&a)?;
            let mut hs2 = 0.0;
            let mut e = vec![0.0; n];
            for k in 0..n {
                e.iter_mut().for_each(|v| *v = 0.0);
                e[k] = 1.0;
                lu.solve_in_place(&mut e)?;
                hs2 += e.iter().map(|v| v * v).sum::<f64>();
            }
            base.hs_norm = Some(hs2.sqrt());
            let p = t.point.model.p;
            let mut rng = t.rng.aux(0x45);
            let scale = (p * (1.0 - p)).sqrt() * hs2.sqrt();
            for _ in 0..draws {
                let mut x: Vec<f64> = (0..n).map(|_| if rand::Rng::random::<f64>(&mut rng) < p { 1.0 - p } else { -p }).collect();
                lu.solve_in_place(&mut x)?;
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                // the event holds at ε⋆ iff ε⋆ ≤ (scale / norm)²
                ratios.push((scale / norm).powi(2));
            }
        }
        Ok(eps
            .iter()
            .map(|&e| {
                let mut r = base.clone();
                r.eps_star = Some(e);
                if invertible {
                    r.hs_event_freq = Some(ratios.iter().filter(|&&q| e <= q).count() as f64 / ratios.len() as f64);
                } else {
                    r.sigma_tilde = Some(f64::INFINITY);
                }
                t.finish(r)
            })
            .collect())
    })?;
    let mut checks = Vec::new();
    for pt in &points {
        for &e in &eps {
            if e >= 1.0 {
                continue;
            }
            let rs: Vec<&TrialRecord> = records_at(&records, pt).filter(|r| r.eps_star == Some(e) && r.hs_event_freq.is_some()).collect();
            if rs.is_empty() {
                continue;
            }
            let total = (rs.len() * draws) as f64;
            let f = rs.iter().filter_map(|r| r.hs_event_freq).sum::<f64>() / rs.len() as f64;
            let sigma = (e * (1.0 - e) / total).sqrt();
            checks.push(Check::new(
                format!("P(HS event) >= 1 - eps - 3 sigma [{} eps={e}]", label(pt)),
                f >= 1.0 - e - 3.0 * sigma,
                format!("{} matrices x {draws} draws: freq {f} vs {}", rs.len(), 1.0 - e - 3.0 * sigma),
            ));
        }
    }
    Ok(finish(cfg, &points, records, checks))
}

/// Summarize a trial that was sampled outside a campaign (used by the CLI).
pub fn describe_matrix(a: &SparseBinaryMatrix, model: &GraphModel, opts: &spectral::SpectralOptions) -> Result<spectral::SpectralSummary> {
    spectral::summarize(a, model, opts, true)
}
