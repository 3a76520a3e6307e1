//! Run orchestration: configuration, scenario instances, parameter sweeps
//! and CSV artifacts.
//!
//! Every scheme of an instance replays the same SNR trace (common random
//! numbers) and draws its reporting decisions from its own stream, so
//! comparisons between schemes only differ by what the schemes do. Results
//! depend on the configuration and seed alone, never on the thread count.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::controller::{McsTable, SchemeKind, SchemeSetup, SchemeState};
use crate::error::{Error, Result};
use crate::estimation::sampling::{one_step_estimate, two_step_estimate, Population};
use crate::estimation::{
    optimal_two_step_plan, order_statistics_bound, two_step_bound, two_step_error_expression,
};
use crate::metrics::{
    aggregate_runs, count_below, overhead_violation, summarize_run, write_interval_csv,
    write_summary_csv, IntervalRecord, SchemeSummary, SummaryRow,
};
use crate::snr::HistogramRange;
use crate::venue::{RngStream, Scenario, ScenarioKind, World};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "DYMO_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    M,
    P,
    R,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::M => "m",
            SweepAxis::P => "p",
            SweepAxis::R => "r",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "m" => Ok(SweepAxis::M),
            "p" => Ok(SweepAxis::P),
            "r" => Ok(SweepAxis::R),
            other => Err(Error::Config(format!("unknown sweep axis `{other}` (m, p or r)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

impl Sweep {
    /// Parses a comma-separated value list.
    pub fn parse(axis: &str, list: &str) -> Result<Self> {
        let axis = axis.parse()?;
        let values = list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("sweep value `{v}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { axis, values })
    }

    /// Default sweep points for `axis`.
    pub fn default_for(axis: SweepAxis) -> Self {
        let values = match axis {
            SweepAxis::M => vec![5000.0, 10000.0, 20000.0, 40000.0],
            SweepAxis::P => vec![0.0005, 0.001, 0.005, 0.01],
            SweepAxis::R => vec![5.0, 10.0, 20.0, 50.0],
        };
        Self { axis, values }
    }
}

/// Fully-resolved run configuration. Every field has a default, so a config
/// file only needs the keys it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioKind,
    pub m: usize,
    pub p: f64,
    /// Reports per second.
    pub r: f64,
    pub duration: u32,
    pub interval_seconds: f64,
    pub seed: u64,
    pub lipschitz_db: f64,
    pub alpha: f64,
    pub sigma_db: f64,
    pub instances: u32,
    pub schemes: Vec<SchemeKind>,
    pub sweep: Option<Sweep>,
    pub mcs_table: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub parallel: usize,
    pub histogram_min_db: f64,
    pub histogram_max_db: f64,
    /// DyMo's population guess for its first interval; `m` when unset.
    pub m_prior: Option<f64>,
    pub smooth_threshold: bool,
    pub failure_start: u32,
    pub failure_end: u32,
    pub failure_area: f64,
    /// Also dump every instruction DyMo broadcasts.
    pub instruction_trace: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioKind::Homogeneous,
            m: 20_000,
            p: 0.001,
            r: 5.0,
            duration: 150,
            interval_seconds: 12.0,
            seed: 1,
            lipschitz_db: 5.0,
            alpha: 0.5,
            sigma_db: 5.0,
            instances: 1,
            schemes: SchemeKind::ALL.to_vec(),
            sweep: None,
            mcs_table: None,
            out: None,
            parallel: 1,
            histogram_min_db: -10.0,
            histogram_max_db: 40.0,
            m_prior: None,
            smooth_threshold: false,
            failure_start: 50,
            failure_end: 75,
            failure_area: 0.25,
            instruction_trace: false,
        }
    }
}

impl RunConfig {
    /// Parses a TOML config; errors point at the offending line.
    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e
                .span()
                .map_or(0, |s| text[..s.start.min(text.len())].matches('\n').count() + 1),
            message: e.message().to_string(),
        })?;
        cfg.validate().map_err(|e| match e {
            Error::Config(message) => {
                let key = message.split_whitespace().next().unwrap_or("");
                Error::Parse {
                    path: path.to_path_buf(),
                    line: key_line(text, key),
                    message,
                }
            }
            other => other,
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Reports per interval.
    pub fn r_interval(&self) -> f64 {
        self.r * self.interval_seconds
    }

    pub fn histogram_range(&self) -> Result<HistogramRange> {
        HistogramRange::new(self.histogram_min_db, self.histogram_max_db)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, why: String| Err(Error::Config(format!("{key} {why}")));
        if self.m == 0 {
            return bad("m", "must be at least 1".into());
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return bad("p", format!("= {} must lie in (0, 1)", self.p));
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return bad("r", format!("= {} must be positive", self.r));
        }
        if self.duration == 0 {
            return bad("duration", "must be at least 1 interval".into());
        }
        if !(self.interval_seconds > 0.0) {
            return bad("interval_seconds", "must be positive".into());
        }
        if !(self.lipschitz_db >= 0.0 && self.lipschitz_db.is_finite()) {
            return bad("lipschitz_db", format!("= {} must be >= 0", self.lipschitz_db));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha", format!("= {} must lie in (0, 1]", self.alpha));
        }
        if !(self.sigma_db >= 0.0 && self.sigma_db.is_finite()) {
            return bad("sigma_db", format!("= {} must be >= 0", self.sigma_db));
        }
        if self.instances == 0 {
            return bad("instances", "must be at least 1".into());
        }
        if self.schemes.is_empty() {
            return bad("schemes", "must name at least one scheme".into());
        }
        if self.parallel == 0 {
            return bad("parallel", "must be at least 1".into());
        }
        if let Some(m) = self.m_prior {
            if !(m > 0.0) {
                return bad("m_prior", format!("= {m} must be positive"));
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return bad("sweep", "needs at least one value".into());
            }
            for &v in &sweep.values {
                self.at(sweep.axis, v)
                    .validate()
                    .map_err(|e| Error::Config(format!("sweep point {}={v}: {e}", sweep.axis)))?;
            }
        }
        if self.histogram_range().is_err() {
            return bad("histogram_min_db", "must be below histogram_max_db".into());
        }
        self.scenario_for(self.seed).validate().map_err(|e| Error::Config(format!("scenario {e}")))
    }

    /// Copy with `axis` set to `value` and the sweep removed.
    pub fn at(&self, axis: SweepAxis, value: f64) -> RunConfig {
        let mut cfg = self.clone();
        cfg.sweep = None;
        match axis {
            SweepAxis::M => cfg.m = value.round().max(0.0) as usize,
            SweepAxis::P => cfg.p = value,
            SweepAxis::R => cfg.r = value,
        }
        cfg
    }

    pub fn scenario_for(&self, seed: u64) -> Scenario {
        let mut sc = Scenario::new(self.scenario, self.m, seed);
        sc.duration = self.duration;
        sc.interval_seconds = self.interval_seconds;
        sc.sigma_db = self.sigma_db;
        sc.failure.t_start = self.failure_start;
        sc.failure.t_end = self.failure_end;
        sc.failure.area_fraction = self.failure_area;
        sc
    }

    /// Output directory: the configured one, else `$DYMO_OUT_DIR`, else
    /// `dymo-out`.
    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("dymo-out"))
    }
}

fn key_line(text: &str, key: &str) -> usize {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.starts_with(key) && l[key.len()..].trim_start().starts_with('=')
        })
        .map_or(0, |i| i + 1)
}

/// Everything one scenario instance produced.
#[derive(Debug, Clone)]
pub struct InstanceResult {
    pub seed: u64,
    /// Records of every scheme that ran, including Optimal.
    pub records: BTreeMap<SchemeKind, Vec<IntervalRecord>>,
    pub summaries: Vec<SchemeSummary>,
    /// SNR draws outside the histogram range.
    pub out_of_range_draws: u64,
    pub mean_shift_violations: u64,
    pub mean_shift_samples: u64,
    /// Intervals without active UEs; no records are written for them.
    pub empty_intervals: u32,
    /// DyMo's broadcasts, one trace line each.
    pub instruction_trace: Vec<u8>,
}

/// Replays one instance of `cfg` (seed `seed`) through every requested
/// scheme plus Optimal.
pub fn run_instance(cfg: &RunConfig, seed: u64, mcs: &McsTable) -> Result<InstanceResult> {
    cfg.validate()?;
    let world = World::new(cfg.scenario_for(seed))?;
    let range = cfg.histogram_range()?;
    let setup = SchemeSetup {
        p: cfg.p,
        r_interval: cfg.r_interval(),
        lipschitz_db: cfg.lipschitz_db,
        alpha: cfg.alpha,
        m_prior: cfg.m_prior.unwrap_or(cfg.m as f64),
        expected_active: world.expected_active().max(1.0),
        range,
        smooth_threshold: cfg.smooth_threshold,
        grid: world.venue().base(),
        sigma_db: cfg.sigma_db,
    };
    let mut kinds: Vec<SchemeKind> = cfg.schemes.clone();
    if !kinds.contains(&SchemeKind::Optimal) {
        kinds.push(SchemeKind::Optimal);
    }
    kinds.sort();
    kinds.dedup();
    let mut schemes: Vec<(SchemeState, ChaCha8Rng)> = kinds
        .iter()
        .map(|&k| {
            Ok((
                SchemeState::new(k, &setup)?,
                RngStream::Scheme(k.stream_index()).rng(seed),
            ))
        })
        .collect::<Result<_>>()?;

    let mut records: BTreeMap<SchemeKind, Vec<IntervalRecord>> =
        kinds.iter().map(|&k| (k, Vec::with_capacity(cfg.duration as usize))).collect();
    let mut result = InstanceResult {
        seed,
        records: BTreeMap::new(),
        summaries: Vec::new(),
        out_of_range_draws: 0,
        mean_shift_violations: 0,
        mean_shift_samples: 0,
        empty_intervals: 0,
        instruction_trace: Vec::new(),
    };
    let r_interval = cfg.r_interval();
    for mut snap in world.trace(cfg.lipschitz_db) {
        result.mean_shift_violations += snap.mean_shift_violations as u64;
        result.mean_shift_samples += snap.mean_shift_samples as u64;
        if snap.active() == 0 {
            log::warn!("interval {}: no active UEs, skipped", snap.t);
            result.empty_intervals += 1;
            continue;
        }
        result.out_of_range_draws += snap
            .snr
            .iter()
            .filter(|&&h| range.clamp(h) != h)
            .count() as u64;
        // Draws are truncated to the histogram range, for the schemes and
        // the metrics alike.
        for h in &mut snap.snr {
            *h = range.clamp(*h);
        }
        let m_active = snap.active() as u64;
        for (state, rng) in &mut schemes {
            if cfg.instruction_trace && state.kind() == SchemeKind::Dymo {
                if let Some(instr) = state.instruction() {
                    instr.write_trace_line(&mut result.instruction_trace)?;
                }
            }
            let out = state.step(&snap, rng)?;
            let outliers = count_below(out.s, &snap.snr);
            let choice = mcs.select(out.s.lower_edge_db());
            records.get_mut(&state.kind()).expect("scheme registered").push(IntervalRecord {
                t: snap.t,
                scheme: state.kind(),
                s_est: out.s,
                actual_pct: outliers as f64 / m_active as f64,
                outliers,
                reports: out.reports as u64,
                overhead_violation: overhead_violation(out.reports as u64, r_interval),
                mcs: choice.index,
                spec_eff: choice.spectral_efficiency,
                m_active,
                starved: out.starved,
            });
        }
    }
    if result.empty_intervals == cfg.duration {
        return Err(Error::InvalidScenario("no interval had active UEs".into()));
    }
    result.summaries = summarize_run(&records, cfg.p, r_interval)?
        .into_iter()
        .filter(|s| cfg.schemes.contains(&s.scheme))
        .collect();
    records.retain(|k, _| cfg.schemes.contains(k));
    result.records = records;
    Ok(result)
}

/// One sweep point: its configuration and every instance's result.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub param: String,
    pub value: String,
    pub config: RunConfig,
    pub instances: Vec<InstanceResult>,
    pub aggregate: Vec<SchemeSummary>,
}

impl PointResult {
    pub fn summary(&self, scheme: SchemeKind) -> Option<&SchemeSummary> {
        self.aggregate.iter().find(|s| s.scheme == scheme)
    }

    fn label(&self) -> String {
        if self.param == "base" {
            "base".into()
        } else {
            format!("{}={}", self.param, self.value)
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub out_dir: Option<PathBuf>,
    pub points: Vec<PointResult>,
}

impl RunOutput {
    pub fn summary_rows(&self) -> Vec<SummaryRow> {
        self.points
            .iter()
            .flat_map(|pt| {
                pt.aggregate.iter().map(move |s| SummaryRow {
                    param: pt.param.clone(),
                    value: pt.value.clone(),
                    summary: *s,
                })
            })
            .collect()
    }
}

pub fn load_mcs_table(cfg: &RunConfig) -> Result<McsTable> {
    match &cfg.mcs_table {
        Some(path) => McsTable::load(path),
        None => Ok(McsTable::default()),
    }
}

/// Runs every sweep point and instance without writing anything.
pub fn simulate(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let mcs = load_mcs_table(cfg)?;
    let points: Vec<(String, String, RunConfig)> = match &cfg.sweep {
        None => vec![("base".into(), String::new(), cfg.clone())],
        Some(sweep) => sweep
            .values
            .iter()
            .map(|&v| (sweep.axis.name().to_string(), v.to_string(), cfg.at(sweep.axis, v)))
            .collect(),
    };
    let jobs: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|i| (0..cfg.instances).map(move |k| (i, cfg.seed + u64::from(k))))
        .collect();
    let run_job = |&(i, seed): &(usize, u64)| run_instance(&points[i].2, seed, &mcs);
    let results: Vec<Result<InstanceResult>> = if cfg.parallel > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.parallel)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| jobs.par_iter().map(run_job).collect())
    } else {
        jobs.iter().map(run_job).collect()
    };
    let mut results = results.into_iter();
    let mut out = Vec::with_capacity(points.len());
    for (param, value, config) in points {
        let instances: Vec<InstanceResult> = results
            .by_ref()
            .take(cfg.instances as usize)
            .collect::<Result<_>>()?;
        let summaries: Vec<Vec<SchemeSummary>> =
            instances.iter().map(|r| r.summaries.clone()).collect();
        out.push(PointResult {
            param,
            value,
            config,
            aggregate: aggregate_runs(&summaries)?,
            instances,
        });
    }
    Ok(RunOutput {
        out_dir: None,
        points: out,
    })
}

/// Runs `cfg` and writes its artifacts:
///
/// * `config.toml`: the resolved configuration
/// * `summary.csv`: mean RMSEs per sweep point and scheme
/// * `diagnostics.csv`: per-instance audit counters
/// * `<point>/seed-<seed>/<scheme>.csv`: per-interval records
///
/// On failure the files written so far are removed.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    let mut output = simulate(cfg)?;
    let dir = cfg.out_dir();
    let mut written = Vec::new();
    match write_artifacts(cfg, &output, &dir, &mut written) {
        Ok(()) => {
            output.out_dir = Some(dir);
            Ok(output)
        }
        Err(e) => {
            for path in written.iter().rev() {
                let _ = if path.is_dir() {
                    fs::remove_dir(path)
                } else {
                    fs::remove_file(path)
                };
            }
            Err(e)
        }
    }
}

fn create_dir(path: &Path, written: &mut Vec<PathBuf>) -> Result<()> {
    let mut missing = Vec::new();
    let mut cur = Some(path);
    while let Some(p) = cur {
        if p.as_os_str().is_empty() || p.exists() {
            break;
        }
        missing.push(p.to_path_buf());
        cur = p.parent();
    }
    fs::create_dir_all(path)?;
    written.extend(missing.into_iter().rev());
    Ok(())
}

fn write_file(
    path: PathBuf,
    written: &mut Vec<PathBuf>,
    body: impl FnOnce(&mut BufWriter<fs::File>) -> Result<()>,
) -> Result<()> {
    let file = fs::File::create(&path)?;
    written.push(path);
    let mut w = BufWriter::new(file);
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

fn write_artifacts(
    cfg: &RunConfig,
    output: &RunOutput,
    dir: &Path,
    written: &mut Vec<PathBuf>,
) -> Result<()> {
    create_dir(dir, written)?;
    let mut resolved = cfg.clone();
    resolved.out = Some(dir.to_path_buf());
    write_file(dir.join("config.toml"), written, |w| {
        w.write_all(resolved.to_toml().as_bytes())?;
        Ok(())
    })?;
    write_file(dir.join("summary.csv"), written, |w| {
        write_summary_csv(&output.summary_rows(), w)
    })?;
    write_file(dir.join("diagnostics.csv"), written, |w| {
        writeln!(
            w,
            "param,value,seed,out_of_range_draws,mean_shift_violations,mean_shift_samples,empty_intervals,dymo_starved_intervals"
        )?;
        for pt in &output.points {
            for inst in &pt.instances {
                let starved = inst
                    .records
                    .get(&SchemeKind::Dymo)
                    .map_or(0, |r| r.iter().filter(|x| x.starved).count());
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    pt.param,
                    pt.value,
                    inst.seed,
                    inst.out_of_range_draws,
                    inst.mean_shift_violations,
                    inst.mean_shift_samples,
                    inst.empty_intervals,
                    starved
                )?;
            }
        }
        Ok(())
    })?;
    for pt in &output.points {
        for inst in &pt.instances {
            let sub = dir.join(pt.label()).join(format!("seed-{}", inst.seed));
            create_dir(&sub, written)?;
            for (scheme, records) in &inst.records {
                write_file(sub.join(format!("{scheme}.csv")), written, |w| {
                    write_interval_csv(records, w)
                })?;
            }
            if cfg.instruction_trace && !inst.instruction_trace.is_empty() {
                write_file(sub.join("dymo_instructions.txt"), written, |w| {
                    w.write_all(&inst.instruction_trace)?;
                    Ok(())
                })?;
            }
        }
    }
    Ok(())
}

/// Outcome of one self-check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{tag} {}: {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

/// Monte-Carlo replication of the one-step/two-step comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorStudy {
    pub p: f64,
    pub r: f64,
    pub runs: usize,
    /// Root mean square of `F(estimate) - p`.
    pub one_step_se: f64,
    pub two_step_se: f64,
    /// Share of two-step runs within the two-step error bound.
    pub two_step_coverage: f64,
}

/// `runs` one-step and two-step estimates of the `p` quantile of a shared
/// uniform population of `n` members, each with an expected `r` reports.
pub fn estimator_study(p: f64, r: f64, runs: usize, n: usize, seed: u64) -> Result<EstimatorStudy> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pop = Population::uniform(n, &mut rng);
    let plan = optimal_two_step_plan(p, r)?;
    let bound = two_step_bound(p, r)?;
    let (mut one, mut two, mut covered) = (0.0, 0.0, 0usize);
    for _ in 0..runs {
        let a = one_step_estimate(&pop, p, r, &mut rng)?.true_quantile - p;
        let b = two_step_estimate(&pop, &plan, &mut rng)?.true_quantile - p;
        one += a * a;
        two += b * b;
        if b.abs() <= bound {
            covered += 1;
        }
    }
    Ok(EstimatorStudy {
        p,
        r,
        runs,
        one_step_se: (one / runs as f64).sqrt(),
        two_step_se: (two / runs as f64).sqrt(),
        two_step_coverage: covered as f64 / runs as f64,
    })
}

/// Minimizer of the two-step error over a `n x n` grid: `p1` log-spaced in
/// `(p, 1)` and `r1` linear in `(0, r)`. Returns the grid positions of the
/// minimum as fractions `(log(p1)/log(p), r1 / r)`.
pub fn grid_minimizer(p: f64, r: f64, n: usize) -> Result<(f64, f64)> {
    let steps = (n + 1) as f64;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..n {
        let e = (i + 1) as f64 / steps;
        let p1 = p.powf(e);
        for j in 0..n {
            let f = (j + 1) as f64 / steps;
            let err = two_step_error_expression(p1, f * r, p, r)?;
            if err < best.0 {
                best = (err, e, f);
            }
        }
    }
    Ok((best.1, best.2))
}

/// Runs the estimator self-checks and reports each property.
pub fn validate_estimators(seed: u64) -> Result<ValidationReport> {
    let mut checks = Vec::new();
    for p in [0.01, 0.001] {
        let s = estimator_study(p, 400.0, 500, 1_000_000, seed)?;
        checks.push(Check {
            name: format!("two-step beats one-step at p = {p}"),
            passed: s.two_step_se < s.one_step_se,
            detail: format!("se {:.3e} vs {:.3e}", s.two_step_se, s.one_step_se),
        });
        checks.push(Check {
            name: format!("two-step bound coverage at p = {p}"),
            passed: s.two_step_coverage >= 0.99,
            detail: format!("{:.1}% of {} runs", 100.0 * s.two_step_coverage, s.runs),
        });
        if p == 0.01 {
            let sd = (p * (1.0 - p) / 400.0).sqrt();
            let ratio = s.one_step_se / sd;
            checks.push(Check {
                name: format!("one-step error matches theory at p = {p}"),
                passed: (ratio - 1.0).abs() <= 0.2,
                detail: format!("ratio {ratio:.3}"),
            });
        }
    }
    let n = 200;
    let cell = 1.0 / (n + 1) as f64;
    let mut worst: f64 = 0.0;
    for p in [1e-2, 1e-3, 1e-4] {
        for r in [100.0, 400.0, 1000.0] {
            let (e, f) = grid_minimizer(p, r, n)?;
            worst = worst.max(((e - 0.5).abs()).max((f - 0.5).abs()) / cell);
        }
    }
    checks.push(Check {
        name: "grid optimum at (sqrt(p), r/2)".into(),
        passed: worst <= 1.0,
        detail: format!("largest offset {worst:.2} cells"),
    });
    let crossover = crossover_point(400.0)?;
    checks.push(Check {
        name: "two-step bound wins exactly for p <= 1/49".into(),
        passed: (crossover - 1.0 / 49.0).abs() < 1e-9,
        detail: format!("crossover at {crossover:.10}"),
    });
    Ok(ValidationReport { checks })
}

/// Largest `p` at which the two-step bound is still below the one-step
/// bound, located by bisection.
pub fn crossover_point(r: f64) -> Result<f64> {
    let gap = |p: f64| -> Result<f64> { Ok(two_step_bound(p, r)? - order_statistics_bound(p, r)?) };
    let (mut lo, mut hi) = (1e-6, 0.5);
    if gap(lo)? >= 0.0 || gap(hi)? <= 0.0 {
        return Err(Error::Config("bounds do not cross in (1e-6, 0.5)".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunConfig {
        RunConfig {
            m: 2000,
            duration: 20,
            ..RunConfig::default()
        }
    }

    #[test]
    fn defaults_match_the_evaluation() {
        let c = RunConfig::default();
        assert_eq!((c.m, c.p, c.r, c.duration), (20_000, 0.001, 5.0, 150));
        assert_eq!(c.r_interval(), 60.0);
        c.validate().unwrap();
    }

    #[test]
    fn toml_round_trip_and_line_errors() {
        let c = small();
        let text = c.to_toml();
        assert_eq!(RunConfig::from_toml(&text, Path::new("c.toml")).unwrap(), c);
        let bad = "m = 100\np = 1.5\n";
        match RunConfig::from_toml(bad, Path::new("c.toml")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match RunConfig::from_toml("m = 100\n\nbogus = 1\n", Path::new("c.toml")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sweep_parsing() {
        let s = Sweep::parse("p", "0.0005, 0.001,0.005,0.01").unwrap();
        assert_eq!(s, Sweep::default_for(SweepAxis::P));
        assert!(Sweep::parse("q", "1").is_err());
        assert!(Sweep::parse("m", "1,x").is_err());
    }

    #[test]
    fn instance_has_one_record_per_interval() {
        let cfg = small();
        let res = run_instance(&cfg, 3, &McsTable::default()).unwrap();
        assert_eq!(res.records.len(), 5);
        for recs in res.records.values() {
            assert_eq!(recs.len(), 20);
        }
        for r in &res.records[&SchemeKind::Optimal] {
            assert!(r.actual_pct <= cfg.p);
        }
    }

    #[test]
    fn grid_and_crossover() {
        let (e, f) = grid_minimizer(1e-2, 400.0, 50).unwrap();
        assert!((e - 0.5).abs() <= 1.0 / 51.0 && (f - 0.5).abs() <= 1.0 / 51.0);
        assert!((crossover_point(400.0).unwrap() - 1.0 / 49.0).abs() < 1e-9);
    }
}
