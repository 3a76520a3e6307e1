//! Evaluation quantities: the actual percentile of a published threshold,
//! outlier counts, report overhead, and RMSE summaries across instances.

use std::collections::BTreeMap;
use std::io::Write;

use crate::controller::SchemeKind;
use crate::error::{Error, Result};
use crate::snr::SnrBin;

pub const INTERVAL_HEADER: &str =
    "t,scheme,s_est_db,actual_pct,outliers,reports,overhead_violation,mcs,spec_eff";
pub const SUMMARY_HEADER: &str =
    "param,value,scheme,pct_rmse,thr_rmse_db,outlier_rmse,overhead_rmse";

/// One scheme's outcome for one reporting interval.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalRecord {
    pub t: u32,
    pub scheme: SchemeKind,
    pub s_est: SnrBin,
    /// Fraction of active UEs strictly below `s_est`.
    pub actual_pct: f64,
    /// Active UEs strictly below `s_est`.
    pub outliers: u64,
    pub reports: u64,
    /// `max(0, reports - r_interval)`.
    pub overhead_violation: f64,
    pub mcs: u32,
    pub spec_eff: f64,
    pub m_active: u64,
    pub starved: bool,
}

impl IntervalRecord {
    pub fn write_csv_row<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            self.t,
            self.scheme,
            self.s_est,
            self.actual_pct,
            self.outliers,
            self.reports,
            self.overhead_violation,
            self.mcs,
            self.spec_eff
        )?;
        Ok(())
    }
}

pub fn write_interval_csv<W: Write>(records: &[IntervalRecord], mut out: W) -> Result<()> {
    writeln!(out, "{INTERVAL_HEADER}")?;
    for r in records {
        r.write_csv_row(&mut out)?;
    }
    Ok(())
}

/// Number of active UEs strictly below `s`.
pub fn count_below(s: SnrBin, active: &[SnrBin]) -> u64 {
    active.iter().filter(|&&h| h < s).count() as u64
}

/// `|{v : h_v < s}| / m(t)`.
pub fn actual_percentile(s: SnrBin, active: &[SnrBin]) -> Result<f64> {
    if active.is_empty() {
        return Err(Error::InsufficientData("no active UEs"));
    }
    Ok(count_below(s, active) as f64 / active.len() as f64)
}

pub fn overhead_violation(reports: u64, r_interval: f64) -> f64 {
    (reports as f64 - r_interval).max(0.0)
}

pub fn rmse(values: &[f64], targets: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InsufficientData("empty series"));
    }
    if values.len() != targets.len() {
        return Err(Error::Config(format!(
            "series lengths differ: {} vs {}",
            values.len(),
            targets.len()
        )));
    }
    let sum: f64 = values
        .iter()
        .zip(targets)
        .map(|(v, t)| (v - t) * (v - t))
        .sum();
    Ok((sum / values.len() as f64).sqrt())
}

/// RMSEs of one scheme over one run, or their mean over several runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeSummary {
    pub scheme: SchemeKind,
    /// Actual percentile against `p`.
    pub pct_rmse: f64,
    /// Threshold against Optimal's, in dB.
    pub thr_rmse_db: f64,
    /// Outliers against the permitted `p * m(t)`, in units of `p * m(t)`.
    pub outlier_rmse: f64,
    /// Reports in excess of `r_interval`; `None` for schemes that take no
    /// reports. Unused budget is not penalized.
    pub overhead_rmse: Option<f64>,
}

/// Per-scheme RMSEs of one run. `records` must hold the Optimal series,
/// which is the threshold reference.
pub fn summarize_run(
    records: &BTreeMap<SchemeKind, Vec<IntervalRecord>>,
    p: f64,
    r_interval: f64,
) -> Result<Vec<SchemeSummary>> {
    let optimal = records
        .get(&SchemeKind::Optimal)
        .ok_or_else(|| Error::Config("threshold RMSE needs the optimal scheme".into()))?;
    let reference: BTreeMap<u32, f64> = optimal
        .iter()
        .map(|r| (r.t, r.s_est.lower_edge_db()))
        .collect();
    let mut out = Vec::with_capacity(records.len());
    for (&scheme, series) in records {
        let pct: Vec<f64> = series.iter().map(|r| r.actual_pct).collect();
        let s: Vec<f64> = series.iter().map(|r| r.s_est.lower_edge_db()).collect();
        let thr_target: Vec<f64> = series
            .iter()
            .map(|r| {
                reference
                    .get(&r.t)
                    .copied()
                    .ok_or_else(|| Error::Config(format!("no optimal record for t = {}", r.t)))
            })
            .collect::<Result<_>>()?;
        let outlier_rel: Vec<f64> = series
            .iter()
            .map(|r| {
                let allowed = p * r.m_active as f64;
                (r.outliers as f64 - allowed) / allowed
            })
            .collect();
        let overhead_rmse = if scheme.reports() {
            let excess: Vec<f64> = series
                .iter()
                .map(|r| overhead_violation(r.reports, r_interval))
                .collect();
            Some(rmse(&excess, &vec![0.0; excess.len()])?)
        } else {
            None
        };
        out.push(SchemeSummary {
            scheme,
            pct_rmse: rmse(&pct, &vec![p; pct.len()])?,
            thr_rmse_db: rmse(&s, &thr_target)?,
            outlier_rmse: rmse(&outlier_rel, &vec![0.0; outlier_rel.len()])?,
            overhead_rmse,
        });
    }
    Ok(out)
}

/// Order-independent mean.
fn mean(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

/// Mean of each RMSE across instances, per scheme. Insensitive to the
/// order of the instances.
pub fn aggregate_runs(runs: &[Vec<SchemeSummary>]) -> Result<Vec<SchemeSummary>> {
    if runs.is_empty() {
        return Err(Error::InsufficientData("no runs to aggregate"));
    }
    let mut by_scheme: BTreeMap<SchemeKind, Vec<SchemeSummary>> = BTreeMap::new();
    for run in runs {
        for s in run {
            by_scheme.entry(s.scheme).or_default().push(*s);
        }
    }
    by_scheme
        .into_iter()
        .map(|(scheme, list)| {
            if list.len() != runs.len() {
                return Err(Error::Config(format!(
                    "scheme {scheme} missing from some instances"
                )));
            }
            let col = |f: fn(&SchemeSummary) -> f64| {
                let mut v: Vec<f64> = list.iter().map(f).collect();
                mean(&mut v)
            };
            let pct_rmse = col(|s| s.pct_rmse);
            let thr_rmse_db = col(|s| s.thr_rmse_db);
            let outlier_rmse = col(|s| s.outlier_rmse);
            let overhead_rmse = if list.iter().all(|s| s.overhead_rmse.is_some()) {
                Some(col(|s| s.overhead_rmse.unwrap_or_default()))
            } else {
                None
            };
            Ok(SchemeSummary {
                scheme,
                pct_rmse,
                thr_rmse_db,
                outlier_rmse,
                overhead_rmse,
            })
        })
        .collect()
}

/// One summary CSV row: a scheme's aggregate at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub param: String,
    pub value: String,
    pub summary: SchemeSummary,
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], mut out: W) -> Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for row in rows {
        let s = &row.summary;
        let overhead = s.overhead_rmse.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.param, row.value, s.scheme, s.pct_rmse, s.thr_rmse_db, s.outlier_rmse, overhead
        )?;
    }
    Ok(())
}
