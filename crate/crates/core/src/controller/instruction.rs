use std::io::Write;

use rand::Rng;

use crate::error::{Error, Result};
use crate::snr::SnrBin;

/// Report probability for SNR values in `[lower_db, upper_db)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRange {
    pub lower_db: f64,
    pub upper_db: f64,
    pub probability: f64,
}

/// Broadcast directive for one reporting interval: each UE looks up the range
/// holding its SNR and reports with that range's probability.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupInstruction {
    interval: u32,
    ranges: Vec<ReportRange>,
}

impl GroupInstruction {
    /// Ranges must be ordered, contiguous, and cover the whole SNR axis.
    pub fn new(interval: u32, ranges: Vec<ReportRange>) -> Result<Self> {
        let (first, last) = match (ranges.first(), ranges.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::InvalidInstruction("no ranges".into())),
        };
        if first.lower_db != f64::NEG_INFINITY || last.upper_db != f64::INFINITY {
            return Err(Error::InvalidInstruction(
                "ranges must extend to -inf and +inf".into(),
            ));
        }
        for pair in ranges.windows(2) {
            if pair[0].upper_db != pair[1].lower_db {
                return Err(Error::InvalidInstruction(format!(
                    "gap or overlap at {} / {} dB",
                    pair[0].upper_db, pair[1].lower_db
                )));
            }
        }
        for r in &ranges {
            if !(r.lower_db < r.upper_db) {
                return Err(Error::InvalidInstruction(format!(
                    "empty range [{}, {})",
                    r.lower_db, r.upper_db
                )));
            }
            if !(0.0..=1.0).contains(&r.probability) {
                return Err(Error::InvalidInstruction(format!(
                    "probability {} outside [0, 1]",
                    r.probability
                )));
            }
        }
        Ok(Self { interval, ranges })
    }

    /// Every UE reports with probability `q`.
    pub fn single(interval: u32, q: f64) -> Result<Self> {
        Self::new(
            interval,
            vec![ReportRange {
                lower_db: f64::NEG_INFINITY,
                upper_db: f64::INFINITY,
                probability: q,
            }],
        )
    }

    /// UEs below `boundary` report with `q_low`, the rest with `q_high`.
    pub fn two_groups(interval: u32, boundary: SnrBin, q_low: f64, q_high: f64) -> Result<Self> {
        let edge = boundary.lower_edge_db();
        Self::new(
            interval,
            vec![
                ReportRange {
                    lower_db: f64::NEG_INFINITY,
                    upper_db: edge,
                    probability: q_low,
                },
                ReportRange {
                    lower_db: edge,
                    upper_db: f64::INFINITY,
                    probability: q_high,
                },
            ],
        )
    }

    pub fn interval(&self) -> u32 {
        self.interval
    }

    pub fn ranges(&self) -> &[ReportRange] {
        &self.ranges
    }

    pub fn probability_for(&self, h_db: f64) -> Result<f64> {
        self.ranges
            .iter()
            .find(|r| r.lower_db <= h_db && h_db < r.upper_db)
            .map(|r| r.probability)
            .ok_or(Error::Uncovered(h_db))
    }

    /// One trace line: `interval;lower:upper:probability;...`.
    pub fn write_trace_line<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "{}", self.interval)?;
        for r in &self.ranges {
            write!(out, ";{}:{}:{}", r.lower_db, r.upper_db, r.probability)?;
        }
        writeln!(out)?;
        Ok(())
    }
}

/// One UE's SNR report for one interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QosReport {
    pub ue: u32,
    pub snr: SnrBin,
    pub interval: u32,
}

/// Decides whether UE `ue` with SNR `h` reports under `instruction`.
///
/// Always consumes exactly one uniform from `rng`, so the decision stream of
/// a scheme stays aligned with the UE order whatever the probabilities are.
pub fn ue_decide<R: Rng + ?Sized>(
    instruction: &GroupInstruction,
    ue: u32,
    h: SnrBin,
    rng: &mut R,
) -> Result<Option<QosReport>> {
    let u: f64 = rng.random();
    let q = instruction.probability_for(h.lower_edge_db())?;
    Ok((u < q).then_some(QosReport {
        ue,
        snr: h,
        interval: instruction.interval,
    }))
}

/// Runs [`ue_decide`] for every active UE of an interval, in id order.
pub fn collect_reports<R: Rng + ?Sized>(
    instruction: &GroupInstruction,
    ues: &[u32],
    snr: &[SnrBin],
    rng: &mut R,
) -> Result<Vec<QosReport>> {
    let mut out = Vec::new();
    for (&ue, &h) in ues.iter().zip(snr) {
        if let Some(report) = ue_decide(instruction, ue, h, rng)? {
            out.push(report);
        }
    }
    Ok(out)
}
