//! Per-interval feedback loops: DyMo and the Optimal, Uniform and
//! Order-Statistics baselines.
//!
//! Every scheme publishes an SNR threshold `s(t)` per reporting interval.
//! Reporting schemes broadcast a [`GroupInstruction`], collect the
//! [`QosReport`]s it triggers among the active UEs, and update their
//! estimate; the oracle schemes read the population directly.

mod baselines;
mod dymo;
mod instruction;
mod mcs;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use baselines::{optimal_step, uniform_population, uniform_threshold, OrderStatsState};
pub use dymo::{dymo_bootstrap, DymoConfig, DymoDiagnostics, DymoState};
pub use instruction::{collect_reports, ue_decide, GroupInstruction, QosReport, ReportRange};
pub use mcs::{mcs_from_threshold, McsChoice, McsRow, McsTable};

use crate::error::{Error, Result};
use crate::snr::{HistogramRange, SnrBin};
use crate::venue::{IntervalSnapshot, VenueGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Dymo,
    Optimal,
    Uniform,
    OrderStatsHist,
    OrderStatsNohist,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 5] = [
        SchemeKind::Dymo,
        SchemeKind::Optimal,
        SchemeKind::Uniform,
        SchemeKind::OrderStatsHist,
        SchemeKind::OrderStatsNohist,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Dymo => "dymo",
            SchemeKind::Optimal => "optimal",
            SchemeKind::Uniform => "uniform",
            SchemeKind::OrderStatsHist => "order_stats_hist",
            SchemeKind::OrderStatsNohist => "order_stats_nohist",
        }
    }

    /// Whether the scheme relies on UE reports.
    pub fn reports(self) -> bool {
        matches!(
            self,
            SchemeKind::Dymo | SchemeKind::OrderStatsHist | SchemeKind::OrderStatsNohist
        )
    }

    /// Index used to derive the scheme's decision stream.
    pub fn stream_index(self) -> u32 {
        self as u32
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme `{s}`")))
    }
}

/// What a scheme published for one interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    pub s: SnrBin,
    pub reports: usize,
    /// No usable reports arrived; the previous threshold was held.
    pub starved: bool,
}

/// Inputs shared by every scheme of one run.
#[derive(Debug, Clone, Copy)]
pub struct SchemeSetup<'a> {
    pub p: f64,
    pub r_interval: f64,
    pub lipschitz_db: f64,
    pub alpha: f64,
    /// Population guess for DyMo's first interval.
    pub m_prior: f64,
    /// Time-averaged active population, known to Order-Statistics.
    pub expected_active: f64,
    pub range: HistogramRange,
    pub smooth_threshold: bool,
    /// Mean-SNR map known to Uniform.
    pub grid: &'a VenueGrid,
    pub sigma_db: f64,
}

#[derive(Debug, Clone)]
pub enum SchemeState {
    Dymo(DymoState),
    Optimal { p: f64, range: HistogramRange },
    Uniform { s: SnrBin },
    OrderStats { kind: SchemeKind, state: OrderStatsState },
}

impl SchemeState {
    pub fn new(kind: SchemeKind, setup: &SchemeSetup<'_>) -> Result<Self> {
        Ok(match kind {
            SchemeKind::Dymo => SchemeState::Dymo(DymoState::new(DymoConfig {
                p: setup.p,
                r_interval: setup.r_interval,
                lipschitz_db: setup.lipschitz_db,
                alpha: setup.alpha,
                m_prior: setup.m_prior,
                range: setup.range,
                smooth_threshold: setup.smooth_threshold,
            })?),
            SchemeKind::Optimal => SchemeState::Optimal {
                p: setup.p,
                range: setup.range,
            },
            SchemeKind::Uniform => SchemeState::Uniform {
                s: uniform_threshold(setup.grid, setup.sigma_db, setup.p, setup.range)?,
            },
            SchemeKind::OrderStatsHist | SchemeKind::OrderStatsNohist => SchemeState::OrderStats {
                kind,
                state: OrderStatsState::new(
                    setup.p,
                    setup.r_interval,
                    setup.expected_active,
                    kind == SchemeKind::OrderStatsHist,
                    setup.alpha,
                    setup.range,
                )?,
            },
        })
    }

    pub fn kind(&self) -> SchemeKind {
        match self {
            SchemeState::Dymo(_) => SchemeKind::Dymo,
            SchemeState::Optimal { .. } => SchemeKind::Optimal,
            SchemeState::Uniform { .. } => SchemeKind::Uniform,
            SchemeState::OrderStats { kind, .. } => *kind,
        }
    }

    /// Instruction in force for the next interval, for reporting schemes.
    pub fn instruction(&self) -> Option<&GroupInstruction> {
        match self {
            SchemeState::Dymo(d) => Some(d.instruction()),
            SchemeState::OrderStats { state, .. } => Some(state.instruction()),
            _ => None,
        }
    }

    /// Runs one interval: collects reports under the current instruction
    /// (one uniform per active UE from `rng`) and publishes `s(t)`.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        snapshot: &IntervalSnapshot,
        rng: &mut R,
    ) -> Result<StepOutcome> {
        match self {
            SchemeState::Dymo(state) => {
                let reports =
                    collect_reports(state.instruction(), &snapshot.ues, &snapshot.snr, rng)?;
                state.step(&reports)
            }
            SchemeState::OrderStats { state, .. } => {
                let reports =
                    collect_reports(state.instruction(), &snapshot.ues, &snapshot.snr, rng)?;
                state.step(&reports)
            }
            SchemeState::Optimal { p, range } => Ok(StepOutcome {
                s: optimal_step(&snapshot.snr, *p, *range)?,
                reports: 0,
                starved: false,
            }),
            SchemeState::Uniform { s } => Ok(StepOutcome {
                s: *s,
                reports: 0,
                starved: false,
            }),
        }
    }
}
