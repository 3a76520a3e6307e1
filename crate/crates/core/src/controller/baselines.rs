use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{domain, Result};
use crate::estimation::check_alpha;
use crate::snr::{histogram_quantile, merge_smoothed, HistogramRange, SnrBin, SnrHistogram};
use crate::venue::VenueGrid;

use super::instruction::{GroupInstruction, QosReport};
use super::StepOutcome;

/// Order-Statistics: every UE reports with a fixed `r_interval / E[m(t)]`.
#[derive(Debug, Clone)]
pub struct OrderStatsState {
    p: f64,
    alpha: f64,
    with_history: bool,
    range: HistogramRange,
    instruction: GroupInstruction,
    hist: Option<SnrHistogram>,
    s: SnrBin,
}

impl OrderStatsState {
    pub fn new(
        p: f64,
        r_interval: f64,
        expected_m: f64,
        with_history: bool,
        alpha: f64,
        range: HistogramRange,
    ) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(domain("p", p, "0 < p < 1"));
        }
        if !(expected_m > 0.0 && expected_m.is_finite()) {
            return Err(domain("E[m]", expected_m, "E[m] > 0"));
        }
        if !(r_interval > 0.0) {
            return Err(domain("r", r_interval, "r > 0"));
        }
        check_alpha(alpha)?;
        Ok(Self {
            p,
            alpha,
            with_history,
            range,
            instruction: GroupInstruction::single(0, (r_interval / expected_m).min(1.0))?,
            hist: None,
            s: range.min_bin(),
        })
    }

    pub fn instruction(&self) -> &GroupInstruction {
        &self.instruction
    }

    pub fn rate(&self) -> f64 {
        self.instruction.ranges()[0].probability
    }

    pub fn threshold(&self) -> SnrBin {
        self.s
    }

    pub fn step(&mut self, reports: &[QosReport]) -> Result<StepOutcome> {
        let interval = self.instruction.interval();
        self.instruction = GroupInstruction::single(interval + 1, self.rate())?;
        if reports.is_empty() {
            return Ok(StepOutcome {
                s: self.s,
                reports: 0,
                starved: true,
            });
        }
        let fresh = SnrHistogram::from_bins(self.range, reports.iter().map(|r| r.snr));
        let hist = match (&self.hist, self.with_history) {
            (Some(prev), true) => merge_smoothed(prev, &fresh, self.alpha)?,
            _ => fresh,
        };
        self.s = histogram_quantile(&hist, self.p)?;
        self.hist = Some(hist);
        Ok(StepOutcome {
            s: self.s,
            reports: reports.len(),
            starved: false,
        })
    }
}

/// Exact p-quantile of the active UEs' quantized SNRs.
pub fn optimal_step(snr: &[SnrBin], p: f64, range: HistogramRange) -> Result<SnrBin> {
    histogram_quantile(&SnrHistogram::from_bins(range, snr.iter().copied()), p)
}

/// Static threshold assuming one UE per rectangle, each with a
/// Gaussian(mean, `sigma_db`) SNR, quantized to the histogram bins.
pub fn uniform_threshold(
    grid: &VenueGrid,
    sigma_db: f64,
    p: f64,
    range: HistogramRange,
) -> Result<SnrBin> {
    let hist = uniform_population(grid, sigma_db, range)?;
    histogram_quantile(&hist, p)
}

/// Expected histogram of the uniform-placement population. Tail mass
/// beyond the range lands in the edge bins, like clamped reports.
pub fn uniform_population(
    grid: &VenueGrid,
    sigma_db: f64,
    range: HistogramRange,
) -> Result<SnrHistogram> {
    let mut hist = SnrHistogram::new(range);
    let (lo, hi) = (range.min_bin().0, range.max_bin().0);
    for &mean in grid.means() {
        if sigma_db == 0.0 {
            hist.add(crate::snr::quantize(mean)?, 1.0);
            continue;
        }
        let normal = Normal::new(mean, sigma_db).map_err(|_| domain("sigma", sigma_db, "sigma >= 0"))?;
        let mut below = 0.0;
        for b in lo..hi {
            let cdf = normal.cdf(SnrBin(b + 1).lower_edge_db());
            hist.add(SnrBin(b), cdf - below);
            below = cdf;
        }
        hist.add(SnrBin(hi), 1.0 - below);
    }
    Ok(hist)
}
