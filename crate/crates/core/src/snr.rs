//! SNR quantization and fixed-width histograms.
//!
//! Reports carry SNR at 0.1 dB resolution, so bins are addressed by integer
//! tenths of a dB ([`SnrBin`]). No bin arithmetic touches floating point,
//! which keeps histograms bit-identical across platforms.
//!
//! Quantiles are read off as the lower edge of the bin holding the p-quantile
//! mass. The mass strictly below the returned edge therefore never exceeds
//! `p`; that conservative rounding applies to every scheme alike.

use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};
use crate::estimation::{check_alpha, CUMULATIVE_EPS};

pub const BIN_WIDTH_DB: f64 = 0.1;
const BINS_PER_DB: f64 = 10.0;

/// A 0.1 dB bin, identified by its lower edge in tenths of a dB.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SnrBin(pub i32);

impl SnrBin {
    pub fn lower_edge_db(self) -> f64 {
        f64::from(self.0) / BINS_PER_DB
    }

    pub fn upper_edge_db(self) -> f64 {
        f64::from(self.0 + 1) / BINS_PER_DB
    }

    /// Shifts by a whole number of bins.
    pub fn offset(self, bins: i32) -> SnrBin {
        SnrBin(self.0.saturating_add(bins))
    }

    /// The bin `db` decibels above this one, rounded down to the grid.
    pub fn offset_db(self, db: f64) -> SnrBin {
        self.offset(db_to_tenths_floor(db))
    }
}

impl fmt::Display for SnrBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.1}", self.lower_edge_db())
    }
}

/// Floors `snr_db` to its 0.1 dB bin. A value on a bin edge belongs to the
/// bin it opens, also when the decimal edge is not exactly representable.
pub fn quantize(snr_db: f64) -> Result<SnrBin> {
    if !snr_db.is_finite() {
        return Err(Error::NonFinite(snr_db));
    }
    Ok(SnrBin(db_to_tenths_floor(snr_db)))
}

fn db_to_tenths_floor(db: f64) -> i32 {
    let scaled = db * BINS_PER_DB;
    let nearest = scaled.round();
    let tenths = if (scaled - nearest).abs() < 1e-9 {
        nearest
    } else {
        scaled.floor()
    };
    tenths.clamp(f64::from(i32::MIN / 2), f64::from(i32::MAX / 2)) as i32
}

/// Covered SNR span `[min, max)`; samples outside are clamped to the edge bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HistogramRange {
    lo: SnrBin,
    hi: SnrBin,
}

impl HistogramRange {
    pub fn new(min_db: f64, max_db: f64) -> Result<Self> {
        let lo = quantize(min_db)?;
        let hi = quantize(max_db)?;
        if hi <= lo {
            return Err(Error::Config(format!(
                "histogram range [{min_db}, {max_db}) is empty"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn min_bin(&self) -> SnrBin {
        self.lo
    }

    /// Last bin inside the range.
    pub fn max_bin(&self) -> SnrBin {
        SnrBin(self.hi.0 - 1)
    }

    pub fn min_db(&self) -> f64 {
        self.lo.lower_edge_db()
    }

    pub fn max_db(&self) -> f64 {
        self.hi.lower_edge_db()
    }

    pub fn bins(&self) -> usize {
        (self.hi.0 - self.lo.0) as usize
    }

    pub fn clamp(&self, bin: SnrBin) -> SnrBin {
        SnrBin(bin.0.clamp(self.lo.0, self.hi.0 - 1))
    }
}

impl Default for HistogramRange {
    fn default() -> Self {
        Self {
            lo: SnrBin(-100),
            hi: SnrBin(400),
        }
    }
}

/// Nonnegative weight per 0.1 dB bin.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrHistogram {
    range: HistogramRange,
    weights: Vec<f64>,
    clamped: u64,
}

impl SnrHistogram {
    pub fn new(range: HistogramRange) -> Self {
        Self {
            range,
            weights: vec![0.0; range.bins()],
            clamped: 0,
        }
    }

    pub fn from_bins<I: IntoIterator<Item = SnrBin>>(range: HistogramRange, bins: I) -> Self {
        let mut h = Self::new(range);
        for b in bins {
            h.add(b, 1.0);
        }
        h
    }

    pub fn range(&self) -> HistogramRange {
        self.range
    }

    /// Adds `weight` to `bin`, clamping out-of-range bins to the edges.
    pub fn add(&mut self, bin: SnrBin, weight: f64) {
        debug_assert!(weight >= 0.0 && weight.is_finite());
        let clamped = self.range.clamp(bin);
        if clamped != bin {
            self.clamped += 1;
        }
        self.weights[(clamped.0 - self.range.lo.0) as usize] += weight;
    }

    pub fn add_db(&mut self, snr_db: f64, weight: f64) -> Result<()> {
        self.add(quantize(snr_db)?, weight);
        Ok(())
    }

    /// Number of additions that fell outside the range and were clamped.
    pub fn clamped(&self) -> u64 {
        self.clamped
    }

    pub fn weight(&self, bin: SnrBin) -> f64 {
        if bin < self.range.lo || bin >= self.range.hi {
            return 0.0;
        }
        self.weights[(bin.0 - self.range.lo.0) as usize]
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() <= 0.0
    }

    /// Weight in bins strictly below `bin`.
    pub fn mass_below(&self, bin: SnrBin) -> f64 {
        let end = (bin.0.clamp(self.range.lo.0, self.range.hi.0) - self.range.lo.0) as usize;
        self.weights[..end].iter().sum()
    }

    /// Copy with every bin at or above `bin` emptied.
    pub fn restricted_below(&self, bin: SnrBin) -> SnrHistogram {
        let end = (bin.0.clamp(self.range.lo.0, self.range.hi.0) - self.range.lo.0) as usize;
        let mut out = self.clone();
        out.weights[end..].iter_mut().for_each(|w| *w = 0.0);
        out
    }

    pub fn scale(&mut self, factor: f64) {
        self.weights.iter_mut().for_each(|w| *w *= factor);
    }

    /// Nonempty bins in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = (SnrBin, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(i, &w)| (SnrBin(self.range.lo.0 + i as i32), w))
    }

    /// Lower edge of the bin holding the p-quantile mass.
    pub fn quantile(&self, p: f64) -> Result<SnrBin> {
        histogram_quantile(self, p)
    }

    /// Writes `bin_lower_edge_db,weight` rows for every bin.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "bin_lower_edge_db,weight")?;
        for (i, w) in self.weights.iter().enumerate() {
            let bin = SnrBin(self.range.lo.0 + i as i32);
            writeln!(out, "{bin},{w}")?;
        }
        Ok(())
    }
}

/// Lower edge of the first bin at which the cumulative weight reaches
/// `p * total`.
pub fn histogram_quantile(hist: &SnrHistogram, p: f64) -> Result<SnrBin> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(crate::error::domain("p", p, "0 < p <= 1"));
    }
    let total = hist.total();
    if total <= 0.0 {
        return Err(Error::InsufficientData("histogram carries no weight"));
    }
    let target = p * total * (1.0 - CUMULATIVE_EPS);
    let mut cum = 0.0;
    let mut last = None;
    for (i, &w) in hist.weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        cum += w;
        last = Some(i);
        if cum >= target {
            return Ok(SnrBin(hist.range.lo.0 + i as i32));
        }
    }
    let i = last.expect("positive total implies a nonempty bin");
    Ok(SnrBin(hist.range.lo.0 + i as i32))
}

/// Per-bin `alpha * fresh + (1 - alpha) * previous`.
pub fn merge_smoothed(
    previous: &SnrHistogram,
    fresh: &SnrHistogram,
    alpha: f64,
) -> Result<SnrHistogram> {
    check_alpha(alpha)?;
    if previous.range != fresh.range {
        return Err(Error::GeometryMismatch(
            previous.range.lo.0,
            previous.range.hi.0,
            fresh.range.lo.0,
            fresh.range.hi.0,
        ));
    }
    let weights = previous
        .weights
        .iter()
        .zip(&fresh.weights)
        .map(|(&old, &new)| alpha * new + (1.0 - alpha) * old)
        .collect();
    Ok(SnrHistogram {
        range: fresh.range,
        weights,
        clamped: previous.clamped + fresh.clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_floors() {
        assert_eq!(quantize(17.25).unwrap(), SnrBin(172));
        assert_eq!(quantize(17.2).unwrap(), SnrBin(172));
        assert_eq!(quantize(-3.07).unwrap(), SnrBin(-31));
        assert_eq!(quantize(-3.0).unwrap(), SnrBin(-30));
        assert_eq!(quantize(0.3).unwrap(), SnrBin(3));
        assert_eq!(quantize(-0.05).unwrap(), SnrBin(-1));
        assert!(quantize(f64::NAN).is_err());
        assert!(quantize(f64::INFINITY).is_err());
    }

    #[test]
    fn edges_round_trip() {
        for tenths in -400..400 {
            let bin = SnrBin(tenths);
            assert_eq!(quantize(bin.lower_edge_db()).unwrap(), bin);
        }
        assert_eq!(SnrBin(49).lower_edge_db(), 4.9);
        assert_eq!(SnrBin(-20).offset_db(5.0), SnrBin(30));
    }

    #[test]
    fn single_bin_quantile() {
        let range = HistogramRange::default();
        let mut h = SnrHistogram::new(range);
        h.add(SnrBin(100), 100.0);
        assert_eq!(h.quantile(0.001).unwrap().lower_edge_db(), 10.0);
    }

    #[test]
    fn uniform_bins_median() {
        let range = HistogramRange::default();
        let h = SnrHistogram::from_bins(range, (0..100).map(SnrBin));
        assert_eq!(h.quantile(0.5).unwrap().lower_edge_db(), 4.9);
        assert_eq!(h.quantile(1.0).unwrap(), SnrBin(99));
        assert_eq!(h.quantile(0.001).unwrap(), SnrBin(0));
    }

    #[test]
    fn empty_histogram_errors() {
        let h = SnrHistogram::new(HistogramRange::default());
        assert!(matches!(h.quantile(0.5), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn clamping_counts() {
        let mut h = SnrHistogram::new(HistogramRange::default());
        h.add(SnrBin(-500), 1.0);
        h.add(SnrBin(1000), 1.0);
        h.add(SnrBin(0), 1.0);
        assert_eq!(h.clamped(), 2);
        assert_eq!(h.weight(SnrBin(-100)), 1.0);
        assert_eq!(h.weight(SnrBin(399)), 1.0);
    }

    #[test]
    fn masses_and_restriction() {
        let h = SnrHistogram::from_bins(HistogramRange::default(), (0..10).map(SnrBin));
        assert_eq!(h.mass_below(SnrBin(5)), 5.0);
        assert_eq!(h.mass_below(SnrBin(-1000)), 0.0);
        assert_eq!(h.mass_below(SnrBin(1000)), 10.0);
        let r = h.restricted_below(SnrBin(3));
        assert_eq!(r.total(), 3.0);
        assert_eq!(r.quantile(1.0).unwrap(), SnrBin(2));
    }

    #[test]
    fn smoothing_merge() {
        let range = HistogramRange::default();
        let zero = SnrHistogram::new(range);
        let fresh = SnrHistogram::from_bins(range, [SnrBin(3), SnrBin(3), SnrBin(8)]);
        let halved = merge_smoothed(&zero, &fresh, 0.5).unwrap();
        assert_eq!(halved.weight(SnrBin(3)), 1.0);
        assert_eq!(halved.weight(SnrBin(8)), 0.5);
        assert_eq!(merge_smoothed(&zero, &fresh, 1.0).unwrap(), fresh);
        assert_eq!(merge_smoothed(&fresh, &fresh, 0.3).unwrap().total(), fresh.total());
        let other = SnrHistogram::new(HistogramRange::new(-20.0, 40.0).unwrap());
        assert!(matches!(
            merge_smoothed(&other, &fresh, 0.5),
            Err(Error::GeometryMismatch(..))
        ));
    }

    #[test]
    fn csv_dump() {
        let range = HistogramRange::new(0.0, 0.3).unwrap();
        let h = SnrHistogram::from_bins(range, [SnrBin(1)]);
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "bin_lower_edge_db,weight\n0.0,0\n0.1,1\n0.2,0\n"
        );
    }
}
