use crate::error::{domain, Result};
use crate::estimation::{check_alpha, estimate_subpopulation_fraction, exp_smooth, FractionEstimate};
use crate::snr::{histogram_quantile, merge_smoothed, quantize, HistogramRange, SnrBin, SnrHistogram};

use super::instruction::{GroupInstruction, QosReport};
use super::StepOutcome;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DymoConfig {
    pub p: f64,
    /// Report budget per interval.
    pub r_interval: f64,
    pub lipschitz_db: f64,
    pub alpha: f64,
    /// Population guess used for the bootstrap interval only.
    pub m_prior: f64,
    pub range: HistogramRange,
    /// Also smooth the published threshold, on top of the distribution.
    pub smooth_threshold: bool,
}

impl DymoConfig {
    pub fn new(p: f64, r_interval: f64, m_prior: f64) -> Self {
        Self {
            p,
            r_interval,
            lipschitz_db: 5.0,
            alpha: 0.5,
            m_prior,
            range: HistogramRange::default(),
            smooth_threshold: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(domain("p", self.p, "0 < p < 1"));
        }
        if !(self.r_interval > 0.0 && self.r_interval.is_finite()) {
            return Err(domain("r", self.r_interval, "r > 0"));
        }
        if !(self.lipschitz_db >= 0.0 && self.lipschitz_db.is_finite()) {
            return Err(domain("L", self.lipschitz_db, "L >= 0"));
        }
        if !(self.m_prior > 0.0 && self.m_prior.is_finite()) {
            return Err(domain("m_prior", self.m_prior, "m_prior > 0"));
        }
        check_alpha(self.alpha)
    }

    fn lipschitz_bins(&self) -> i32 {
        (self.lipschitz_db * 10.0).round() as i32
    }
}

/// Single all-SNR group reporting with `min(1, r_interval / m_guess)`.
pub fn dymo_bootstrap(r_interval: f64, m_guess: f64) -> Result<GroupInstruction> {
    if !(m_guess > 0.0) {
        return Err(domain("m_guess", m_guess, "m_guess > 0"));
    }
    GroupInstruction::single(0, (r_interval / m_guess).min(1.0))
}

/// Per-interval diagnostics of the DyMo loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DymoDiagnostics {
    /// Boundary used this interval; `None` during the bootstrap.
    pub boundary: Option<SnrBin>,
    pub q_low: f64,
    pub q_high: f64,
    pub reports_low: usize,
    pub reports_high: usize,
    /// Fresh fraction below the boundary, from this interval's reports only.
    pub fresh_fraction: Option<FractionEstimate>,
    pub m_hat: f64,
    pub p_l_hat: f64,
    /// Quantile level inside the monitored band.
    pub p_prime: f64,
    pub x_hat: Option<SnrBin>,
}

/// Iterative estimation with two stochastic groups split at `s + L`.
#[derive(Debug, Clone)]
pub struct DymoState {
    cfg: DymoConfig,
    instruction: GroupInstruction,
    boundary: Option<SnrBin>,
    q_low: f64,
    q_high: f64,
    hist: Option<SnrHistogram>,
    s: Option<SnrBin>,
    m_hat: f64,
    p_l_hat: f64,
    last: Option<DymoDiagnostics>,
}

impl DymoState {
    pub fn new(cfg: DymoConfig) -> Result<Self> {
        cfg.validate()?;
        let instruction = dymo_bootstrap(cfg.r_interval, cfg.m_prior)?;
        let q = instruction.ranges()[0].probability;
        Ok(Self {
            cfg,
            instruction,
            boundary: None,
            q_low: q,
            q_high: q,
            hist: None,
            s: None,
            m_hat: cfg.m_prior,
            p_l_hat: 0.0,
            last: None,
        })
    }

    /// Skips the bootstrap: starts with threshold `s`, a boundary at `s + L`,
    /// and rates derived from the given `p_l` and `m`.
    pub fn seeded(cfg: DymoConfig, s: SnrBin, p_l: f64, m: f64) -> Result<Self> {
        cfg.validate()?;
        if !(0.0..=1.0).contains(&p_l) {
            return Err(domain("p_L", p_l, "0 <= p_L <= 1"));
        }
        let mut state = Self::new(cfg)?;
        state.s = Some(s);
        state.m_hat = m;
        state.p_l_hat = p_l;
        state.plan(0, s.offset(cfg.lipschitz_bins()), p_l * m, m)?;
        Ok(state)
    }

    pub fn config(&self) -> &DymoConfig {
        &self.cfg
    }

    pub fn instruction(&self) -> &GroupInstruction {
        &self.instruction
    }

    pub fn threshold(&self) -> Option<SnrBin> {
        self.s
    }

    pub fn m_hat(&self) -> f64 {
        self.m_hat
    }

    pub fn p_l_hat(&self) -> f64 {
        self.p_l_hat
    }

    pub fn histogram(&self) -> Option<&SnrHistogram> {
        self.hist.as_ref()
    }

    pub fn last_diagnostics(&self) -> Option<&DymoDiagnostics> {
        self.last.as_ref()
    }

    fn plan(&mut self, interval: u32, boundary: SnrBin, below: f64, total: f64) -> Result<()> {
        let half = self.cfg.r_interval / 2.0;
        let rate = |count: f64| if count > 0.0 { (half / count).min(1.0) } else { 1.0 };
        self.q_low = rate(below);
        self.q_high = rate(total - below);
        self.boundary = Some(boundary);
        self.instruction = GroupInstruction::two_groups(interval, boundary, self.q_low, self.q_high)?;
        Ok(())
    }

    /// Consumes the reports answering the current instruction, publishes
    /// `s(t)` and prepares the instruction for the next interval.
    pub fn step(&mut self, reports: &[QosReport]) -> Result<StepOutcome> {
        let t = self.instruction.interval();
        let range = self.cfg.range;
        let mut fresh = SnrHistogram::new(range);
        let (mut low, mut high) = (0usize, 0usize);
        for r in reports {
            let is_low = self.boundary.is_none_or(|b| r.snr < b);
            if is_low {
                low += 1;
                fresh.add(r.snr, 1.0 / self.q_low);
            } else {
                high += 1;
                fresh.add(r.snr, 1.0 / self.q_high);
            }
        }
        let m_fresh = fresh.total();
        let fresh_fraction = match self.boundary {
            Some(_) if m_fresh > 0.0 => {
                Some(estimate_subpopulation_fraction(low as f64, m_fresh, self.q_low)?)
            }
            _ => None,
        };

        let hist = match &self.hist {
            Some(prev) => merge_smoothed(prev, &fresh, self.cfg.alpha)?,
            None => fresh,
        };
        self.m_hat = hist.total();
        let starved = self.boundary.is_some() && low == 0;
        let floor = range.min_bin();

        let mut p_prime = self.cfg.p;
        let mut x_hat = None;
        let mut resolved = false;
        if !hist.is_empty() && !starved {
            let (estimate, level) = match self.boundary {
                Some(b) => {
                    let below = hist.mass_below(b);
                    self.p_l_hat = below / self.m_hat;
                    if below >= self.cfg.p * self.m_hat {
                        let level = (self.cfg.p / self.p_l_hat).min(1.0);
                        (histogram_quantile(&hist.restricted_below(b), level)?, level)
                    } else {
                        // The threshold moves by at most L per interval, so
                        // it cannot leave the monitored band upwards.
                        let x = histogram_quantile(&hist, self.cfg.p)?.min(b.offset(-1));
                        (x, 1.0)
                    }
                }
                None => (histogram_quantile(&hist, self.cfg.p)?, self.cfg.p),
            };
            p_prime = level;
            x_hat = Some(estimate);
            // A single-group bootstrap expecting less than one report below
            // the target only sees its lowest report, which overstates it.
            resolved = self.boundary.is_some() || self.cfg.p * self.m_hat * self.q_low >= 1.0;
        }

        let prev = self.s;
        let s = match (x_hat, prev) {
            (Some(x), Some(prev)) if resolved => {
                if self.cfg.smooth_threshold {
                    let db = exp_smooth(prev.lower_edge_db(), x.lower_edge_db(), self.cfg.alpha);
                    quantize(db)?
                } else {
                    x
                }
            }
            (Some(x), None) if resolved => x,
            (Some(x), Some(prev)) => x.min(prev),
            (None, Some(prev)) => prev,
            (_, None) => floor,
        };
        self.s = Some(s);

        let next_boundary = match (starved, self.boundary) {
            (true, Some(b)) => b.offset(self.cfg.lipschitz_bins()),
            _ => s.offset(self.cfg.lipschitz_bins()),
        };
        let below_next = hist.mass_below(next_boundary);
        self.last = Some(DymoDiagnostics {
            boundary: self.boundary,
            q_low: self.q_low,
            q_high: self.q_high,
            reports_low: low,
            reports_high: high,
            fresh_fraction,
            m_hat: self.m_hat,
            p_l_hat: self.p_l_hat,
            p_prime,
            x_hat,
        });
        self.plan(t + 1, next_boundary, below_next, self.m_hat)?;
        self.hist = Some(hist);
        Ok(StepOutcome {
            s,
            reports: reports.len(),
            starved,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::instruction::collect_reports;
    use crate::estimation::{empirical_quantile, SampleSet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn population(n: usize, mean: f64, seed: u64) -> (Vec<u32>, Vec<SnrBin>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(mean, 5.0).unwrap();
        let mut snr: Vec<SnrBin> = (0..n)
            .map(|_| quantize(normal.sample(&mut rng)).unwrap())
            .collect();
        snr.sort();
        ((0..n as u32).collect(), snr)
    }

    #[test]
    fn bootstrap_rate() {
        let instr = dymo_bootstrap(60.0, 20_000.0).unwrap();
        assert!((instr.ranges()[0].probability - 0.003).abs() < 1e-15);
        assert_eq!(dymo_bootstrap(60.0, 40.0).unwrap().ranges()[0].probability, 1.0);
    }

    #[test]
    fn seeded_step_matches_two_step_on_same_draws() {
        let (ues, snr) = population(20_000, 15.0, 1);
        let cfg = DymoConfig::new(0.001, 60.0, 20_000.0);
        let s0 = SnrBin(0);
        let boundary = s0.offset(50);
        let below = snr.iter().filter(|&&h| h < boundary).count();
        let p_l = below as f64 / 20_000.0;
        let mut state = DymoState::seeded(cfg, s0, p_l, 20_000.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let reports = collect_reports(state.instruction(), &ues, &snr, &mut rng).unwrap();
        let out = state.step(&reports).unwrap();
        let diag = state.last_diagnostics().unwrap();

        // Second step of the two-step procedure: the p / p1 quantile of the
        // reports from below the first-step quantile.
        let tail: Vec<f64> = reports
            .iter()
            .filter(|r| r.snr < boundary)
            .map(|r| f64::from(r.snr.0))
            .collect();
        let p1 = diag.p_l_hat;
        let two_step = empirical_quantile(&SampleSet::new(tail).unwrap(), 0.001 / p1).unwrap();
        assert_eq!(out.s, SnrBin(two_step as i32));
        assert_eq!(diag.x_hat, Some(out.s));
    }

    #[test]
    fn tracks_a_static_population() {
        let (ues, snr) = population(20_000, 15.0, 3);
        let truth = histogram_quantile(
            &SnrHistogram::from_bins(HistogramRange::default(), snr.iter().copied()),
            0.001,
        )
        .unwrap();
        let mut state = DymoState::new(DymoConfig::new(0.001, 60.0, 20_000.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut err2 = 0.0;
        let mut counted = 0;
        let mut sent = 0;
        for t in 0..60 {
            let reports = collect_reports(state.instruction(), &ues, &snr, &mut rng).unwrap();
            let out = state.step(&reports).unwrap();
            if t >= 10 {
                let d = f64::from(out.s.0 - truth.0) / 10.0;
                err2 += d * d;
                counted += 1;
                sent += reports.len();
            }
        }
        let rmse = (err2 / f64::from(counted)).sqrt();
        assert!(rmse < 1.0, "threshold RMSE {rmse} dB");
        let mean = sent as f64 / f64::from(counted);
        assert!(mean <= 60.0 + 3.0 * 60f64.sqrt(), "{mean} reports per interval");
    }

    #[test]
    fn drop_is_followed_quickly() {
        let (ues, snr) = population(20_000, 15.0, 5);
        let low: Vec<SnrBin> = snr.iter().map(|b| b.offset(-100)).collect();
        let truth = histogram_quantile(
            &SnrHistogram::from_bins(HistogramRange::new(-40.0, 40.0).unwrap(), low.iter().copied()),
            0.001,
        )
        .unwrap();
        let mut cfg = DymoConfig::new(0.001, 60.0, 20_000.0);
        cfg.range = HistogramRange::new(-40.0, 40.0).unwrap();
        let mut state = DymoState::new(cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..30 {
            let reports = collect_reports(state.instruction(), &ues, &snr, &mut rng).unwrap();
            state.step(&reports).unwrap();
        }
        let mut gaps = vec![];
        for _ in 0..2 {
            let reports = collect_reports(state.instruction(), &ues, &low, &mut rng).unwrap();
            let out = state.step(&reports).unwrap();
            gaps.push(f64::from(out.s.0 - truth.0).abs() / 10.0);
        }
        assert!(gaps[1] <= 1.0, "{gaps:?}");
    }

    #[test]
    fn starvation_raises_the_boundary() {
        let cfg = DymoConfig::new(0.001, 60.0, 1000.0);
        let mut state = DymoState::seeded(cfg, SnrBin(0), 0.01, 1000.0).unwrap();
        let reports = [QosReport {
            ue: 0,
            snr: SnrBin(200),
            interval: 0,
        }];
        let out = state.step(&reports).unwrap();
        assert!(out.starved);
        assert_eq!(out.s, SnrBin(0));
        let edge = state.instruction().ranges()[0].upper_db;
        assert!((edge - 10.0).abs() < 1e-12);
    }
}
