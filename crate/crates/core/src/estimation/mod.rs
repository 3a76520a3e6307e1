//! Low-tail quantile estimators.
//!
//! Everything here is a pure function of its inputs: the empirical quantile
//! over (optionally weighted) samples, the error bounds of the one-step,
//! two-step and iterative procedures, and the budget split that minimizes the
//! two-step error. [`sampling`] runs the one-step and two-step procedures
//! against a finite population, which is what the Monte-Carlo checks use.

mod bounds;
pub mod sampling;

pub use bounds::{
    iterative_bound, optimal_two_step_plan, order_statistics_bound, quantile_variance,
    two_step_bound, two_step_error_expression,
};

use crate::error::{domain, Error, Result};

/// Relative slack used when comparing a cumulative weight against `p * total`.
///
/// Keeps exact-fraction cases such as `p = 0.5` over 100 unit weights on the
/// intended sample despite rounding in the running sum.
pub(crate) const CUMULATIVE_EPS: f64 = 1e-12;

/// SNR samples, each optionally carrying a positive weight.
///
/// Weights let smoothed history stand in for past intervals: samples from
/// interval `t - 1` at weight `1 - alpha` next to fresh samples at `alpha`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SampleSet {
    values: Vec<f64>,
    weights: Option<Vec<f64>>,
}

impl SampleSet {
    /// Equal-weight samples.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(bad));
        }
        Ok(Self {
            values,
            weights: None,
        })
    }

    pub fn weighted(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::InsufficientData(
                "values and weights differ in length",
            ));
        }
        if let Some(&bad) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(domain("weight", bad, "finite and > 0"));
        }
        let mut set = Self::new(values)?;
        set.weights = Some(weights);
        Ok(set)
    }

    /// Merges the previous interval's samples (scaled by `1 - alpha`) with
    /// fresh samples (scaled by `alpha`).
    pub fn smoothed(previous: &SampleSet, fresh: &SampleSet, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let mut values = Vec::with_capacity(previous.len() + fresh.len());
        let mut weights = Vec::with_capacity(previous.len() + fresh.len());
        if alpha < 1.0 {
            for (v, w) in previous.iter() {
                values.push(v);
                weights.push(w * (1.0 - alpha));
            }
        }
        for (v, w) in fresh.iter() {
            values.push(v);
            weights.push(w * alpha);
        }
        Self::weighted(values, weights)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        match &self.weights {
            Some(w) => w.iter().sum(),
            None => self.values.len() as f64,
        }
    }

    /// `(value, weight)` pairs in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().enumerate().map(move |(i, &v)| {
            let w = self.weights.as_ref().map_or(1.0, |w| w[i]);
            (v, w)
        })
    }
}

/// A QoS threshold `p` together with the expected report budget `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileQuery {
    pub p: f64,
    pub r: f64,
}

impl QuantileQuery {
    pub fn new(p: f64, r: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(domain("p", p, "0 < p <= 1"));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(domain("r", r, "r > 0"));
        }
        Ok(Self { p, r })
    }
}

/// Quantile and budget split for the two-step procedure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStepPlan {
    /// Quantile estimated in the first step; it also defines the group boundary.
    pub p1: f64,
    /// Quantile of the below-boundary subpopulation estimated in the second step.
    pub p2: f64,
    pub r1: f64,
    pub r2: f64,
}

impl TwoStepPlan {
    pub fn new(p1: f64, p2: f64, r1: f64, r2: f64) -> Result<Self> {
        for (name, v) in [("p1", p1), ("p2", p2)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(domain(name, v, "0 < p_i <= 1"));
            }
        }
        for (name, v) in [("r1", r1), ("r2", r2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(domain(name, v, "r_i > 0"));
            }
        }
        Ok(Self { p1, p2, r1, r2 })
    }

    pub fn p(&self) -> f64 {
        self.p1 * self.p2
    }

    pub fn r(&self) -> f64 {
        self.r1 + self.r2
    }
}

/// Running state of the iterative estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterativeState {
    /// Current threshold estimate in dB.
    pub x_hat: f64,
    /// Largest per-interval SNR change the monitored band must absorb (dB).
    pub lipschitz_db: f64,
    /// Estimated fraction of the population below `x_hat + lipschitz_db`.
    pub p_l_hat: f64,
    /// Estimated active population.
    pub m_hat: f64,
    pub alpha: f64,
}

impl IterativeState {
    pub fn new(x_hat: f64, lipschitz_db: f64, m_hat: f64, alpha: f64) -> Result<Self> {
        if !(lipschitz_db >= 0.0 && lipschitz_db.is_finite()) {
            return Err(domain("L", lipschitz_db, "L >= 0"));
        }
        if !(m_hat >= 0.0 && m_hat.is_finite()) {
            return Err(domain("m_hat", m_hat, "m_hat >= 0"));
        }
        check_alpha(alpha)?;
        Ok(Self {
            x_hat,
            lipschitz_db,
            p_l_hat: 0.0,
            m_hat,
            alpha,
        })
    }

    /// Upper edge of the monitored band, `x_hat + L`.
    pub fn boundary_db(&self) -> f64 {
        self.x_hat + self.lipschitz_db
    }
}

/// Smallest sample `x` whose weighted empirical CDF reaches `p`.
///
/// Equal values keep their insertion order (stable sort), so the result is
/// deterministic for a given sample set.
pub fn empirical_quantile(samples: &SampleSet, p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(domain("p", p, "0 < p <= 1"));
    }
    if samples.is_empty() {
        return Err(Error::InsufficientData("empty sample set"));
    }
    let mut pairs: Vec<(f64, f64)> = samples.iter().collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|(_, w)| w).sum();
    if total <= 0.0 {
        return Err(Error::InsufficientData("sample set carries no weight"));
    }
    let target = p * total * (1.0 - CUMULATIVE_EPS);
    let mut cum = 0.0;
    for &(v, w) in &pairs {
        cum += w;
        if cum >= target {
            return Ok(v);
        }
    }
    Ok(pairs[pairs.len() - 1].0)
}

/// Horvitz–Thompson estimate of a subpopulation fraction from `y` reports
/// sent with probability `q` out of a population of `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionEstimate {
    pub fraction: f64,
    /// `(fraction / m) * (1 - q) / q`.
    pub variance: f64,
}

pub fn estimate_subpopulation_fraction(y: f64, m: f64, q: f64) -> Result<FractionEstimate> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(domain("m", m, "m > 0"));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(domain("q", q, "0 < q <= 1"));
    }
    if !(y >= 0.0 && y.is_finite()) {
        return Err(domain("Y", y, "Y >= 0"));
    }
    let fraction = y / (m * q);
    Ok(FractionEstimate {
        fraction,
        variance: fraction / m * (1.0 - q) / q,
    })
}

/// `alpha * fresh + (1 - alpha) * previous`.
pub fn exp_smooth(previous: f64, fresh: f64, alpha: f64) -> f64 {
    debug_assert!(alpha > 0.0 && alpha <= 1.0, "alpha = {alpha}");
    alpha * fresh + (1.0 - alpha) * previous
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(domain("alpha", alpha, "0 < alpha <= 1"))
    }
}
