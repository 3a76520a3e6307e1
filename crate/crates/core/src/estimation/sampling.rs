//! One-step and two-step quantile estimation against a finite population.
//!
//! Each member of the population reports independently with the instructed
//! probability, exactly as a UE responds to a group instruction. Selection
//! walks the sorted population with geometric skips, so a run costs
//! `O(reports)` rather than `O(population)`.

use rand::Rng;
use rand_distr::{Distribution, Geometric};

use super::{empirical_quantile, SampleSet, TwoStepPlan};
use crate::error::{domain, Error, Result};

/// A fixed population of SNR (or any scalar) values, kept sorted.
#[derive(Debug, Clone)]
pub struct Population {
    sorted: Vec<f64>,
}

impl Population {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(bad));
        }
        if values.is_empty() {
            return Err(Error::InsufficientData("empty population"));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { sorted: values })
    }

    /// `n` i.i.d. draws from uniform [0, 1).
    pub fn uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let values = (0..n).map(|_| rng.random::<f64>()).collect();
        Self::new(values).expect("uniform draws are finite")
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of the population at or below `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    pub fn count_below(&self, x: f64) -> usize {
        self.sorted.partition_point(|&v| v < x)
    }

    /// Each of the first `prefix` members reports with probability `q`.
    pub fn sample_prefix<R: Rng + ?Sized>(
        &self,
        prefix: usize,
        q: f64,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(domain("q", q, "0 < q <= 1"));
        }
        let prefix = prefix.min(self.sorted.len());
        let skip = Geometric::new(q).map_err(|_| domain("q", q, "0 < q <= 1"))?;
        let mut out = Vec::with_capacity((prefix as f64 * q * 1.2) as usize + 8);
        let mut idx = skip.sample(rng);
        while idx < prefix as u64 {
            out.push(self.sorted[idx as usize]);
            idx = idx.saturating_add(1).saturating_add(skip.sample(rng));
        }
        Ok(out)
    }
}

/// An estimate together with its true quantile in the population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationEstimate {
    pub value: f64,
    pub true_quantile: f64,
    pub reports: usize,
}

/// Order-statistics estimate: every member reports with probability `r / n`.
pub fn one_step_estimate<R: Rng + ?Sized>(
    population: &Population,
    p: f64,
    r: f64,
    rng: &mut R,
) -> Result<PopulationEstimate> {
    let q = (r / population.len() as f64).min(1.0);
    let reports = population.sample_prefix(population.len(), q, rng)?;
    let n = reports.len();
    let value = empirical_quantile(&SampleSet::new(reports)?, p)?;
    Ok(PopulationEstimate {
        value,
        true_quantile: population.cdf(value),
        reports: n,
    })
}

/// Two-step estimate: locate the `p1` quantile with `r1` reports, then sample
/// only members below it so that `r2` reports land in the tail.
pub fn two_step_estimate<R: Rng + ?Sized>(
    population: &Population,
    plan: &TwoStepPlan,
    rng: &mut R,
) -> Result<PopulationEstimate> {
    let n = population.len() as f64;
    let first = population.sample_prefix(population.len(), (plan.r1 / n).min(1.0), rng)?;
    let first_reports = first.len();
    let x1 = empirical_quantile(&SampleSet::new(first)?, plan.p1)?;

    let below = population.count_below(x1);
    let q2 = (plan.r2 / (plan.p1 * n)).min(1.0);
    let second = population.sample_prefix(below, q2, rng)?;
    let second_reports = second.len();
    let value = empirical_quantile(&SampleSet::new(second)?, plan.p2)?;
    Ok(PopulationEstimate {
        value,
        true_quantile: population.cdf(value),
        reports: first_reports + second_reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cdf_counts() {
        let pop = Population::new(vec![0.3, 0.1, 0.2, 0.4]).unwrap();
        assert_eq!(pop.cdf(0.2), 0.5);
        assert_eq!(pop.cdf(0.05), 0.0);
        assert_eq!(pop.count_below(0.2), 1);
    }

    #[test]
    fn census_when_q_is_one() {
        let pop = Population::new((0..50).map(f64::from).collect()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(pop.sample_prefix(20, 1.0, &mut rng).unwrap().len(), 20);
    }

    #[test]
    fn sampling_rate_is_respected() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pop = Population::uniform(200_000, &mut rng);
        let n = pop.sample_prefix(pop.len(), 0.01, &mut rng).unwrap().len() as f64;
        // Binomial(200000, 0.01): mean 2000, sd ~44.5
        assert!((n - 2000.0).abs() < 4.0 * 44.5, "{n}");
    }

    #[test]
    fn two_step_hits_the_tail() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pop = Population::uniform(100_000, &mut rng);
        let plan = crate::estimation::optimal_two_step_plan(0.01, 400.0).unwrap();
        let est = two_step_estimate(&pop, &plan, &mut rng).unwrap();
        assert!(est.true_quantile > 0.0 && est.true_quantile < 0.03);
        assert!(est.reports > 250 && est.reports < 550);
    }
}
