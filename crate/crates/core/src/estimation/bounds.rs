use super::TwoStepPlan;
use crate::error::{domain, Error, Result};

/// Asymptotic variance of the true quantile of the order-statistics estimate,
/// `p (1 - p) / r`.
pub fn quantile_variance(p: f64, r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain("p", p, "0 <= p <= 1"));
    }
    check_budget(r)?;
    Ok(p * (1.0 - p) / r)
}

/// Three-sigma error of the order-statistics estimate, `3 sqrt(p (1 - p) / r)`.
pub fn order_statistics_bound(p: f64, r: f64) -> Result<f64> {
    Ok(3.0 * quantile_variance(p, r)?.sqrt())
}

/// The split minimizing the two-step error: `p1 = p2 = sqrt(p)`, `r1 = r2 = r / 2`.
pub fn optimal_two_step_plan(p: f64, r: f64) -> Result<TwoStepPlan> {
    check_open_fraction(p)?;
    check_budget(r)?;
    let root = p.sqrt();
    TwoStepPlan::new(root, root, r / 2.0, r / 2.0)
}

/// Two-step over-estimation error after eliminating `p2 = p / p1` and
/// `r2 = r - r1`:
///
/// `3 p [ sqrt((1/p1 - 1) / r1) + sqrt((p1/p - 1) / (r - r1)) ]`
pub fn two_step_error_expression(p1: f64, r1: f64, p: f64, r: f64) -> Result<f64> {
    check_open_fraction(p)?;
    check_budget(r)?;
    if !(p1 > p && p1 < 1.0) {
        return Err(domain("p1", p1, "p < p1 < 1"));
    }
    if !(r1 > 0.0 && r1 < r) {
        return Err(domain("r1", r1, "0 < r1 < r"));
    }
    let first = ((1.0 / p1 - 1.0) / r1).sqrt();
    let second = ((p1 / p - 1.0) / (r - r1)).sqrt();
    Ok(3.0 * p * (first + second))
}

/// Error bound of the two-step estimator at its optimal split,
/// `6 sqrt(2) sqrt(p sqrt(p) (1 - sqrt(p)) / r)`.
pub fn two_step_bound(p: f64, r: f64) -> Result<f64> {
    check_open_fraction(p)?;
    check_budget(r)?;
    let root = p.sqrt();
    Ok(6.0 * std::f64::consts::SQRT_2 * (p * root * (1.0 - root) / r).sqrt())
}

/// Error bound of the iterative estimator, `5 p_L / sqrt(r)`.
///
/// Only meaningful when the expected sample size is at least 100 and the
/// target quantile sits well inside the monitored band (`p <= 0.7 p_L`).
pub fn iterative_bound(p_l: f64, r: f64, p: f64) -> Result<f64> {
    if !(p_l > 0.0 && p_l <= 1.0) {
        return Err(domain("p_L", p_l, "0 < p_L <= 1"));
    }
    if !(r >= 100.0) {
        return Err(Error::BoundNotApplicable(format!(
            "expected sample size r = {r} must be at least 100"
        )));
    }
    if !(p <= 0.7 * p_l) {
        return Err(Error::BoundNotApplicable(format!(
            "p = {p} must not exceed 0.7 * p_L = {}",
            0.7 * p_l
        )));
    }
    Ok(5.0 * p_l / r.sqrt())
}

fn check_open_fraction(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(domain("p", p, "0 < p < 1"))
    }
}

fn check_budget(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(domain("r", r, "r > 0"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn variance_values() {
        assert!(close(quantile_variance(0.01, 400.0).unwrap(), 2.475e-5, 1e-18));
        assert!(close(quantile_variance(0.5, 100.0).unwrap(), 2.5e-3, 1e-18));
        assert_eq!(quantile_variance(0.0, 400.0).unwrap(), 0.0);
        assert!(quantile_variance(0.5, 0.0).is_err());
    }

    #[test]
    fn optimal_plan_values() {
        let plan = optimal_two_step_plan(0.01, 400.0).unwrap();
        assert!(close(plan.p1, 0.1, 1e-15) && close(plan.p2, 0.1, 1e-15));
        assert_eq!((plan.r1, plan.r2), (200.0, 200.0));
        let plan = optimal_two_step_plan(1e-4, 100.0).unwrap();
        assert!(close(plan.p1, 0.01, 1e-15) && close(plan.p2, 0.01, 1e-15));
        assert_eq!((plan.r1, plan.r2), (50.0, 50.0));
        assert!(((plan.p1 * plan.p2) / 1e-4 - 1.0).abs() < 1e-12);
        assert!(optimal_two_step_plan(1.0, 100.0).is_err());
    }

    #[test]
    fn error_expression_at_optimum_matches_bound() {
        // 3 * 0.01 * 2 * sqrt(9 / 200)
        let expected = 0.06 * (9.0f64 / 200.0).sqrt();
        let e = two_step_error_expression(0.1, 200.0, 0.01, 400.0).unwrap();
        assert!(close(e, expected, 1e-15));
        assert!(close(e, 0.012728, 5e-7));
        let b = two_step_bound(0.01, 400.0).unwrap();
        assert!(close(b, e, 1e-15));
    }

    #[test]
    fn error_expression_domain() {
        assert!(two_step_error_expression(0.01, 200.0, 0.01, 400.0).is_err());
        assert!(two_step_error_expression(1.0, 200.0, 0.01, 400.0).is_err());
        assert!(two_step_error_expression(0.1, 0.0, 0.01, 400.0).is_err());
        assert!(two_step_error_expression(0.1, 400.0, 0.01, 400.0).is_err());
    }

    #[test]
    fn error_expression_decreases_with_budget() {
        for &p1 in &[0.02, 0.05, 0.1, 0.3, 0.8] {
            let mut last = f64::INFINITY;
            for r in (1..=40).map(|k| 100.0 * f64::from(k)) {
                let e = two_step_error_expression(p1, r / 4.0, 0.01, r).unwrap();
                assert!(e < last, "p1 = {p1}, r = {r}");
                last = e;
            }
        }
    }

    #[test]
    fn bound_scaling() {
        let b = two_step_bound(0.01, 400.0).unwrap();
        let b4 = two_step_bound(0.01, 1600.0).unwrap();
        assert!(close(b4, b / 2.0, 1e-15));
        let p = 1.0 / 49.0;
        let os = order_statistics_bound(p, 400.0).unwrap();
        assert!(((two_step_bound(p, 400.0).unwrap() - os) / os).abs() < 0.02);
    }

    #[test]
    fn iterative_bound_gate() {
        assert!(close(iterative_bound(0.01, 100.0, 0.001).unwrap(), 0.005, 1e-15));
        assert!(close(iterative_bound(0.02, 400.0, 0.001).unwrap(), 0.005, 1e-15));
        assert!(matches!(
            iterative_bound(0.01, 99.0, 0.001),
            Err(Error::BoundNotApplicable(_))
        ));
        assert!(matches!(
            iterative_bound(0.01, 400.0, 0.008),
            Err(Error::BoundNotApplicable(_))
        ));
    }
}
