//! Compares one-step (order statistics) and two-step quantile estimation
//! on a uniform population, as in the estimator study.

use dymo::harness::estimator_study;

fn main() -> dymo::Result<()> {
    let r = 400.0;
    println!("{:>8} {:>12} {:>12} {:>10}", "p", "one-step", "two-step", "coverage");
    for p in [0.01, 0.001] {
        let s = estimator_study(p, r, 500, 1_000_000, 7)?;
        println!(
            "{:>8} {:>12.3e} {:>12.3e} {:>9.1}%",
            p,
            s.one_step_se,
            s.two_step_se,
            100.0 * s.two_step_coverage
        );
    }
    Ok(())
}
