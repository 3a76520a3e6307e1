//! The two-step error expression over a grid of splits, against the
//! analytic optimum p1 = sqrt(p), r1 = r/2, and the crossover with the
//! order-statistics bound.

use dymo::estimation::{optimal_two_step_plan, order_statistics_bound, two_step_bound};
use dymo::harness::{crossover_point, grid_minimizer};

fn main() -> dymo::Result<()> {
    for p in [1e-2, 1e-3, 1e-4] {
        for r in [100.0, 400.0, 1000.0] {
            let plan = optimal_two_step_plan(p, r)?;
            let (e, f) = grid_minimizer(p, r, 200)?;
            println!(
                "p={p:<7} r={r:<5} grid p1={:.3e} r1={:.1}  analytic p1={:.3e} r1={:.1}",
                p.powf(e),
                f * r,
                plan.p1,
                plan.r1
            );
        }
    }
    println!();
    for p in [0.001, 0.01, 1.0 / 49.0, 0.05] {
        println!(
            "p={p:.4}: two-step {:.4e}  order statistics {:.4e}",
            two_step_bound(p, 400.0)?,
            order_statistics_bound(p, 400.0)?
        );
    }
    println!("crossover at p = {:.6} (1/49 = {:.6})", crossover_point(400.0)?, 1.0 / 49.0);
    Ok(())
}
