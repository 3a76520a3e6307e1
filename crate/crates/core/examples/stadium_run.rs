//! One stadium instance at the default parameters: every scheme's RMSEs
//! and DyMo's threshold next to Optimal's over time.

use dymo::controller::SchemeKind;
use dymo::harness::{simulate, RunConfig};
use dymo::venue::ScenarioKind;

fn main() -> dymo::Result<()> {
    let cfg = RunConfig {
        scenario: ScenarioKind::Stadium,
        ..RunConfig::default()
    };
    let out = simulate(&cfg)?;
    let point = &out.points[0];
    for s in &point.aggregate {
        println!(
            "{:<20} pct {:.5}  thr {:.2} dB  outliers {:.2}",
            s.scheme, s.pct_rmse, s.thr_rmse_db, s.outlier_rmse
        );
    }
    let inst = &point.instances[0];
    let (dymo, opt) = (&inst.records[&SchemeKind::Dymo], &inst.records[&SchemeKind::Optimal]);
    println!("\n  t   m(t)   dymo  optimal");
    for (d, o) in dymo.iter().zip(opt).step_by(10) {
        println!("{:>3} {:>6} {:>6} {:>8}", d.t, d.m_active, d.s_est, o.s_est);
    }
    Ok(())
}
