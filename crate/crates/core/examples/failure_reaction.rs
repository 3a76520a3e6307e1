//! DyMo around a failure: thresholds before, during and after the window
//! in which a block of rectangles drops to 5-10 dB.

use dymo::controller::SchemeKind;
use dymo::harness::{simulate, RunConfig};
use dymo::venue::ScenarioKind;

fn main() -> dymo::Result<()> {
    let cfg = RunConfig {
        scenario: ScenarioKind::Failure,
        schemes: vec![SchemeKind::Dymo, SchemeKind::Optimal, SchemeKind::OrderStatsHist],
        ..RunConfig::default()
    };
    let out = simulate(&cfg)?;
    let recs = &out.points[0].instances[0].records;
    println!("  t   optimal   dymo  os_hist  dymo reports");
    for t in (45..60).chain(72..82) {
        let at = |k: SchemeKind| &recs[&k][t];
        println!(
            "{:>3} {:>9} {:>6} {:>8} {:>13}",
            t,
            at(SchemeKind::Optimal).s_est,
            at(SchemeKind::Dymo).s_est,
            at(SchemeKind::OrderStatsHist).s_est,
            at(SchemeKind::Dymo).reports
        );
    }
    Ok(())
}
