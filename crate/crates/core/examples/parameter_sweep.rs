//! Sweeps the QoS threshold p in the homogeneous scenario and prints the
//! summary rows, as written to summary.csv.

use dymo::harness::{simulate, RunConfig, Sweep, SweepAxis};
use dymo::metrics::write_summary_csv;

fn main() -> dymo::Result<()> {
    let cfg = RunConfig {
        sweep: Some(Sweep::default_for(SweepAxis::P)),
        duration: 60,
        ..RunConfig::default()
    };
    let out = simulate(&cfg)?;
    write_summary_csv(&out.summary_rows(), std::io::stdout().lock())
}
