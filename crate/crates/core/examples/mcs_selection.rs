//! Maps SNR thresholds to MCS indices with the built-in table and with a
//! table read from CSV text.

use std::path::Path;

use dymo::controller::{mcs_from_threshold, McsTable};

fn main() -> dymo::Result<()> {
    let table = McsTable::default();
    for s in [-12.0, -5.0, 0.0, 2.5, 7.3, 15.0, 30.0] {
        let c = mcs_from_threshold(s, &table);
        println!(
            "{s:>6.1} dB -> MCS {:>2} ({:.3} bit/s/Hz){}",
            c.index,
            c.spectral_efficiency,
            if c.below_floor { "  below floor" } else { "" }
        );
    }
    let custom = McsTable::parse(
        "mcs_index,min_snr_db,spectral_efficiency\n0,-5,0.2\n1,0,0.5\n2,5,1.0\n",
        Path::new("inline.csv"),
    )?;
    println!("custom table at 3 dB: MCS {}", custom.select(3.0).index);
    Ok(())
}
