//! A two-group instruction (20% below the boundary, 2% above) over 250 and
//! 2250 UEs: 50 + 45 = 95 reports expected per interval.

use dymo::controller::{collect_reports, GroupInstruction};
use dymo::snr::SnrBin;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> dymo::Result<()> {
    let instr = GroupInstruction::two_groups(0, SnrBin(25), 0.2, 0.02)?;
    let mut line = Vec::new();
    instr.write_trace_line(&mut line)?;
    print!("instruction {}", String::from_utf8_lossy(&line));

    let snr: Vec<SnrBin> = (0..2500).map(|i| SnrBin(if i < 250 { 10 } else { 80 })).collect();
    let ues: Vec<u32> = (0..2500).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let runs = 1000;
    let mut total = 0usize;
    for _ in 0..runs {
        total += collect_reports(&instr, &ues, &snr, &mut rng)?.len();
    }
    println!("mean reports per interval: {:.2}", total as f64 / runs as f64);
    Ok(())
}
