//! Writes mean-SNR heatmaps of the three venues as CSV (cell_x, cell_y,
//! mean_db, t): the failure venue before and during the failure.

use std::fs::File;
use std::io::BufWriter;

use dymo::venue::{Scenario, ScenarioKind};

fn main() -> dymo::Result<()> {
    let dir = std::env::temp_dir().join("dymo-heatmaps");
    std::fs::create_dir_all(&dir)?;
    for (kind, times) in [
        (ScenarioKind::Homogeneous, &[0][..]),
        (ScenarioKind::Stadium, &[0][..]),
        (ScenarioKind::Failure, &[0, 60][..]),
    ] {
        let venue = Scenario::new(kind, 20_000, 1).build_venue()?;
        for &t in times {
            let path = dir.join(format!("{}-t{t}.csv", kind.name()));
            venue.write_heatmap_csv(t, BufWriter::new(File::create(&path)?))?;
            let mean = venue.grid_at(t).means().iter().sum::<f64>() / venue.base().len() as f64;
            println!("{} (venue mean {mean:.2} dB)", path.display());
        }
    }
    Ok(())
}
