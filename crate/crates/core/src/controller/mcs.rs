use std::path::Path;

use crate::error::{Error, Result};

/// Tolerance for comparing a threshold with a row boundary.
const EDGE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McsRow {
    pub index: u32,
    pub min_snr_db: f64,
    /// bit/s/Hz
    pub spectral_efficiency: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McsChoice {
    pub index: u32,
    pub spectral_efficiency: f64,
    /// The threshold was below every row; the lowest MCS was used anyway.
    pub below_floor: bool,
}

/// Monotone SNR -> MCS step function.
#[derive(Debug, Clone, PartialEq)]
pub struct McsTable {
    rows: Vec<McsRow>,
}

const DEFAULT_ROWS: [(u32, f64, f64); 15] = [
    (0, -6.0, 0.15),
    (1, -5.0, 0.19),
    (2, -4.0, 0.23),
    (3, -3.0, 0.29),
    (4, -2.0, 0.36),
    (5, -1.0, 0.44),
    (6, 0.5, 0.59),
    (7, 2.0, 0.74),
    (8, 4.0, 0.88),
    (9, 6.0, 1.18),
    (10, 8.0, 1.48),
    (11, 10.0, 1.91),
    (12, 12.0, 2.41),
    (13, 15.0, 2.73),
    (14, 20.0, 3.32),
];

impl Default for McsTable {
    fn default() -> Self {
        let rows = DEFAULT_ROWS
            .iter()
            .map(|&(index, min_snr_db, spectral_efficiency)| McsRow {
                index,
                min_snr_db,
                spectral_efficiency,
            })
            .collect();
        Self::new(rows).expect("default table is monotone")
    }
}

impl McsTable {
    /// Rows must be strictly increasing in index, SNR and efficiency.
    pub fn new(rows: Vec<McsRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidMcsTable("no rows".into()));
        }
        for row in &rows {
            if !(row.min_snr_db.is_finite() && row.spectral_efficiency.is_finite()) {
                return Err(Error::InvalidMcsTable(format!("row {} is not finite", row.index)));
            }
        }
        for pair in rows.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if !(a.index < b.index
                && a.min_snr_db < b.min_snr_db
                && a.spectral_efficiency < b.spectral_efficiency)
            {
                return Err(Error::InvalidMcsTable(format!(
                    "rows {} and {} are not increasing",
                    a.index, b.index
                )));
            }
        }
        Ok(Self { rows })
    }

    /// Parses `mcs_index,min_snr_db,spectral_efficiency` lines. A header
    /// line, blank lines and `#` comments are skipped.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut rows = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("mcs_index") {
                continue;
            }
            let err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: n + 1,
                message,
            };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(err(format!("expected 3 fields, found {}", fields.len())));
            }
            let index = fields[0]
                .parse()
                .map_err(|e| err(format!("mcs_index `{}`: {e}", fields[0])))?;
            let min_snr_db = fields[1]
                .parse()
                .map_err(|e| err(format!("min_snr_db `{}`: {e}", fields[1])))?;
            let spectral_efficiency = fields[2]
                .parse()
                .map_err(|e| err(format!("spectral_efficiency `{}`: {e}", fields[2])))?;
            rows.push(McsRow {
                index,
                min_snr_db,
                spectral_efficiency,
            });
        }
        Self::new(rows)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, path)
    }

    pub fn rows(&self) -> &[McsRow] {
        &self.rows
    }

    /// Copy with every boundary moved by `offset_db`.
    pub fn shifted(&self, offset_db: f64) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|r| McsRow {
                min_snr_db: r.min_snr_db + offset_db,
                ..*r
            })
            .collect();
        Self { rows }
    }

    /// Highest MCS whose requirement is at most `s_db`.
    pub fn select(&self, s_db: f64) -> McsChoice {
        let n = self
            .rows
            .partition_point(|r| r.min_snr_db <= s_db + EDGE_EPS);
        match n.checked_sub(1) {
            Some(i) => McsChoice {
                index: self.rows[i].index,
                spectral_efficiency: self.rows[i].spectral_efficiency,
                below_floor: false,
            },
            None => {
                log::warn!("threshold {s_db} dB below the MCS table floor");
                McsChoice {
                    index: self.rows[0].index,
                    spectral_efficiency: self.rows[0].spectral_efficiency,
                    below_floor: true,
                }
            }
        }
    }
}

pub fn mcs_from_threshold(s_db: f64, table: &McsTable) -> McsChoice {
    table.select(s_db)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchored_rows() {
        let t = McsTable::default();
        assert_eq!(t.rows().len(), 15);
        let c = t.select(-3.0);
        assert_eq!((c.index, c.spectral_efficiency), (3, 0.29));
        let c = t.select(-2.0);
        assert_eq!((c.index, c.spectral_efficiency), (4, 0.36));
        assert_eq!(t.select(-2.05).index, 3);
        assert_eq!(t.select(1000.0).index, 14);
    }

    #[test]
    fn boundary_is_inclusive_with_decimal_edges() {
        let t = McsTable::default();
        // 0.1 * 5 is not exactly 0.5 in binary
        assert_eq!(t.select(f64::from(5) / 10.0).index, 6);
        assert_eq!(t.select(0.1 * 5.0).index, 6);
    }

    #[test]
    fn below_floor() {
        let c = McsTable::default().select(-8.0);
        assert_eq!(c.index, 0);
        assert!(c.below_floor);
    }

    #[test]
    fn monotone() {
        let t = McsTable::default();
        let mut last = 0;
        for k in -100..300 {
            let idx = t.select(f64::from(k) / 10.0).index;
            assert!(idx >= last);
            last = idx;
        }
    }

    #[test]
    fn parse_csv() {
        let text = "mcs_index,min_snr_db,spectral_efficiency\n0,-1,0.5\n1,2.5,1.0\n";
        let t = McsTable::parse(text, Path::new("t.csv")).unwrap();
        assert_eq!(t.select(3.0).index, 1);
        let bad = McsTable::parse("0,1,0.5\n1,0.5,1.0\n", Path::new("t.csv"));
        assert!(matches!(bad, Err(Error::InvalidMcsTable(_))));
        match McsTable::parse("0,1\n", Path::new("t.csv")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
    }
}
