//! Strict CSV dataset loading: comma-separated, mandatory header row,
//! UTF-8, '.' decimal point. Rows with missing cells (empty or "NA")
//! are rejected unless row deletion was requested.

use anyhow::{anyhow, bail, Result};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct Dataset {
    pub columns: Vec<String>,
    /// Row-major string cells, one entry per column.
    pub rows: Vec<Vec<String>>,
}

impl Dataset {
    pub fn load(path: &Path, drop_na: bool) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow!("cannot read data file {}: {e}", path.display()))?;
        Self::parse(&text, drop_na)
    }

    pub fn parse(text: &str, drop_na: bool) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| anyhow!("data file is empty (header row is mandatory)"))?;
        let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
        if columns.iter().any(String::is_empty) {
            bail!("header contains an empty column name");
        }
        let mut rows = Vec::new();
        for (line_no, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<String> = line.split(',').map(|c| c.trim().to_string()).collect();
            if cells.len() != columns.len() {
                bail!(
                    "row {} has {} cells, expected {} (data must be rectangular)",
                    line_no + 1,
                    cells.len(),
                    columns.len()
                );
            }
            if let Some(idx) = cells.iter().position(|c| c.is_empty() || c == "NA") {
                if drop_na {
                    continue;
                }
                bail!(
                    "missing value in row {}, column '{}' (use --drop-na to delete such rows)",
                    line_no + 1,
                    columns[idx]
                );
            }
            rows.push(cells);
        }
        if rows.is_empty() {
            bail!("data file has a header but no rows");
        }
        Ok(Dataset { columns, rows })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| anyhow!("column '{name}' not found in data (have: {})", self.columns.join(", ")))
    }

    /// Numeric column, '.' decimal.
    pub fn numeric(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self.column_index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                row[idx].parse::<f64>().map_err(|_| {
                    anyhow!("column '{name}', row {}: '{}' is not a number", r + 2, row[idx])
                })
            })
            .collect()
    }

    /// Non-negative integer column.
    pub fn counts(&self, name: &str) -> Result<Vec<u64>> {
        let idx = self.column_index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                row[idx].parse::<u64>().map_err(|_| {
                    anyhow!(
                        "column '{name}', row {}: '{}' is not a non-negative integer",
                        r + 2,
                        row[idx]
                    )
                })
            })
            .collect()
    }

    /// Group-label column mapped to 0-based indices; levels are sorted
    /// lexicographically so the mapping does not depend on row order.
    pub fn groups(&self, name: &str) -> Result<(Vec<usize>, Vec<String>)> {
        let idx = self.column_index(name)?;
        let mut levels: Vec<String> = self.rows.iter().map(|r| r[idx].clone()).collect();
        levels.sort();
        levels.dedup();
        let map: BTreeMap<&str, usize> =
            levels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let index = self.rows.iter().map(|r| map[r[idx].as_str()]).collect();
        Ok((index, levels))
    }

    /// Canonical byte rendering used for content hashes.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = self.columns.join(",").into_bytes();
        for row in &self.rows {
            out.push(b'\n');
            out.extend_from_slice(row.join(",").as_bytes());
        }
        out
    }
}

/// FNV-1a content hash, rendered as fixed-width hex.
pub fn fnv1a_hex(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rectangular_csv() {
        let d = Dataset::parse("y,x\n1.5,2\n2.5,3\n", false).unwrap();
        assert_eq!(d.n_rows(), 2);
        assert_eq!(d.numeric("y").unwrap(), vec![1.5, 2.5]);
        assert!(d.numeric("missing").is_err());
    }

    #[test]
    fn rejects_missing_values_unless_dropping() {
        let text = "y,x\n1,2\nNA,3\n4,\n5,6\n";
        let err = Dataset::parse(text, false).unwrap_err();
        assert!(err.to_string().contains("column 'y'"));
        let d = Dataset::parse(text, true).unwrap();
        assert_eq!(d.n_rows(), 2);
    }

    #[test]
    fn rejects_ragged_rows() {
        assert!(Dataset::parse("a,b\n1,2,3\n", false).is_err());
    }

    #[test]
    fn group_levels_sorted_lexicographically() {
        let d = Dataset::parse("g\nb\na\nb\nc\n", false).unwrap();
        let (idx, levels) = d.groups("g").unwrap();
        assert_eq!(levels, vec!["a", "b", "c"]);
        assert_eq!(idx, vec![1, 0, 1, 2]);
    }

    #[test]
    fn hash_is_stable() {
        let d = Dataset::parse("y\n1\n2\n", false).unwrap();
        let h1 = fnv1a_hex(&d.canonical_bytes());
        let h2 = fnv1a_hex(&d.canonical_bytes());
        assert_eq!(h1, h2);
        let e = Dataset::parse("y\n1\n3\n", false).unwrap();
        assert_ne!(h1, fnv1a_hex(&e.canonical_bytes()));
    }
}
