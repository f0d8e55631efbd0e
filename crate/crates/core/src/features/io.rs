//! Feature matrices on disk: CSV (header + one row per take) and a JSON row-metadata sidecar.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::matrix::{FeatureMatrix, FeatureSource, NormStats};
use super::vectorize::lower_cell;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RowMeta {
    rows: Vec<FeatureSource>,
}

pub fn meta_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

pub fn format_csv(fm: &FeatureMatrix) -> String {
    let mut out = String::new();
    for k in 0..fm.ncols() {
        let (i, j) = lower_cell(k);
        if k > 0 {
            out.push(',');
        }
        let _ = write!(out, "k_{i}_{j}");
    }
    out.push('\n');
    let data = fm.data();
    for r in 0..data.nrows() {
        for c in 0..data.ncols() {
            if c > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", data[(r, c)]);
        }
        out.push('\n');
    }
    out
}

/// Writes `<path>` and `<path stem>.meta.json`.
pub fn write_feature_matrix(path: &Path, fm: &FeatureMatrix) -> Result<()> {
    std::fs::write(path, format_csv(fm)).map_err(|e| Error::io(path, e))?;
    let meta = RowMeta {
        rows: fm.rows().to_vec(),
    };
    write_json(&meta_path(path), &meta)
}

pub fn read_feature_matrix(path: &Path) -> Result<FeatureMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let meta: RowMeta = read_json(&meta_path(path))?;
    let mut lines = text.lines().enumerate();
    let cols = match lines.next() {
        Some((_, header)) if !header.is_empty() => header.split(',').count(),
        _ => 0,
    };
    let mut values = Vec::new();
    let mut nrows = 0;
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols {
            return Err(Error::ColumnCount {
                path: path.to_path_buf(),
                line: idx + 1,
                expected: cols,
                found: fields.len(),
            });
        }
        for (c, tok) in fields.iter().enumerate() {
            let v: f64 = tok.trim().parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                token: tok.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    column: c,
                });
            }
            values.push(v);
        }
        nrows += 1;
    }
    FeatureMatrix::new(DMatrix::from_row_slice(nrows, cols, &values), meta.rows)
}

pub fn write_norm_stats(path: &Path, stats: &NormStats) -> Result<()> {
    write_json(path, stats)
}

pub fn read_norm_stats(path: &Path) -> Result<NormStats> {
    read_json(path)
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mocap::MotionKind;

    #[test]
    fn csv_round_trip_is_lossless() {
        let data = DMatrix::from_fn(3, 6, |r, c| (r as f64 + 0.1) / (c as f64 + 3.0));
        let rows = (0..3)
            .map(|i| FeatureSource {
                participant_id: format!("P{i}"),
                stimulus_id: "S".into(),
                kind: MotionKind::Velocity,
            })
            .collect();
        let fm = FeatureMatrix::new(data, rows).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        write_feature_matrix(&path, &fm).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("k_1_0,k_2_0,k_2_1,k_3_0"));
        assert_eq!(read_feature_matrix(&path).unwrap(), fm);
    }

    #[test]
    fn stats_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        let stats = NormStats {
            mu: vec![0.5, 1.0 / 3.0],
            sigma: vec![0.0, 2.0],
        };
        write_norm_stats(&path, &stats).unwrap();
        assert_eq!(read_norm_stats(&path).unwrap(), stats);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"mu\"") && text.contains("\"sigma\""));
    }
}
