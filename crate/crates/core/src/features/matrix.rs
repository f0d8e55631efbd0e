use nalgebra::{DMatrix, RowDVector};
use serde::{Deserialize, Serialize};

use super::correntropy::correntropy_matrix;
use super::vectorize::{lower_len, vectorize_lower};
use crate::error::{Error, Result};
use crate::mocap::{velocity, JointTake, MarkerTake, MotionKind, SkeletonMap, JOINT_COLUMNS};

/// Length of a full feature vector (strict lower triangle of 60 x 60).
pub const FEATURE_LEN: usize = lower_len(JOINT_COLUMNS);

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureSource {
    pub participant_id: String,
    pub stimulus_id: String,
    pub kind: MotionKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub source: FeatureSource,
    pub normalized: bool,
}

/// Correntropy matrix of a joint take, flattened to its 1770 lower-triangle entries.
pub fn extract_features(take: &JointTake, sigma: f64) -> Result<FeatureVector> {
    let k = correntropy_matrix(take, sigma)?;
    Ok(FeatureVector {
        values: vectorize_lower(&k),
        source: FeatureSource {
            participant_id: take.participant_id().to_string(),
            stimulus_id: take.stimulus_id().to_string(),
            kind: take.kind(),
        },
        normalized: false,
    })
}

/// Marker take to feature vector: joints, optional velocity, correntropy, flattening.
pub fn take_features(
    take: &MarkerTake,
    skeleton: &SkeletonMap,
    kind: MotionKind,
    sigma: f64,
) -> Result<FeatureVector> {
    let joints = skeleton.derive_joints(take)?;
    match kind {
        MotionKind::Position => extract_features(&joints, sigma),
        MotionKind::Velocity => extract_features(&velocity(&joints)?, sigma),
    }
}

/// Column statistics for Gaussian normalization. `sigma` is the population standard
/// deviation; zero marks a constant column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl NormStats {
    pub fn fit(x: &DMatrix<f64>) -> Result<Self> {
        let n = x.nrows();
        if n < 2 {
            return Err(Error::TooFewRows {
                required: 2,
                found: n,
            });
        }
        let mut mu = Vec::with_capacity(x.ncols());
        let mut sigma = Vec::with_capacity(x.ncols());
        for col in x.column_iter() {
            let m = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
            let s = var.sqrt();
            // rounding in the mean leaves a few ulps of spread on constant columns
            let constant = s <= 4.0 * f64::EPSILON * m.abs();
            mu.push(m);
            sigma.push(if constant { 0.0 } else { s });
        }
        Ok(NormStats { mu, sigma })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn apply_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(self.mu.iter().zip(&self.sigma))
            .map(|(&v, (&m, &s))| if s > 0.0 { (v - m) / s } else { 0.0 })
            .collect())
    }

    pub fn apply(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: x.ncols(),
            });
        }
        let mut out = x.clone();
        for (c, mut col) in out.column_iter_mut().enumerate() {
            let (m, s) = (self.mu[c], self.sigma[c]);
            for v in col.iter_mut() {
                *v = if s > 0.0 { (*v - m) / s } else { 0.0 };
            }
        }
        Ok(out)
    }
}

/// Samples x features, one row per take.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: DMatrix<f64>,
    rows: Vec<FeatureSource>,
    stats: Option<NormStats>,
}

impl FeatureMatrix {
    pub fn new(data: DMatrix<f64>, rows: Vec<FeatureSource>) -> Result<Self> {
        if data.nrows() != rows.len() {
            return Err(Error::LengthMismatch {
                left: data.nrows(),
                right: rows.len(),
            });
        }
        Ok(FeatureMatrix {
            data,
            rows,
            stats: None,
        })
    }

    pub fn from_vectors(vectors: &[FeatureVector]) -> Result<Self> {
        let cols = vectors.first().map_or(0, |v| v.values.len());
        if let Some(bad) = vectors.iter().find(|v| v.values.len() != cols) {
            return Err(Error::LengthMismatch {
                left: bad.values.len(),
                right: cols,
            });
        }
        let rows: Vec<RowDVector<f64>> = vectors
            .iter()
            .map(|v| RowDVector::from_row_slice(&v.values))
            .collect();
        let data = if rows.is_empty() {
            DMatrix::zeros(0, cols)
        } else {
            DMatrix::from_rows(&rows)
        };
        Self::new(data, vectors.iter().map(|v| v.source.clone()).collect())
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn rows(&self) -> &[FeatureSource] {
        &self.rows
    }

    pub fn stats(&self) -> Option<&NormStats> {
        self.stats.as_ref()
    }

    pub fn is_normalized(&self) -> bool {
        self.stats.is_some()
    }

    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    /// Subset of rows, in the given order. Normalization state is dropped.
    pub fn select_rows(&self, idx: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            data: self.data.select_rows(idx),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            stats: None,
        }
    }
}

/// Standardizes every column to zero mean and unit population variance; constant columns
/// become zeros. The fitted statistics are kept for held-out rows.
pub fn gaussian_normalize(x: &FeatureMatrix) -> Result<FeatureMatrix> {
    let stats = NormStats::fit(&x.data)?;
    Ok(FeatureMatrix {
        data: stats.apply(&x.data)?,
        rows: x.rows.clone(),
        stats: Some(stats),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn src(p: &str) -> FeatureSource {
        FeatureSource {
            participant_id: p.into(),
            stimulus_id: "s".into(),
            kind: MotionKind::Position,
        }
    }

    fn fm(cols: &[&[f64]]) -> FeatureMatrix {
        let n = cols[0].len();
        let data = DMatrix::from_fn(n, cols.len(), |r, c| cols[c][r]);
        FeatureMatrix::new(data, (0..n).map(|i| src(&i.to_string())).collect()).unwrap()
    }

    #[test]
    fn standardizes_column() {
        let out = gaussian_normalize(&fm(&[&[1.0, 2.0, 3.0]])).unwrap();
        // population std sqrt(2/3)
        let want = [-1.224745, 0.0, 1.224745];
        for (g, w) in out.data().iter().zip(want) {
            assert!((g - w).abs() < 1e-6);
        }
        assert!((out.data()[(0, 0)] + 1.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn constant_column_is_zeroed() {
        let out = gaussian_normalize(&fm(&[&[5.0, 5.0, 5.0], &[0.1, 0.1, 0.1]])).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
        assert_eq!(out.stats().unwrap().sigma, vec![0.0, 0.0]);
    }

    #[test]
    fn idempotent_on_standardized() {
        let once = gaussian_normalize(&fm(&[&[3.0, -1.0, 4.0, 1.0, 5.5], &[9.0, 2.0, 6.0, 5.0, 3.0]]))
            .unwrap();
        let twice = gaussian_normalize(&once).unwrap();
        assert!((once.data() - twice.data()).amax() < 1e-9);
        for col in once.data().column_iter() {
            assert!((col.iter().sum::<f64>() / 5.0).abs() < 1e-9);
        }
    }

    #[test]
    fn needs_two_rows() {
        assert!(matches!(
            gaussian_normalize(&fm(&[&[1.0]])),
            Err(Error::TooFewRows { .. })
        ));
    }

    #[test]
    fn held_out_rows_use_training_stats() {
        let train = gaussian_normalize(&fm(&[&[0.0, 2.0]])).unwrap();
        let stats = train.stats().unwrap();
        assert_eq!(stats.apply_row(&[4.0]).unwrap(), vec![3.0]);
        assert!(stats.apply_row(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn extract_has_1770_entries() {
        let data = DMatrix::from_fn(10, 60, |r, c| (r * c) as f64);
        let take = JointTake::from_matrix(120.0, data, MotionKind::Position, "P1", "S1").unwrap();
        let v = extract_features(&take, 12.0).unwrap();
        assert_eq!(v.values.len(), FEATURE_LEN);
        assert_eq!(FEATURE_LEN, 1770);
        assert_eq!(v.source.participant_id, "P1");
    }
}
