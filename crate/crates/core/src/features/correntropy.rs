use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mocap::JointTake;

/// Kernel width used for joint-coordinate series in millimetres.
pub const DEFAULT_SIGMA: f64 = 12.0;

/// Correntropy between two equal-length series:
/// `exp(-||x - y||^2 / (2 sigma^2 T^2))` with `T` the series length.
pub fn correntropy(x: &[f64], y: &[f64], sigma: f64, series_length: usize) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    check_sigma(sigma)?;
    if series_length == 0 {
        return Err(Error::TooFewFrames {
            required: 1,
            found: 0,
        });
    }
    Ok(kernel(squared_distance(x, y), sigma, series_length))
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::Sigma(sigma))
    }
}

#[inline]
fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

#[inline]
fn kernel(dist_sq: f64, sigma: f64, series_length: usize) -> f64 {
    let t = series_length as f64;
    (-dist_sq / (2.0 * sigma * sigma * t * t)).exp()
}

/// Symmetric matrix of pairwise correntropy values with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrentropyMatrix {
    values: DMatrix<f64>,
    sigma: f64,
    series_length: usize,
}

impl CorrentropyMatrix {
    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn series_length(&self) -> usize {
        self.series_length
    }

    /// Wraps a square matrix without recomputing it. Diagonal and symmetry are enforced by
    /// copying the strict lower triangle over the upper one.
    pub fn from_lower(mut values: DMatrix<f64>, sigma: f64, series_length: usize) -> Result<Self> {
        if values.nrows() != values.ncols() {
            return Err(Error::LengthMismatch {
                left: values.nrows(),
                right: values.ncols(),
            });
        }
        let d = values.nrows();
        for i in 0..d {
            values[(i, i)] = 1.0;
            for j in 0..i {
                values[(j, i)] = values[(i, j)];
            }
        }
        Ok(CorrentropyMatrix {
            values,
            sigma,
            series_length,
        })
    }
}

/// Correntropy matrix over the 60 coordinate series of a joint take.
pub fn correntropy_matrix(take: &JointTake, sigma: f64) -> Result<CorrentropyMatrix> {
    correntropy_matrix_of(take.data(), sigma)
}

/// Correntropy matrix over the columns of any frames x d matrix.
pub fn correntropy_matrix_of(series: &DMatrix<f64>, sigma: f64) -> Result<CorrentropyMatrix> {
    check_sigma(sigma)?;
    let frames = series.nrows();
    if frames == 0 {
        return Err(Error::TooFewFrames {
            required: 1,
            found: 0,
        });
    }
    let d = series.ncols();
    // each row of the lower triangle is independent; no reduction crosses pairs
    let rows: Vec<Vec<f64>> = (0..d)
        .into_par_iter()
        .map(|i| {
            let xi = series.column(i);
            let xi = xi.as_slice();
            (0..i)
                .map(|j| {
                    let xj = series.column(j);
                    kernel(squared_distance(xi, xj.as_slice()), sigma, frames)
                })
                .collect()
        })
        .collect();
    let mut values = DMatrix::<f64>::identity(d, d);
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            values[(i, j)] = v;
            values[(j, i)] = v;
        }
    }
    Ok(CorrentropyMatrix {
        values,
        sigma,
        series_length: frames,
    })
}
