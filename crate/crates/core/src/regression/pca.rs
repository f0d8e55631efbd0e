use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Centered principal basis: `components` rows are orthonormal directions ordered by
/// non-increasing singular value.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaBasis {
    pub mean: Vec<f64>,
    pub components: DMatrix<f64>,
    pub explained_variance: Vec<f64>,
}

pub(crate) fn column_means(x: &DMatrix<f64>) -> Vec<f64> {
    let n = x.nrows() as f64;
    x.column_iter().map(|c| c.iter().sum::<f64>() / n).collect()
}

pub(crate) fn center(x: &DMatrix<f64>, mean: &[f64]) -> DMatrix<f64> {
    let mut xc = x.clone();
    for (c, mut col) in xc.column_iter_mut().enumerate() {
        col.add_scalar_mut(-mean[c]);
    }
    xc
}

/// Thin SVD of `x` with singular triplets sorted by decreasing singular value.
/// Returns `(u, s, vt)`.
pub(crate) fn sorted_svd(x: DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let svd = x.svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::IllConditioned("singular value decomposition")),
    };
    let s = svd.singular_values;
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::IllConditioned("singular value decomposition"));
    }
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    let u = u.select_columns(&order);
    let vt = vt.select_rows(&order);
    let s = order.iter().map(|&i| s[i]).collect();
    Ok((u, s, vt))
}

/// Fits the top-`k` principal components of the rows of `x`.
pub fn fit_pca(x: &DMatrix<f64>, k: usize) -> Result<PcaBasis> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::TooFewRows {
            required: 2,
            found: n,
        });
    }
    let max = (n - 1).min(x.ncols());
    if k == 0 || k > max {
        return Err(Error::ComponentRange { k, max });
    }
    let mean = column_means(x);
    let (_, s, vt) = sorted_svd(center(x, &mean))?;
    let mut components = vt.rows(0, k).into_owned();
    for mut row in components.row_iter_mut() {
        // sign convention: the largest-magnitude entry is positive
        let pivot = row
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |best, (i, &v)| {
                if v.abs() > best.1.abs() {
                    (i, v)
                } else {
                    best
                }
            })
            .1;
        if pivot < 0.0 {
            row.neg_mut();
        }
    }
    let explained_variance = s[..k].iter().map(|v| v * v / (n - 1) as f64).collect();
    Ok(PcaBasis {
        mean,
        components,
        explained_variance,
    })
}

impl PcaBasis {
    pub fn k(&self) -> usize {
        self.components.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.components.ncols()
    }

    /// Scores of one row.
    pub fn project(&self, x: &[f64]) -> Result<DVector<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        let centered = DVector::from_iterator(x.len(), x.iter().zip(&self.mean).map(|(a, m)| a - m));
        Ok(&self.components * centered)
    }

    /// Scores of every row of `x` (rows x k).
    pub fn transform(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                found: x.ncols(),
            });
        }
        Ok(center(x, &self.mean) * self.components.transpose())
    }
}
