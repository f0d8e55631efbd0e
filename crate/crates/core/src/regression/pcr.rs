use nalgebra::{DMatrix, DVector};

use super::pca::{fit_pca, PcaBasis};
use crate::error::{Error, Result};

/// Least squares on the top-`k` principal scores, intercept absorbed by centering.
#[derive(Debug, Clone, PartialEq)]
pub struct PcrModel {
    pub basis: PcaBasis,
    pub weights: Vec<f64>,
    pub intercept: f64,
}

pub fn fit_pcr(x: &DMatrix<f64>, y: &[f64], k: usize) -> Result<PcrModel> {
    if y.len() != x.nrows() {
        return Err(Error::LengthMismatch {
            left: x.nrows(),
            right: y.len(),
        });
    }
    let basis = fit_pca(x, k)?;
    let scores = basis.transform(x)?;
    let y_mean = y.iter().sum::<f64>() / y.len() as f64;
    let yc = DVector::from_iterator(y.len(), y.iter().map(|v| v - y_mean));

    // scores are centered, so the intercept is the target mean
    let gram = scores.transpose() * &scores;
    let scale = gram.diagonal().amax();
    if scale <= 0.0 || gram.diagonal().iter().any(|&g| g <= scale * 1e-14) {
        return Err(Error::Degenerate("zero-variance principal score".into()));
    }
    let rhs = scores.transpose() * yc;
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::Degenerate("score matrix is not full rank".into()))?;
    let weights = chol.solve(&rhs);
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::IllConditioned("principal component regression"));
    }
    Ok(PcrModel {
        basis,
        weights: weights.iter().copied().collect(),
        intercept: y_mean,
    })
}

impl PcrModel {
    pub fn input_dim(&self) -> usize {
        self.basis.input_dim()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let scores = self.basis.project(x)?;
        Ok(self.intercept + scores.iter().zip(&self.weights).map(|(s, w)| s * w).sum::<f64>())
    }

    /// Weights mapped back to the input features: `components^T * weights`.
    pub fn feature_weights(&self) -> Vec<f64> {
        let w = DVector::from_column_slice(&self.weights);
        (self.basis.components.transpose() * w).iter().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::metrics::r2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn gaussian(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal))
    }

    fn predict_all(m: &PcrModel, x: &DMatrix<f64>) -> Vec<f64> {
        x.row_iter()
            .map(|r| m.predict(r.transpose().as_slice()).unwrap())
            .collect()
    }

    #[test]
    fn realizable_first_score() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = gaussian(&mut rng, 40, 6);
        let basis = fit_pca(&x, 1).unwrap();
        let s = basis.transform(&x).unwrap();
        let y: Vec<f64> = (0..40).map(|r| 2.5 * s[(r, 0)] - 1.0).collect();
        let model = fit_pcr(&x, &y, 1).unwrap();
        let fitted = predict_all(&model, &x);
        assert!((r2(&y, &fitted).unwrap() - 1.0).abs() < 1e-9);
        // a training row reproduces its closed-form fitted value
        let row: Vec<f64> = x.row(3).iter().copied().collect();
        assert!((model.predict(&row).unwrap() - y[3]).abs() < 1e-9);
    }

    #[test]
    fn constant_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x = gaussian(&mut rng, 20, 5);
        let model = fit_pcr(&x, &[4.0; 20], 3).unwrap();
        assert_eq!(model.intercept, 4.0);
        assert!(model.weights.iter().all(|w| w.abs() < 1e-12));
    }

    /// Minimum-norm least squares on centered wide data through the pseudo-inverse of the
    /// centered Gram matrix, whose null space is spanned by the ones vector.
    #[test]
    fn full_row_space_matches_min_norm_least_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (n, d) = (10, 25);
        let x = gaussian(&mut rng, n, d);
        let y: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let model = fit_pcr(&x, &y, n - 1).unwrap();

        let mean: Vec<f64> = (0..d).map(|c| x.column(c).sum() / n as f64).collect();
        let xc = DMatrix::from_fn(n, d, |r, c| x[(r, c)] - mean[c]);
        let y_mean = y.iter().sum::<f64>() / n as f64;
        let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
        let ones = DMatrix::from_element(n, n, 1.0 / n as f64);
        let g_pinv = (&xc * xc.transpose() + &ones).try_inverse().unwrap() - &ones;
        let w = xc.transpose() * g_pinv * yc;

        let probe = gaussian(&mut rng, 5, d);
        for r in 0..5 {
            let row: Vec<f64> = probe.row(r).iter().copied().collect();
            let oracle = y_mean + (0..d).map(|c| (row[c] - mean[c]) * w[c]).sum::<f64>();
            assert!((model.predict(&row).unwrap() - oracle).abs() < 1e-6);
        }
    }

    #[test]
    fn scaling_target_scales_predictions() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = gaussian(&mut rng, 25, 7);
        let y: Vec<f64> = (0..25).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let c = 3.0;
        let yc: Vec<f64> = y.iter().map(|v| v * c).collect();
        let a = predict_all(&fit_pcr(&x, &y, 4).unwrap(), &x);
        let b = predict_all(&fit_pcr(&x, &yc, 4).unwrap(), &x);
        for (p, q) in a.iter().zip(&b) {
            assert!((p * c - q).abs() < 1e-12 * q.abs().max(1.0));
        }
        assert!((r2(&y, &a).unwrap() - r2(&yc, &b).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn feature_weights_reproduce_predictions() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let x = gaussian(&mut rng, 30, 9);
        let y: Vec<f64> = (0..30).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let m = fit_pcr(&x, &y, 5).unwrap();
        let w = m.feature_weights();
        let row: Vec<f64> = x.row(0).iter().copied().collect();
        let direct = m.intercept
            + row.iter().zip(&m.basis.mean).zip(&w).map(|((v, mu), wi)| (v - mu) * wi).sum::<f64>();
        assert!((direct - m.predict(&row).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn errors() {
        let x = DMatrix::from_fn(6, 3, |r, c| (r + 2 * c) as f64 + (r * c) as f64 * 0.1);
        assert!(matches!(fit_pcr(&x, &[0.0; 5], 1), Err(Error::LengthMismatch { .. })));
        assert!(matches!(fit_pcr(&x, &[0.0; 6], 6), Err(Error::ComponentRange { .. })));
        // centered columns are all multiples of one another
        assert!(matches!(fit_pcr(&x, &[1.0, 2.0, 0.0, 3.0, 1.0, 2.0], 2), Err(Error::Degenerate(_))));
        let m = fit_pcr(&x, &[1.0, 2.0, 0.0, 3.0, 1.0, 2.0], 1).unwrap();
        assert!(matches!(m.predict(&[0.0; 4]), Err(Error::Dimension { .. })));
    }
}
