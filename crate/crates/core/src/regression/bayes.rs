//! Bayesian ridge regression with evidence-maximized hyperparameters.
//!
//! Model: `y ~ N(X beta, 1/alpha)`, prior `beta ~ N(0, 1/lambda I)`. Given the
//! hyperparameters the posterior is Gaussian with
//!
//! ```text
//! Sigma = (alpha X^T X + lambda I)^-1,   beta = alpha Sigma X^T y
//! ```
//!
//! and the evidence fixed-point updates are
//!
//! ```text
//! gamma  = sum_i alpha s_i / (alpha s_i + lambda)      (s_i eigenvalues of X^T X)
//! lambda = gamma / |beta|^2
//! alpha  = (n - gamma) / |y - X beta|^2
//! ```
//!
//! Everything is evaluated through one thin SVD `X = U S V^T` of the centered design, so
//! each iteration is O(r d) with r = min(n, d). The posterior covariance is kept in that
//! factored form: `Sigma = V diag(1/(alpha s^2 + lambda)) V^T + (I - V V^T) / lambda`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::pca::{center, column_means, sorted_svd};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BayesConfig {
    /// Convergence threshold on the largest absolute weight change between iterations.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for BayesConfig {
    fn default() -> Self {
        BayesConfig {
            tol: 1e-3,
            max_iter: 300,
        }
    }
}

/// Gaussian posterior covariance over the weights, in SVD-factored form.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorCovariance {
    /// Right singular vectors of the centered training design (r x d).
    pub directions: DMatrix<f64>,
    /// Posterior variance along each direction, `1 / (alpha s_i^2 + lambda)`.
    pub variances: Vec<f64>,
    /// Weight-prior precision; the variance in the orthogonal complement is `1 / lambda`.
    pub lambda: f64,
}

impl PosteriorCovariance {
    pub fn dim(&self) -> usize {
        self.directions.ncols()
    }

    /// `x^T Sigma x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let xv = DVector::from_column_slice(x);
        let proj = &self.directions * &xv;
        let iso = xv.norm_squared() / self.lambda;
        let corr: f64 = proj
            .iter()
            .zip(&self.variances)
            .map(|(p, v)| p * p * (v - 1.0 / self.lambda))
            .sum();
        (iso + corr).max(0.0)
    }

    /// Materializes the d x d matrix.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::<f64>::identity(d, d) / self.lambda;
        for (i, v) in self.variances.iter().enumerate() {
            let row = self.directions.row(i);
            m += row.transpose() * row * (v - 1.0 / self.lambda);
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BayesRidgeModel {
    /// Posterior mean over the centered inputs.
    pub weights: Vec<f64>,
    pub posterior_covariance: PosteriorCovariance,
    /// Noise precision `1 / sigma^2`.
    pub alpha: f64,
    /// Weight-prior precision `1 / sigma_beta^2`.
    pub lambda: f64,
    /// Training target mean.
    pub intercept: f64,
    /// Training column means; inputs are centered with these before prediction.
    pub x_mean: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// Mean and standard deviation of a prediction. `std` is zero for point regressors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub mean: f64,
    pub std: f64,
}

struct Centered {
    x_mean: Vec<f64>,
    y_mean: f64,
    /// U^T y
    uty: Vec<f64>,
    s: Vec<f64>,
    vt: DMatrix<f64>,
    y_norm_sq: f64,
    n: usize,
}

fn prepare(x: &DMatrix<f64>, y: &[f64]) -> Result<Centered> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::TooFewRows {
            required: 2,
            found: n,
        });
    }
    if y.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: y.len(),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::IllConditioned("training data"));
    }
    let x_mean = column_means(x);
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
    let (u, s, vt) = sorted_svd(center(x, &x_mean))?;
    let uty = (u.transpose() * &yc).iter().copied().collect();
    Ok(Centered {
        x_mean,
        y_mean,
        uty,
        s,
        vt,
        y_norm_sq: yc.norm_squared(),
        n,
    })
}

impl Centered {
    /// Posterior-mean coordinates along the right singular vectors.
    fn coefficients(&self, alpha: f64, lambda: f64) -> Vec<f64> {
        self.s
            .iter()
            .zip(&self.uty)
            .map(|(&s, &c)| alpha * s * c / (alpha * s * s + lambda))
            .collect()
    }

    fn weights(&self, coef: &[f64]) -> Vec<f64> {
        let c = DVector::from_column_slice(coef);
        (self.vt.transpose() * c).iter().copied().collect()
    }

    fn residual_sq(&self, coef: &[f64]) -> f64 {
        let in_span: f64 = self.uty.iter().map(|c| c * c).sum();
        let outside = (self.y_norm_sq - in_span).max(0.0);
        outside
            + self
                .s
                .iter()
                .zip(&self.uty)
                .zip(coef)
                .map(|((s, c), b)| (c - s * b) * (c - s * b))
                .sum::<f64>()
    }

    fn model(
        &self,
        alpha: f64,
        lambda: f64,
        converged: bool,
        iterations: usize,
    ) -> Result<BayesRidgeModel> {
        let coef = self.coefficients(alpha, lambda);
        let weights = self.weights(&coef);
        if weights.iter().any(|w| !w.is_finite()) || !alpha.is_finite() || !lambda.is_finite() {
            return Err(Error::IllConditioned("bayesian ridge posterior"));
        }
        // numerically null directions carry the prior variance 1/lambda, same as the
        // complement, so they are not stored
        let s_max = self.s.first().copied().unwrap_or(0.0);
        let cutoff = s_max * f64::EPSILON * self.vt.nrows().max(self.vt.ncols()) as f64;
        let keep: Vec<usize> = (0..self.s.len()).filter(|&i| self.s[i] > cutoff).collect();
        Ok(BayesRidgeModel {
            weights,
            posterior_covariance: PosteriorCovariance {
                directions: self.vt.select_rows(&keep),
                variances: keep
                    .iter()
                    .map(|&i| 1.0 / (alpha * self.s[i] * self.s[i] + lambda))
                    .collect(),
                lambda,
            },
            alpha,
            lambda,
            intercept: self.y_mean,
            x_mean: self.x_mean.clone(),
            converged,
            iterations,
        })
    }
}

/// Posterior at fixed hyperparameters, no evidence updates.
pub fn posterior(x: &DMatrix<f64>, y: &[f64], alpha: f64, lambda: f64) -> Result<BayesRidgeModel> {
    if !(alpha > 0.0 && lambda > 0.0) {
        return Err(Error::Config(format!(
            "precisions must be positive (alpha={alpha}, lambda={lambda})"
        )));
    }
    prepare(x, y)?.model(alpha, lambda, true, 0)
}

pub fn fit_bayes_ridge(x: &DMatrix<f64>, y: &[f64], config: &BayesConfig) -> Result<BayesRidgeModel> {
    let c = prepare(x, y)?;
    let n = c.n as f64;

    if c.y_norm_sq == 0.0 {
        // constant target: nothing to explain, collapse the posterior onto zero weights
        let scale = c.y_mean.abs().max(1.0);
        let precision = 1.0 / (f64::EPSILON * f64::EPSILON * scale * scale);
        return c.model(precision, precision, true, 0);
    }

    let eps2 = f64::EPSILON * f64::EPSILON;
    let rss_floor = eps2 * c.y_norm_sq;
    let mut alpha = n / c.y_norm_sq; // 1 / var(y)
    let mut lambda = 1.0;
    let mut prev: Option<Vec<f64>> = None;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=config.max_iter {
        iterations = iter;
        let coef = c.coefficients(alpha, lambda);
        let beta = c.weights(&coef);
        if let Some(p) = &prev {
            let delta = beta
                .iter()
                .zip(p)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if delta < config.tol {
                converged = true;
                break;
            }
        }

        let gamma: f64 = c
            .s
            .iter()
            .map(|s| alpha * s * s / (alpha * s * s + lambda))
            .sum();
        let beta_sq: f64 = coef.iter().map(|b| b * b).sum();
        lambda = gamma / beta_sq.max(eps2);
        alpha = (n - gamma).max(f64::EPSILON) / c.residual_sq(&coef).max(rss_floor);
        if !(alpha.is_finite() && lambda.is_finite()) || alpha <= 0.0 || lambda <= 0.0 {
            return Err(Error::IllConditioned("evidence update"));
        }
        prev = Some(beta);
    }
    if !converged {
        log::warn!("event=bayes_not_converged iterations={iterations}");
    }
    c.model(alpha, lambda, converged, iterations)
}

impl BayesRidgeModel {
    pub fn input_dim(&self) -> usize {
        self.weights.len()
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        let xc: Vec<f64> = x.iter().zip(&self.x_mean).map(|(a, m)| a - m).collect();
        let mean = self.intercept + xc.iter().zip(&self.weights).map(|(a, w)| a * w).sum::<f64>();
        let var = 1.0 / self.alpha + self.posterior_covariance.quad_form(&xc);
        Ok(Prediction {
            mean,
            std: var.sqrt(),
        })
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

    fn ols(x: &DMatrix<f64>, y: &[f64]) -> Vec<f64> {
        // least squares with intercept via normal equations on [1 X]
        let n = x.nrows();
        let d = x.ncols();
        let a = DMatrix::from_fn(n, d + 1, |r, c| if c == 0 { 1.0 } else { x[(r, c - 1)] });
        let yv = DVector::from_column_slice(y);
        let sol = (a.transpose() * &a).lu().solve(&(a.transpose() * yv)).unwrap();
        sol.iter().skip(1).copied().collect()
    }

    fn planted(seed: u64, n: usize, d: usize, noise: f64) -> (DMatrix<f64>, Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = gaussian(&mut rng, n, d);
        let w: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let y = (0..n)
            .map(|r| {
                1.5 + (0..d).map(|c| x[(r, c)] * w[c]).sum::<f64>()
                    + noise * rng.sample::<f64, _>(StandardNormal)
            })
            .collect();
        (x, y, w)
    }

    #[test]
    fn recovers_planted_weights() {
        let (x, y, w) = planted(21, 200, 5, 0.0);
        let m = fit_bayes_ridge(&x, &y, &BayesConfig::default()).unwrap();
        for (a, b) in m.weights.iter().zip(&w) {
            assert!((a - b).abs() < 1e-3, "{a} vs {b}");
        }
        let fitted: Vec<f64> = x
            .row_iter()
            .map(|r| m.predict(r.transpose().as_slice()).unwrap().mean)
            .collect();
        assert!(r2(&y, &fitted).unwrap() >= 0.999);
        assert!(m.alpha > 0.0 && m.lambda > 0.0);
    }

    #[test]
    fn constant_target_gives_flat_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let x = gaussian(&mut rng, 30, 4);
        let m = fit_bayes_ridge(&x, &[7.0; 30], &BayesConfig::default()).unwrap();
        assert!(m.weights.iter().all(|w| w.abs() < 1e-12));
        assert_eq!(m.intercept, 7.0);
        let a = m.predict(&[0.0; 4]).unwrap();
        let b = m.predict(&[50.0, -20.0, 3.0, 9.0]).unwrap();
        assert_eq!(a.mean, 7.0);
        assert!(a.std < 1e-6 && b.std < 1e-6);
        assert!((a.std - b.std).abs() < 1e-9);
    }

    #[test]
    fn duplicated_rows_keep_posterior_mean() {
        let (x, y, _) = planted(23, 200, 5, 1e-4);
        let x2 = DMatrix::from_fn(400, 5, |r, c| x[(r % 200, c)]);
        let y2: Vec<f64> = (0..400).map(|r| y[r % 200]).collect();
        let cfg = BayesConfig {
            tol: 1e-10,
            max_iter: 300,
        };
        let a = fit_bayes_ridge(&x, &y, &cfg).unwrap();
        let b = fit_bayes_ridge(&x2, &y2, &cfg).unwrap();
        for (p, q) in a.weights.iter().zip(&b.weights) {
            assert!((p - q).abs() < 1e-6, "{p} vs {q}");
        }
    }

    #[test]
    fn ridge_limit_is_least_squares() {
        let (x, y, _) = planted(24, 60, 6, 0.5);
        let m = posterior(&x, &y, 1.0, 1e-10).unwrap();
        for (a, b) in m.weights.iter().zip(ols(&x, &y)) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn posterior_matches_dense_formula() {
        let (x, y, _) = planted(25, 12, 4, 0.3);
        let (alpha, lambda) = (2.0, 0.7);
        let m = posterior(&x, &y, alpha, lambda).unwrap();
        let mean: Vec<f64> = (0..4).map(|c| x.column(c).sum() / 12.0).collect();
        let xc = DMatrix::from_fn(12, 4, |r, c| x[(r, c)] - mean[c]);
        let ybar = y.iter().sum::<f64>() / 12.0;
        let yc = DVector::from_iterator(12, y.iter().map(|v| v - ybar));
        let sigma = (xc.transpose() * &xc * alpha + DMatrix::identity(4, 4) * lambda)
            .try_inverse()
            .unwrap();
        let beta = &sigma * xc.transpose() * yc * alpha;
        let dense = m.posterior_covariance.to_dense();
        assert!((&dense - &sigma).amax() < 1e-12);
        assert_eq!(dense, dense.transpose());
        assert!(dense.clone().cholesky().is_some());
        for (a, b) in m.weights.iter().zip(beta.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn wide_design_covariance_is_positive_definite() {
        let (x, y, _) = planted(26, 8, 15, 0.3);
        let m = fit_bayes_ridge(&x, &y, &BayesConfig::default()).unwrap();
        let dense = m.posterior_covariance.to_dense();
        assert!(dense.cholesky().is_some());
        let probe: Vec<f64> = (0..15).map(|i| (i as f64).sin()).collect();
        let direct = {
            let v = DVector::from_column_slice(&probe);
            (v.transpose() * m.posterior_covariance.to_dense() * &v)[0]
        };
        assert!((direct - m.posterior_covariance.quad_form(&probe)).abs() < 1e-9 * direct.max(1.0));
    }

    #[test]
    fn prediction_uncertainty() {
        let (x, y, _) = planted(27, 50, 3, 0.5);
        let m = fit_bayes_ridge(&x, &y, &BayesConfig::default()).unwrap();
        let at_mean = m.predict(&m.x_mean.clone()).unwrap();
        assert!((at_mean.mean - m.intercept).abs() < 1e-9);
        let far = m.predict(&[40.0, -40.0, 40.0]).unwrap();
        assert!(far.std > at_mean.std);
        assert!(matches!(m.predict(&[0.0; 2]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn reports_non_convergence() {
        let (x, y, _) = planted(28, 40, 5, 1.0);
        let m = fit_bayes_ridge(&x, &y, &BayesConfig { tol: 0.0, max_iter: 3 }).unwrap();
        assert!(!m.converged);
        assert_eq!(m.iterations, 3);
    }

    #[test]
    fn deterministic() {
        let (x, y, _) = planted(29, 40, 5, 1.0);
        let a = fit_bayes_ridge(&x, &y, &BayesConfig::default()).unwrap();
        let b = fit_bayes_ridge(&x, &y, &BayesConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_input() {
        let x = DMatrix::from_element(1, 2, 1.0);
        assert!(matches!(
            fit_bayes_ridge(&x, &[1.0], &BayesConfig::default()),
            Err(Error::TooFewRows { .. })
        ));
        let x = DMatrix::from_fn(3, 2, |r, c| if r == 1 && c == 1 { f64::NAN } else { 1.0 });
        assert!(fit_bayes_ridge(&x, &[1.0, 2.0, 3.0], &BayesConfig::default()).is_err());
    }
}
