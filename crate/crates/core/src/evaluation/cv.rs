use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::FoldPlan;
use super::metrics::{r2, rmse};
use crate::error::{Error, Result};
use crate::mocap::MotionKind;
use crate::regression::{ModelSpec, TraitModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldScore {
    pub rmse: f64,
    pub r2: f64,
    pub n_train: usize,
    pub n_valid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub folds: Vec<FoldScore>,
    pub mean_rmse: f64,
    pub mean_r2: f64,
    /// Metrics over all out-of-fold predictions at once.
    pub pooled_rmse: f64,
    pub pooled_r2: f64,
    /// Out-of-fold prediction for every sample.
    pub predictions: Vec<f64>,
}

fn fit_fold(
    x: &DMatrix<f64>,
    y: &[f64],
    spec: &ModelSpec,
    plan: &FoldPlan,
    fold: usize,
    normalize: bool,
) -> Result<(Vec<usize>, TraitModel)> {
    let (train, valid) = plan.split(fold);
    if valid.len() < 2 {
        return Err(Error::Folds(format!(
            "fold {fold} has {} validation samples; at least 2 are needed",
            valid.len()
        )));
    }
    let xt = x.select_rows(&train);
    let yt: Vec<f64> = train.iter().map(|&i| y[i]).collect();
    // normalization statistics come from the training rows only
    let model = TraitModel::fit("cv", MotionKind::Position, &xt, &yt, spec, normalize)?;
    Ok((valid, model))
}

/// K-fold evaluation: fit on out-of-fold rows, score on the fold. Folds run in parallel;
/// results are stored by fold index so the outcome does not depend on scheduling.
pub fn cross_validate(
    x: &DMatrix<f64>,
    y: &[f64],
    spec: &ModelSpec,
    plan: &FoldPlan,
    normalize: bool,
) -> Result<CvResult> {
    if x.nrows() != y.len() || plan.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.nrows(),
            right: plan.len().min(y.len()),
        });
    }
    // hyperparameter sanity on the smallest training split, before any fitting
    let min_train = (0..plan.n_folds).map(|f| plan.split(f).0.len()).min().unwrap_or(0);
    spec.validate(min_train, x.ncols())?;

    let per_fold: Vec<(Vec<usize>, Vec<f64>)> = (0..plan.n_folds)
        .into_par_iter()
        .map(|fold| {
            let (valid, model) = fit_fold(x, y, spec, plan, fold, normalize)?;
            let preds = model
                .predict_rows(&x.select_rows(&valid))?
                .into_iter()
                .map(|p| p.mean)
                .collect();
            Ok((valid, preds))
        })
        .collect::<Result<_>>()?;

    let mut predictions = vec![0.0; y.len()];
    let mut folds = Vec::with_capacity(plan.n_folds);
    for (valid, preds) in &per_fold {
        let truth: Vec<f64> = valid.iter().map(|&i| y[i]).collect();
        for (&i, &p) in valid.iter().zip(preds) {
            predictions[i] = p;
        }
        folds.push(FoldScore {
            rmse: rmse(&truth, preds)?,
            r2: r2(&truth, preds)?,
            n_train: y.len() - valid.len(),
            n_valid: valid.len(),
        });
    }
    let k = folds.len() as f64;
    Ok(CvResult {
        mean_rmse: folds.iter().map(|f| f.rmse).sum::<f64>() / k,
        mean_r2: folds.iter().map(|f| f.r2).sum::<f64>() / k,
        pooled_rmse: rmse(y, &predictions)?,
        pooled_r2: r2(y, &predictions)?,
        folds,
        predictions,
    })
}

/// Feature weights averaged over the per-fold fits.
pub fn fold_averaged_weights(
    x: &DMatrix<f64>,
    y: &[f64],
    spec: &ModelSpec,
    plan: &FoldPlan,
    normalize: bool,
) -> Result<Vec<f64>> {
    let weights: Vec<Vec<f64>> = (0..plan.n_folds)
        .into_par_iter()
        .map(|fold| fit_fold(x, y, spec, plan, fold, normalize).map(|(_, m)| m.regressor.feature_weights()))
        .collect::<Result<_>>()?;
    let mut acc = vec![0.0; x.ncols()];
    for w in &weights {
        for (a, v) in acc.iter_mut().zip(w) {
            *a += v;
        }
    }
    Ok(acc.into_iter().map(|v| v / weights.len() as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::folds::Grouping;
    use crate::regression::BayesConfig;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn planted(seed: u64, n: usize, d: usize) -> (DMatrix<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let w: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y = (0..n).map(|r| (0..d).map(|c| x[(r, c)] * w[c]).sum()).collect();
        (x, y)
    }

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("P{i}")).collect()
    }

    #[test]
    fn planted_signal_scores_high() {
        let (x, y) = planted(41, 100, 8);
        let plan = FoldPlan::new(&ids(100), 5, 3, Grouping::None).unwrap();
        let res = cross_validate(&x, &y, &ModelSpec::BayesRidge(BayesConfig::default()), &plan, false)
            .unwrap();
        assert!(res.mean_r2 >= 0.99, "{}", res.mean_r2);
        assert_eq!(res.folds.len(), 5);
    }

    #[test]
    fn shuffled_target_scores_low() {
        let (x, mut y) = planted(42, 100, 8);
        y.shuffle(&mut ChaCha8Rng::seed_from_u64(5));
        let plan = FoldPlan::new(&ids(100), 5, 3, Grouping::None).unwrap();
        let res = cross_validate(&x, &y, &ModelSpec::BayesRidge(BayesConfig::default()), &plan, false)
            .unwrap();
        assert!(res.mean_r2 <= 0.1, "{}", res.mean_r2);
    }

    #[test]
    fn deterministic_bits() {
        let (x, y) = planted(43, 60, 5);
        let plan = FoldPlan::new(&ids(60), 5, 3, Grouping::None).unwrap();
        let spec = ModelSpec::Pcr { k: 4 };
        let a = cross_validate(&x, &y, &spec, &plan, true).unwrap();
        let b = cross_validate(&x, &y, &spec, &plan, true).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tiny_fold_rejected() {
        let (x, y) = planted(44, 6, 2);
        let plan = FoldPlan::new(&ids(6), 5, 0, Grouping::None).unwrap();
        assert!(matches!(
            cross_validate(&x, &y, &ModelSpec::Pcr { k: 1 }, &plan, false),
            Err(Error::Folds(_))
        ));
    }

    #[test]
    fn pcr_k_checked_before_fitting() {
        let (x, y) = planted(45, 20, 30);
        let plan = FoldPlan::new(&ids(20), 5, 0, Grouping::None).unwrap();
        assert!(matches!(
            cross_validate(&x, &y, &ModelSpec::Pcr { k: 16 }, &plan, false),
            Err(Error::ComponentRange { k: 16, max: 15 })
        ));
    }

    #[test]
    fn averaged_weights_close_to_truth() {
        let (x, y) = planted(46, 120, 4);
        let plan = FoldPlan::new(&ids(120), 5, 1, Grouping::None).unwrap();
        let w = fold_averaged_weights(&x, &y, &ModelSpec::BayesRidge(BayesConfig::default()), &plan, false)
            .unwrap();
        let full = ModelSpec::BayesRidge(BayesConfig::default()).fit(&x, &y).unwrap();
        for (a, b) in w.iter().zip(full.feature_weights()) {
            assert!((a - b).abs() < 1e-3);
        }
    }
}
