use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::bayes::{fit_bayes_ridge, BayesConfig, BayesRidgeModel, PosteriorCovariance, Prediction};
use super::pca::PcaBasis;
use super::pcr::{fit_pcr, PcrModel};
use crate::error::{Error, Result};
use crate::features::NormStats;
use crate::mocap::MotionKind;

/// Default PCR component counts per input kind.
pub const PCR_K_POSITION: usize = 243;
pub const PCR_K_VELOCITY: usize = 137;

pub fn default_pcr_k(kind: MotionKind) -> usize {
    match kind {
        MotionKind::Position => PCR_K_POSITION,
        MotionKind::Velocity => PCR_K_VELOCITY,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Pcr,
    BayesRidge,
}

impl ModelKind {
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Pcr => "PCR",
            ModelKind::BayesRidge => "Bayesian Ridge",
        }
    }
}

/// What to fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    Pcr { k: usize },
    BayesRidge(BayesConfig),
}

impl ModelSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Pcr { .. } => ModelKind::Pcr,
            ModelSpec::BayesRidge(_) => ModelKind::BayesRidge,
        }
    }

    /// Checks hyperparameters against the training size before any fitting work.
    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        match *self {
            ModelSpec::Pcr { k } => {
                let max = rows.saturating_sub(1).min(cols);
                if k == 0 || k > max {
                    return Err(Error::ComponentRange { k, max });
                }
            }
            ModelSpec::BayesRidge(cfg) => {
                if !(cfg.tol >= 0.0) || cfg.max_iter == 0 {
                    return Err(Error::Config(format!(
                        "bayes ridge needs tol >= 0 and max_iter >= 1 (tol={}, max_iter={})",
                        cfg.tol, cfg.max_iter
                    )));
                }
                if rows < 2 {
                    return Err(Error::TooFewRows {
                        required: 2,
                        found: rows,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn fit(&self, x: &DMatrix<f64>, y: &[f64]) -> Result<Regressor> {
        self.validate(x.nrows(), x.ncols())?;
        match self {
            ModelSpec::Pcr { k } => fit_pcr(x, y, *k).map(Regressor::Pcr),
            ModelSpec::BayesRidge(cfg) => fit_bayes_ridge(x, y, cfg).map(Regressor::BayesRidge),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Regressor {
    Pcr(PcrModel),
    BayesRidge(BayesRidgeModel),
}

impl Regressor {
    pub fn kind(&self) -> ModelKind {
        match self {
            Regressor::Pcr(_) => ModelKind::Pcr,
            Regressor::BayesRidge(_) => ModelKind::BayesRidge,
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Regressor::Pcr(m) => m.input_dim(),
            Regressor::BayesRidge(m) => m.input_dim(),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        match self {
            Regressor::Pcr(m) => Ok(Prediction {
                mean: m.predict(x)?,
                std: 0.0,
            }),
            Regressor::BayesRidge(m) => m.predict(x),
        }
    }

    /// One weight per input feature: the posterior mean for Bayesian ridge, the PCR
    /// weights back-projected through the principal basis.
    pub fn feature_weights(&self) -> Vec<f64> {
        match self {
            Regressor::Pcr(m) => m.feature_weights(),
            Regressor::BayesRidge(m) => m.weights.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub dataset_hash: String,
}

/// A regressor for one trait together with the normalization it was trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct TraitModel {
    pub trait_name: String,
    pub input_kind: MotionKind,
    pub normalization: Option<NormStats>,
    pub regressor: Regressor,
    pub provenance: Provenance,
}

impl TraitModel {
    /// Fits on raw feature rows; with `normalize` the Gaussian statistics are computed on
    /// these rows and stored with the model.
    pub fn fit(
        trait_name: &str,
        input_kind: MotionKind,
        x: &DMatrix<f64>,
        y: &[f64],
        spec: &ModelSpec,
        normalize: bool,
    ) -> Result<Self> {
        spec.validate(x.nrows(), x.ncols())?;
        let (design, normalization) = if normalize {
            let stats = NormStats::fit(x)?;
            (stats.apply(x)?, Some(stats))
        } else {
            (x.clone(), None)
        };
        Ok(TraitModel {
            trait_name: trait_name.to_string(),
            input_kind,
            normalization,
            regressor: spec.fit(&design, y)?,
            provenance: Provenance::default(),
        })
    }

    pub fn input_dim(&self) -> usize {
        self.regressor.input_dim()
    }

    pub fn predict(&self, row: &[f64]) -> Result<Prediction> {
        match &self.normalization {
            Some(stats) => self.regressor.predict(&stats.apply_row(row)?),
            None => self.regressor.predict(row),
        }
    }

    pub fn predict_rows(&self, x: &DMatrix<f64>) -> Result<Vec<Prediction>> {
        x.row_iter()
            .map(|r| {
                let row: Vec<f64> = r.iter().copied().collect();
                self.predict(&row)
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&ModelFile::from(self))
            .map(|s| s + "\n")
            .map_err(|e| Error::json("<model>", e))
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::json(origin, e))?;
        file.into_model()
            .map_err(|msg| Error::Config(format!("{}: {msg}", origin.display())))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }
}

/// Dense matrix stored row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RowMajor {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl From<&DMatrix<f64>> for RowMajor {
    fn from(m: &DMatrix<f64>) -> Self {
        RowMajor {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.transpose().iter().copied().collect(),
        }
    }
}

impl RowMajor {
    fn into_matrix(self) -> std::result::Result<DMatrix<f64>, String> {
        if self.data.len() != self.rows * self.cols {
            return Err(format!(
                "matrix data has {} entries, expected {}x{}",
                self.data.len(),
                self.rows,
                self.cols
            ));
        }
        Ok(DMatrix::from_row_slice(self.rows, self.cols, &self.data))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BasisRecord {
    mean: Vec<f64>,
    components: RowMajor,
    explained_variance: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PosteriorRecord {
    directions: RowMajor,
    variances: Vec<f64>,
    lambda: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model_kind", rename_all = "snake_case")]
enum ModelBody {
    Pcr {
        k: usize,
        intercept: f64,
        weights: Vec<f64>,
        basis: BasisRecord,
    },
    BayesRidge {
        alpha: f64,
        lambda: f64,
        converged: bool,
        iterations: usize,
        intercept: f64,
        weights: Vec<f64>,
        x_mean: Vec<f64>,
        posterior_covariance: PosteriorRecord,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelFile {
    #[serde(rename = "trait")]
    trait_name: String,
    input_kind: MotionKind,
    #[serde(flatten)]
    body: ModelBody,
    normalization: Option<NormStats>,
    provenance: Provenance,
}

impl From<&TraitModel> for ModelFile {
    fn from(m: &TraitModel) -> Self {
        let body = match &m.regressor {
            Regressor::Pcr(p) => ModelBody::Pcr {
                k: p.basis.k(),
                intercept: p.intercept,
                weights: p.weights.clone(),
                basis: BasisRecord {
                    mean: p.basis.mean.clone(),
                    components: RowMajor::from(&p.basis.components),
                    explained_variance: p.basis.explained_variance.clone(),
                },
            },
            Regressor::BayesRidge(b) => ModelBody::BayesRidge {
                alpha: b.alpha,
                lambda: b.lambda,
                converged: b.converged,
                iterations: b.iterations,
                intercept: b.intercept,
                weights: b.weights.clone(),
                x_mean: b.x_mean.clone(),
                posterior_covariance: PosteriorRecord {
                    directions: RowMajor::from(&b.posterior_covariance.directions),
                    variances: b.posterior_covariance.variances.clone(),
                    lambda: b.posterior_covariance.lambda,
                },
            },
        };
        ModelFile {
            trait_name: m.trait_name.clone(),
            input_kind: m.input_kind,
            body,
            normalization: m.normalization.clone(),
            provenance: m.provenance.clone(),
        }
    }
}

impl ModelFile {
    fn into_model(self) -> std::result::Result<TraitModel, String> {
        let regressor = match self.body {
            ModelBody::Pcr {
                k,
                intercept,
                weights,
                basis,
            } => {
                let components = basis.components.into_matrix()?;
                if components.nrows() != k || weights.len() != k || basis.mean.len() != components.ncols() {
                    return Err("inconsistent PCR dimensions".into());
                }
                Regressor::Pcr(PcrModel {
                    basis: PcaBasis {
                        mean: basis.mean,
                        components,
                        explained_variance: basis.explained_variance,
                    },
                    weights,
                    intercept,
                })
            }
            ModelBody::BayesRidge {
                alpha,
                lambda,
                converged,
                iterations,
                intercept,
                weights,
                x_mean,
                posterior_covariance,
            } => {
                let directions = posterior_covariance.directions.into_matrix()?;
                if directions.ncols() != weights.len()
                    || x_mean.len() != weights.len()
                    || directions.nrows() != posterior_covariance.variances.len()
                {
                    return Err("inconsistent Bayesian ridge dimensions".into());
                }
                Regressor::BayesRidge(BayesRidgeModel {
                    weights,
                    posterior_covariance: PosteriorCovariance {
                        directions,
                        variances: posterior_covariance.variances,
                        lambda: posterior_covariance.lambda,
                    },
                    alpha,
                    lambda,
                    intercept,
                    x_mean,
                    converged,
                    iterations,
                })
            }
        };
        if let Some(stats) = &self.normalization {
            if stats.dim() != regressor.input_dim() || stats.sigma.len() != stats.dim() {
                return Err("normalization statistics do not match model input".into());
            }
        }
        Ok(TraitModel {
            trait_name: self.trait_name,
            input_kind: self.input_kind,
            normalization: self.normalization,
            regressor,
            provenance: self.provenance,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn data() -> (DMatrix<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let x = DMatrix::from_fn(20, 6, |_, _| rng.random_range(-1.0..1.0));
        let y = (0..20).map(|r| x[(r, 0)] * 2.0 - x[(r, 3)] + 0.1 * r as f64).collect();
        (x, y)
    }

    #[test]
    fn json_round_trip_both_kinds() {
        let (x, y) = data();
        for (spec, norm) in [
            (ModelSpec::Pcr { k: 4 }, true),
            (ModelSpec::BayesRidge(BayesConfig::default()), false),
            (ModelSpec::BayesRidge(BayesConfig::default()), true),
        ] {
            let mut m = TraitModel::fit("EQ", MotionKind::Position, &x, &y, &spec, norm).unwrap();
            m.provenance = Provenance {
                config_hash: "abc".into(),
                dataset_hash: "def".into(),
            };
            let text = m.to_json().unwrap();
            let back = TraitModel::from_json(&text, Path::new("m.json")).unwrap();
            assert_eq!(back, m);
            assert_eq!(back.to_json().unwrap(), text);
        }
    }

    #[test]
    fn components_stored_row_major() {
        let (x, y) = data();
        let m = TraitModel::fit("O", MotionKind::Velocity, &x, &y, &ModelSpec::Pcr { k: 2 }, false)
            .unwrap();
        let v: serde_json::Value = serde_json::from_str(&m.to_json().unwrap()).unwrap();
        assert_eq!(v["model_kind"], "pcr");
        let Regressor::Pcr(p) = &m.regressor else { unreachable!() };
        let stored = &v["basis"]["components"]["data"];
        assert_eq!(stored[1].as_f64().unwrap(), p.basis.components[(0, 1)]);
        assert_eq!(stored[6].as_f64().unwrap(), p.basis.components[(1, 0)]);
    }

    #[test]
    fn validate_before_fit() {
        let (x, y) = data();
        assert!(matches!(
            ModelSpec::Pcr { k: 20 }.fit(&x, &y),
            Err(Error::ComponentRange { k: 20, max: 6 })
        ));
        assert!(ModelSpec::BayesRidge(BayesConfig { tol: 1e-3, max_iter: 0 })
            .validate(10, 3)
            .is_err());
    }

    #[test]
    fn normalized_model_applies_stats() {
        let (x, y) = data();
        let m = TraitModel::fit("C", MotionKind::Position, &x, &y, &ModelSpec::Pcr { k: 5 }, true)
            .unwrap();
        let row: Vec<f64> = x.row(2).iter().copied().collect();
        let stats = m.normalization.as_ref().unwrap();
        let direct = m.regressor.predict(&stats.apply_row(&row).unwrap()).unwrap();
        assert_eq!(m.predict(&row).unwrap(), direct);
    }
}
