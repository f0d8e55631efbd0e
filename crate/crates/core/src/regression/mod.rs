//! Principal component regression and Bayesian ridge regression.

pub mod bayes;
pub mod dataset;
pub mod model;
pub mod pca;
pub mod pcr;

pub use bayes::{fit_bayes_ridge, posterior, BayesConfig, BayesRidgeModel, Prediction};
pub use dataset::{build_dataset, Dataset, DatasetMode, TraitTable, PERSONALITY_TRAITS, TRAIT_NAMES};
pub use model::{default_pcr_k, ModelKind, ModelSpec, Provenance, Regressor, TraitModel};
pub use pca::{fit_pca, PcaBasis};
pub use pcr::{fit_pcr, PcrModel};
