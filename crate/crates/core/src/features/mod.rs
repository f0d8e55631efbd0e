//! Correntropy covariance features.

pub mod correntropy;
pub mod io;
pub mod matrix;
pub mod vectorize;

pub use correntropy::{
    correntropy, correntropy_matrix, correntropy_matrix_of, CorrentropyMatrix, DEFAULT_SIGMA,
};
pub use matrix::{
    extract_features, gaussian_normalize, take_features, FeatureMatrix, FeatureSource, FeatureVector, NormStats,
    FEATURE_LEN,
};
pub use vectorize::{lower_cell, lower_index, lower_len, lower_walk, unvectorize, vectorize_lower};
