//! Metrics, fold plans and cross-validated scoring.

pub mod cv;
pub mod folds;
pub mod metrics;
pub mod table;

pub use cv::{cross_validate, fold_averaged_weights, CvResult, FoldScore};
pub use folds::{FoldPlan, Grouping};
pub use metrics::{average_ranks, r2, rmse, spearman};
pub use table::{reference_score, InputVariant, ScoreEntry, ScoreTable};
