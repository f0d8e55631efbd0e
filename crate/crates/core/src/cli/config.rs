use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::evaluation::Grouping;
use crate::features::DEFAULT_SIGMA;
use crate::mocap::MotionKind;
use crate::regression::{default_pcr_k, BayesConfig, DatasetMode, ModelKind, ModelSpec, TRAIT_NAMES};
use crate::synth::SynthSpec;

pub const OUT_ENV: &str = "MOVETRAIT_OUT";
pub const DEFAULT_OUT: &str = "movetrait-out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FoldConfig {
    pub n: usize,
    pub seed: u64,
    pub grouping: Grouping,
}

impl Default for FoldConfig {
    fn default() -> Self {
        FoldConfig {
            n: 5,
            seed: 42,
            grouping: Grouping::ByParticipant,
        }
    }
}

/// Everything a pipeline run depends on. Unset paths default to the matching
/// subdirectory of `out`, so the subcommands chain without extra flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub takes_dir: Option<PathBuf>,
    pub skeleton: Option<PathBuf>,
    pub features_dir: Option<PathBuf>,
    pub traits_csv: Option<PathBuf>,
    pub models_dir: Option<PathBuf>,
    pub out: PathBuf,
    pub sigma: f64,
    pub kinds: Vec<MotionKind>,
    /// Gaussian normalization for `train` and `importance`.
    pub normalize: bool,
    pub model: ModelKind,
    /// Models compared by `evaluate`.
    pub eval_models: Vec<ModelKind>,
    /// PCR components; unset means the per-kind default.
    pub pcr_k: Option<usize>,
    pub bayes: BayesConfig,
    pub dataset_mode: DatasetMode,
    pub folds: FoldConfig,
    pub pooled_metrics: bool,
    pub fold_averaged_importance: bool,
    pub traits: Vec<String>,
    pub threads: Option<usize>,
    pub synth: SynthSpec,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            takes_dir: None,
            skeleton: None,
            features_dir: None,
            traits_csv: None,
            models_dir: None,
            out: std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from(DEFAULT_OUT), PathBuf::from),
            sigma: DEFAULT_SIGMA,
            kinds: vec![MotionKind::Position, MotionKind::Velocity],
            normalize: false,
            model: ModelKind::BayesRidge,
            eval_models: vec![ModelKind::Pcr, ModelKind::BayesRidge],
            pcr_k: None,
            bayes: BayesConfig::default(),
            dataset_mode: DatasetMode::PerStimulus,
            folds: FoldConfig::default(),
            pooled_metrics: false,
            fold_averaged_importance: false,
            traits: TRAIT_NAMES.iter().map(|s| s.to_string()).collect(),
            threads: None,
            synth: SynthSpec::default(),
        }
    }
}

impl PipelineConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    /// Hex SHA-256 of the serialized config.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Sigma(self.sigma));
        }
        if self.kinds.is_empty() {
            return Err(Error::Config("at least one input kind is required".into()));
        }
        if self.traits.is_empty() {
            return Err(Error::Config("at least one trait is required".into()));
        }
        if self.folds.n < 2 {
            return Err(Error::Config(format!("need at least 2 folds, got {}", self.folds.n)));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        Ok(())
    }

    pub fn takes_dir(&self) -> PathBuf {
        self.takes_dir.clone().unwrap_or_else(|| self.out.join("synth").join("takes"))
    }

    pub fn features_dir(&self) -> PathBuf {
        self.features_dir.clone().unwrap_or_else(|| self.out.join("features"))
    }

    pub fn traits_csv(&self) -> PathBuf {
        self.traits_csv.clone().unwrap_or_else(|| self.out.join("synth").join("traits.csv"))
    }

    pub fn models_dir(&self) -> PathBuf {
        self.models_dir.clone().unwrap_or_else(|| self.out.join("models"))
    }

    pub fn features_csv(&self, kind: MotionKind) -> PathBuf {
        self.features_dir().join(format!("{kind}.csv"))
    }

    pub fn model_path(&self, kind: MotionKind, trait_name: &str) -> PathBuf {
        self.models_dir().join(kind.as_str()).join(format!("{trait_name}.json"))
    }

    pub fn spec_for(&self, model: ModelKind, kind: MotionKind) -> ModelSpec {
        match model {
            ModelKind::Pcr => ModelSpec::Pcr {
                k: self.pcr_k.unwrap_or_else(|| default_pcr_k(kind)),
            },
            ModelKind::BayesRidge => ModelSpec::BayesRidge(self.bayes),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let mut c = PipelineConfig::default();
        c.pcr_k = Some(12);
        c.traits = vec!["EQ".into()];
        c.folds.grouping = Grouping::None;
        let back: PipelineConfig = serde_json::from_str(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn partial_json_uses_defaults() {
        let c: PipelineConfig = serde_json::from_str(r#"{"sigma": 3.0, "folds": {"n": 4}}"#).unwrap();
        assert_eq!(c.sigma, 3.0);
        assert_eq!(c.folds.n, 4);
        assert_eq!(c.folds.seed, 42);
        assert_eq!(c.traits.len(), 7);
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"sigmaa": 3.0}"#).is_err());
    }

    #[test]
    fn derived_paths() {
        let c = PipelineConfig {
            out: "o".into(),
            ..PipelineConfig::default()
        };
        assert_eq!(c.features_csv(MotionKind::Velocity), Path::new("o/features/velocity.csv"));
        assert_eq!(c.model_path(MotionKind::Position, "EQ"), Path::new("o/models/position/EQ.json"));
        assert_eq!(c.spec_for(ModelKind::Pcr, MotionKind::Velocity), ModelSpec::Pcr { k: 137 });
    }
}
