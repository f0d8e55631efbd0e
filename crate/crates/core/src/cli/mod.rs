//! Command-line front end: one JSON config, flag overrides, one subcommand per stage.

pub mod commands;
pub mod config;
pub mod manifest;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

pub use config::{FoldConfig, PipelineConfig, DEFAULT_OUT, OUT_ENV};
pub use manifest::{sha256_file, Manifest};

use crate::bench::BenchSizes;
use crate::error::{Error, Result};
use crate::evaluation::Grouping;
use crate::mocap::MotionKind;
use crate::regression::{DatasetMode, ModelKind};
use crate::synth::SynthSpec;

fn parse_name<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "movetrait", version, about = "Movement features to psychological trait models")]
pub struct Cli {
    /// Pipeline config (JSON); flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output root (default: $MOVETRAIT_OUT, else ./movetrait-out).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct Overrides {
    #[arg(long, global = true)]
    pub takes: Option<PathBuf>,
    #[arg(long, global = true)]
    pub skeleton: Option<PathBuf>,
    #[arg(long, global = true)]
    pub features: Option<PathBuf>,
    #[arg(long = "traits-csv", global = true)]
    pub traits_csv: Option<PathBuf>,
    #[arg(long, global = true)]
    pub models: Option<PathBuf>,
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    /// position and/or velocity, comma separated.
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_name::<MotionKind>)]
    pub kinds: Option<Vec<MotionKind>>,
    #[arg(long, global = true)]
    pub normalize: bool,
    /// pcr or bayes_ridge.
    #[arg(long, global = true, value_parser = parse_name::<ModelKind>)]
    pub model: Option<ModelKind>,
    #[arg(long = "eval-models", global = true, value_delimiter = ',', value_parser = parse_name::<ModelKind>)]
    pub eval_models: Option<Vec<ModelKind>>,
    #[arg(long = "pcr-k", global = true)]
    pub pcr_k: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter", global = true)]
    pub max_iter: Option<usize>,
    /// per_stimulus or participant_mean.
    #[arg(long = "dataset-mode", global = true, value_parser = parse_name::<DatasetMode>)]
    pub dataset_mode: Option<DatasetMode>,
    #[arg(long, global = true)]
    pub folds: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// none or by_participant.
    #[arg(long, global = true, value_parser = parse_name::<Grouping>)]
    pub grouping: Option<Grouping>,
    /// Report metrics over pooled out-of-fold predictions instead of the fold mean.
    #[arg(long, global = true)]
    pub pooled: bool,
    /// Importance from weights averaged over CV folds instead of the full-data fit.
    #[arg(long = "fold-averaged", global = true)]
    pub fold_averaged: bool,
    /// Trait names, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub traits: Option<Vec<String>>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Correntropy feature matrices from marker takes.
    Extract,
    /// One model per trait and input kind.
    Train,
    /// Cross-validated score tables.
    Evaluate,
    /// Joint-importance CSVs and radar charts.
    Importance,
    /// Synthetic takes and trait table.
    Synth(SynthArgs),
    /// Markdown summary of existing outputs.
    Report,
    /// Timing harness.
    Bench(BenchArgs),
}

#[derive(Debug, Default, Args)]
pub struct SynthArgs {
    /// Synthetic spec (JSON); replaces the config's `synth` section.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub participants: Option<usize>,
    #[arg(long)]
    pub stimuli: Option<usize>,
    #[arg(long)]
    pub frames: Option<usize>,
    #[arg(long = "synth-seed")]
    pub synth_seed: Option<u64>,
}

#[derive(Debug, Default, Args)]
pub struct BenchArgs {
    /// Small sizes for a fast smoke run.
    #[arg(long)]
    pub quick: bool,
    /// Per-run ceiling in seconds.
    #[arg(long)]
    pub timeout: Option<f64>,
}

/// Defaults, then the config file, then flags.
pub fn resolve_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut c = match &cli.config {
        Some(p) => PipelineConfig::read(p)?,
        None => PipelineConfig::default(),
    };
    let o = &cli.overrides;
    if let Some(v) = &cli.out {
        c.out = v.clone();
    }
    if cli.threads.is_some() {
        c.threads = cli.threads;
    }
    macro_rules! set {
        ($field:ident, $value:expr) => {
            if let Some(v) = $value.clone() {
                c.$field = v;
            }
        };
    }
    macro_rules! set_opt {
        ($field:ident, $value:expr) => {
            if $value.is_some() {
                c.$field = $value.clone();
            }
        };
    }
    set_opt!(takes_dir, o.takes);
    set_opt!(skeleton, o.skeleton);
    set_opt!(features_dir, o.features);
    set_opt!(traits_csv, o.traits_csv);
    set_opt!(models_dir, o.models);
    set_opt!(pcr_k, o.pcr_k);
    set!(sigma, o.sigma);
    set!(kinds, o.kinds);
    set!(model, o.model);
    set!(eval_models, o.eval_models);
    set!(dataset_mode, o.dataset_mode);
    set!(traits, o.traits);
    if let Some(v) = o.tol {
        c.bayes.tol = v;
    }
    if let Some(v) = o.max_iter {
        c.bayes.max_iter = v;
    }
    if let Some(v) = o.folds {
        c.folds.n = v;
    }
    if let Some(v) = o.seed {
        c.folds.seed = v;
    }
    if let Some(v) = o.grouping {
        c.folds.grouping = v;
    }
    c.normalize |= o.normalize;
    c.pooled_metrics |= o.pooled;
    c.fold_averaged_importance |= o.fold_averaged;
    if let Command::Synth(s) = &cli.command {
        if let Some(p) = &s.spec {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            c.synth = serde_json::from_str::<SynthSpec>(&text).map_err(|e| Error::json(p, e))?;
        }
        if let Some(v) = s.participants {
            c.synth.participants = v;
        }
        if let Some(v) = s.stimuli {
            c.synth.stimuli = v;
        }
        if let Some(v) = s.frames {
            c.synth.frames = v;
        }
        if let Some(v) = s.synth_seed {
            c.synth.seed = v;
        }
    }
    c.validate()?;
    Ok(c)
}

/// Runs one subcommand inside a worker pool sized by the config.
pub fn run(command: &Command, cfg: &PipelineConfig) -> Result<Vec<PathBuf>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| match command {
        Command::Extract => commands::extract(cfg),
        Command::Train => commands::train(cfg),
        Command::Evaluate => commands::evaluate(cfg).map(|(_, w)| w),
        Command::Importance => commands::importance(cfg),
        Command::Synth(_) => commands::synth(cfg),
        Command::Report => commands::report(cfg),
        Command::Bench(b) => {
            let mut sizes = if b.quick { BenchSizes::quick() } else { BenchSizes::full() };
            if let Some(t) = b.timeout {
                sizes.timeout_secs = t;
            }
            commands::bench(cfg, &sizes)
        }
    })
}

fn init_logging() {
    let env = env_logger::Env::default().default_filter_or("info");
    let _ = env_logger::Builder::from_env(env)
        .format(|buf, rec| writeln!(buf, "level={} {}", rec.level().as_str().to_lowercase(), rec.args()))
        .try_init();
}

/// Entry point for the binary. Exit code 0 iff the command succeeded.
pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    init_logging();
    let result = resolve_config(&cli).and_then(|cfg| run(&cli.command, &cfg));
    match result {
        Ok(written) => {
            log::info!("event=done files={}", written.len());
            ExitCode::SUCCESS
        }
        Err(e) => {
            log::error!("event=failed error=\"{e}\"");
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("movetrait").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("c.json");
        std::fs::write(&cfg_path, r#"{"sigma": 5.0, "pcr_k": 3, "folds": {"n": 4, "seed": 1}}"#).unwrap();
        let cli = parse(&[
            "--config",
            cfg_path.to_str().unwrap(),
            "evaluate",
            "--seed",
            "9",
            "--kinds",
            "velocity",
            "--grouping",
            "none",
            "--eval-models",
            "pcr,bayes_ridge",
        ]);
        let c = resolve_config(&cli).unwrap();
        assert_eq!(c.sigma, 5.0);
        assert_eq!(c.pcr_k, Some(3));
        assert_eq!((c.folds.n, c.folds.seed, c.folds.grouping), (4, 9, Grouping::None));
        assert_eq!(c.kinds, vec![MotionKind::Velocity]);
        assert_eq!(c.eval_models.len(), 2);
    }

    #[test]
    fn synth_flags() {
        let cli = parse(&["synth", "--participants", "3", "--frames", "50", "--out", "x"]);
        let c = resolve_config(&cli).unwrap();
        assert_eq!((c.synth.participants, c.synth.frames), (3, 50));
        assert_eq!(c.out, PathBuf::from("x"));
    }

    #[test]
    fn bad_values_rejected() {
        assert!(Cli::try_parse_from(["movetrait", "train", "--model", "lasso"]).is_err());
        assert!(Cli::try_parse_from(["movetrait", "frobnicate"]).is_err());
        let cli = parse(&["train", "--folds", "1"]);
        assert!(resolve_config(&cli).is_err());
    }
}
