use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::PipelineConfig;
use super::manifest::{sha256_files, Manifest};
use crate::bench::{bench_suite, to_csv, to_markdown, BenchSizes};
use crate::error::{Error, Result};
use crate::evaluation::{
    cross_validate, fold_averaged_weights, r2, FoldPlan, InputVariant, ScoreEntry, ScoreTable,
};
use crate::features::io::{read_feature_matrix, write_feature_matrix};
use crate::features::{take_features, FeatureMatrix, FeatureVector};
use crate::importance::{write_importance_report, JointImportance, GROUP_NAMES};
use crate::mocap::{load_take_with_sidecar, MotionKind, SkeletonMap};
use crate::regression::{build_dataset, Provenance, TraitModel, TraitTable};
use crate::synth::write_dataset;

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: PathBuf, text: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

fn skeleton(cfg: &PipelineConfig) -> Result<SkeletonMap> {
    match &cfg.skeleton {
        Some(p) => SkeletonMap::from_json_file(p),
        None => Ok(SkeletonMap::default()),
    }
}

/// Take files (`*.tsv`) in a directory, sorted by name.
pub fn list_takes(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "tsv") {
            out.push(path);
        }
    }
    out.sort();
    if out.is_empty() {
        return Err(Error::Config(format!("no .tsv takes in {}", dir.display())));
    }
    Ok(out)
}

/// One feature matrix per configured kind, rows in take-file order.
pub fn extract(cfg: &PipelineConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let takes = list_takes(&cfg.takes_dir())?;
    let skeleton = skeleton(cfg)?;
    let rows: Vec<Vec<FeatureVector>> = takes
        .par_iter()
        .map(|path| {
            let take = load_take_with_sidecar(path)?;
            cfg.kinds
                .iter()
                .map(|&kind| take_features(&take, &skeleton, kind, cfg.sigma))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let dir = cfg.features_dir();
    create_dir(&dir)?;
    let mut manifest = Manifest::new("extract", cfg);
    for path in &takes {
        manifest.input(path)?;
        manifest.input(&crate::mocap::io::sidecar_path(path))?;
    }
    if let Some(p) = &cfg.skeleton {
        manifest.input(p)?;
    }
    let mut written = Vec::new();
    for (i, &kind) in cfg.kinds.iter().enumerate() {
        let vectors: Vec<FeatureVector> = rows.iter().map(|r| r[i].clone()).collect();
        let fm = FeatureMatrix::from_vectors(&vectors)?;
        let csv = cfg.features_csv(kind);
        write_feature_matrix(&csv, &fm)?;
        log::info!("event=extract kind={kind} rows={} cols={} file={}", fm.nrows(), fm.ncols(), csv.display());
        written.push(csv.clone());
        written.push(crate::features::io::meta_path(&csv));
    }
    manifest.outputs(&dir, &written)?;
    manifest.write(&dir, cfg)?;
    Ok(written)
}

fn load_inputs(cfg: &PipelineConfig, kind: MotionKind) -> Result<(FeatureMatrix, TraitTable, String)> {
    let csv = cfg.features_csv(kind);
    let fm = read_feature_matrix(&csv)?;
    let traits = TraitTable::read_csv(&cfg.traits_csv())?;
    let hash = sha256_files(&[csv, cfg.traits_csv()])?;
    Ok((fm, traits, hash))
}

/// Fits one model per (kind, trait) on all rows and writes it with provenance.
pub fn train(cfg: &PipelineConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let dir = cfg.models_dir();
    let mut manifest = Manifest::new("train", cfg);
    let mut written = Vec::new();
    for &kind in &cfg.kinds {
        let (fm, traits, dataset_hash) = load_inputs(cfg, kind)?;
        manifest.input(&cfg.features_csv(kind))?;
        manifest.input(&cfg.traits_csv())?;
        create_dir(&dir.join(kind.as_str()))?;
        let spec = cfg.spec_for(cfg.model, kind);
        let models: Vec<(TraitModel, f64)> = cfg
            .traits
            .par_iter()
            .map(|t| {
                let ds = build_dataset(&fm, &traits, t, cfg.dataset_mode)?;
                let mut model = TraitModel::fit(t, kind, &ds.x, &ds.y, &spec, cfg.normalize)?;
                model.provenance = Provenance {
                    config_hash: cfg.hash(),
                    dataset_hash: dataset_hash.clone(),
                };
                let fitted: Vec<f64> = model.predict_rows(&ds.x)?.iter().map(|p| p.mean).collect();
                let train_r2 = r2(&ds.y, &fitted).unwrap_or(f64::NAN);
                Ok((model, train_r2))
            })
            .collect::<Result<_>>()?;
        for (model, train_r2) in models {
            let path = cfg.model_path(kind, &model.trait_name);
            model.write(&path)?;
            log::info!(
                "event=train kind={kind} trait={} model={} normalize={} train_r2={train_r2:.6} file={}",
                model.trait_name,
                model.regressor.kind().label().replace(' ', "_"),
                cfg.normalize,
                path.display()
            );
            written.push(path);
        }
    }
    manifest.outputs(&dir, &written)?;
    manifest.write(&dir, cfg)?;
    Ok(written)
}

/// Cross-validated scores for every trait, input variant and model.
pub fn evaluate(cfg: &PipelineConfig) -> Result<(ScoreTable, Vec<PathBuf>)> {
    cfg.validate()?;
    let dir = cfg.out.join("evaluation");
    create_dir(&dir)?;
    let mut manifest = Manifest::new("evaluate", cfg);
    let mut table = ScoreTable::new(cfg.folds.n, cfg.folds.seed, cfg.folds.grouping, cfg.pooled_metrics);
    for &kind in &cfg.kinds {
        let (fm, traits, _) = load_inputs(cfg, kind)?;
        manifest.input(&cfg.features_csv(kind))?;
        manifest.input(&cfg.traits_csv())?;
        let mut audited = false;
        for t in &cfg.traits {
            let ds = build_dataset(&fm, &traits, t, cfg.dataset_mode)?;
            let plan = FoldPlan::new(&ds.groups, cfg.folds.n, cfg.folds.seed, cfg.folds.grouping)?;
            if !audited {
                let shared = plan.shared_groups(&ds.groups);
                log::info!("event=leakage_audit kind={kind} shared_participants={shared}");
                println!("leakage audit ({kind}): {shared} shared participants");
                audited = true;
            }
            for normalized in [false, true] {
                let input = InputVariant { kind, normalized };
                for &model in &cfg.eval_models {
                    let spec = cfg.spec_for(model, kind);
                    let cv = cross_validate(&ds.x, &ds.y, &spec, &plan, normalized)?;
                    log::info!(
                        "event=evaluate trait={t} input={} model={} mean_rmse={:.6} mean_r2={:.6} pooled_rmse={:.6} pooled_r2={:.6}",
                        input.label().replace(' ', ""),
                        model.label().replace(' ', "_"),
                        cv.mean_rmse,
                        cv.mean_r2,
                        cv.pooled_rmse,
                        cv.pooled_r2
                    );
                    table.push(ScoreEntry::from_cv(t, input, model, &cv));
                }
            }
        }
    }
    // trait-major, then input variant, then model
    table.entries.sort_by(|a, b| {
        let ti = |n: &str| cfg.traits.iter().position(|t| t == n);
        (ti(&a.trait_name), a.input, a.model).cmp(&(ti(&b.trait_name), b.input, b.model))
    });
    let mut written = Vec::new();
    write_file(dir.join("scores.csv"), &table.to_csv(), &mut written)?;
    let text = table.to_text();
    write_file(dir.join("scores.txt"), &text, &mut written)?;
    write_file(dir.join("scores.json"), &table.to_json(), &mut written)?;
    print!("{text}");
    manifest.outputs(&dir, &written)?;
    manifest.write(&dir, cfg)?;
    Ok((table, written))
}

/// Joint-importance CSVs and radar charts per input kind, from saved models or from
/// fold-averaged weights.
pub fn importance(cfg: &PipelineConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let root = cfg.out.join("importance");
    let mut manifest = Manifest::new("importance", cfg);
    let mut written = Vec::new();
    for &kind in &cfg.kinds {
        let profiles: Vec<JointImportance> = if cfg.fold_averaged_importance {
            let (fm, traits, _) = load_inputs(cfg, kind)?;
            manifest.input(&cfg.features_csv(kind))?;
            manifest.input(&cfg.traits_csv())?;
            let spec = cfg.spec_for(cfg.model, kind);
            cfg.traits
                .iter()
                .map(|t| {
                    let ds = build_dataset(&fm, &traits, t, cfg.dataset_mode)?;
                    let plan = FoldPlan::new(&ds.groups, cfg.folds.n, cfg.folds.seed, cfg.folds.grouping)?;
                    let w = fold_averaged_weights(&ds.x, &ds.y, &spec, &plan, cfg.normalize)?;
                    JointImportance::from_weights(t, &w)
                })
                .collect::<Result<_>>()?
        } else {
            let mut models = Vec::new();
            for t in &cfg.traits {
                let path = cfg.model_path(kind, t);
                manifest.input(&path)?;
                models.push(TraitModel::read(&path)?);
            }
            crate::importance::profiles_from_models(&models)?
        };
        for p in &profiles {
            let top = (0..GROUP_NAMES.len())
                .max_by(|&a, &b| p.reduced[a].total_cmp(&p.reduced[b]))
                .map_or("", |g| GROUP_NAMES[g]);
            log::info!("event=importance kind={kind} trait={} top_group={top}", p.trait_name);
        }
        written.extend(write_importance_report(&profiles, &root.join(kind.as_str()))?);
    }
    manifest.outputs(&root, &written)?;
    manifest.write(&root, cfg)?;
    Ok(written)
}

pub fn synth(cfg: &PipelineConfig) -> Result<Vec<PathBuf>> {
    let dir = cfg.out.join("synth");
    let written = write_dataset(&cfg.synth, &dir)?;
    log::info!(
        "event=synth participants={} stimuli={} frames={} files={} dir={}",
        cfg.synth.participants,
        cfg.synth.stimuli,
        cfg.synth.frames,
        written.len(),
        dir.display()
    );
    let mut manifest = Manifest::new("synth", cfg);
    manifest.outputs(&dir, &written)?;
    manifest.write(&dir, cfg)?;
    Ok(written)
}

/// Markdown summary of whatever evaluation and importance outputs exist under `out`.
pub fn report(cfg: &PipelineConfig) -> Result<Vec<PathBuf>> {
    let dir = cfg.out.join("report");
    create_dir(&dir)?;
    let mut manifest = Manifest::new("report", cfg);
    let mut md = String::from("# movetrait report\n\n");
    let scores = cfg.out.join("evaluation").join("scores.txt");
    if scores.exists() {
        manifest.input(&scores)?;
        let text = std::fs::read_to_string(&scores).map_err(|e| Error::io(&scores, e))?;
        let _ = write!(md, "## Cross-validated scores\n\nPublished values in parentheses, for comparison only.\n\n```text\n{text}```\n\n");
    }
    for kind in &cfg.kinds {
        let json = cfg.out.join("importance").join(kind.as_str()).join("importance.json");
        if !json.exists() {
            continue;
        }
        manifest.input(&json)?;
        let text = std::fs::read_to_string(&json).map_err(|e| Error::io(&json, e))?;
        let profiles: Vec<JointImportance> = serde_json::from_str(&text).map_err(|e| Error::json(&json, e))?;
        let _ = writeln!(md, "## Joint importance ({kind})\n");
        let _ = writeln!(md, "| trait | {} |", GROUP_NAMES.join(" | "));
        let _ = writeln!(md, "|---|{}", "---:|".repeat(GROUP_NAMES.len()));
        for p in &profiles {
            let cells: Vec<String> = p.reduced.iter().map(|v| format!("{v:.3}")).collect();
            let _ = writeln!(md, "| {} | {} |", p.trait_name, cells.join(" | "));
        }
        md.push('\n');
        for svg in ["radar_eq_sq.svg", "radar_personality.svg", "radar_all.svg"] {
            if json.with_file_name(svg).exists() {
                let _ = writeln!(md, "![{svg}](../importance/{}/{svg})", kind.as_str());
            }
        }
        md.push('\n');
    }
    let mut written = Vec::new();
    write_file(dir.join("report.md"), &md, &mut written)?;
    manifest.outputs(&dir, &written)?;
    manifest.write(&dir, cfg)?;
    Ok(written)
}

pub fn bench(cfg: &PipelineConfig, sizes: &BenchSizes) -> Result<Vec<PathBuf>> {
    let dir = cfg.out.join("bench");
    create_dir(&dir)?;
    let records = bench_suite(sizes)?;
    let kernel: Vec<f64> = records
        .iter()
        .filter(|r| r.operation == "correntropy_matrix")
        .map(|r| r.seconds)
        .collect();
    if kernel.windows(2).any(|w| w[1] < w[0]) {
        log::warn!("event=bench_non_monotone op=correntropy_matrix medians={kernel:?}");
    }
    if let Some(r) = records.iter().find(|r| r.timed_out) {
        log::warn!("event=bench_timeout op={} shape={}", r.operation, r.shape);
    }
    let mut written = Vec::new();
    write_file(dir.join("bench.csv"), &to_csv(&records), &mut written)?;
    write_file(dir.join("bench.md"), &to_markdown(&records), &mut written)?;
    let mut manifest = Manifest::new("bench", cfg);
    manifest.outputs(&dir, &written)?;
    manifest.write(&dir, cfg)?;
    Ok(written)
}
