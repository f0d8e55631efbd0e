//! Desk-scale timings for kernel extraction and model fitting.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{correntropy_matrix, take_features, FeatureVector, DEFAULT_SIGMA};
use crate::mocap::{MotionKind, SkeletonMap};
use crate::regression::{fit_bayes_ridge, fit_pca, BayesConfig};
use crate::synth::{generate_take, participant_params, SynthSpec};

pub const MIN_REPETITIONS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub operation: String,
    pub shape: String,
    /// Median wall time over the repetitions.
    pub seconds: f64,
    pub repetitions: usize,
    pub machine: String,
    pub timed_out: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSizes {
    pub frames: Vec<usize>,
    /// Participants x stimuli for the ridge fits.
    pub ridge_rows: Vec<(usize, usize)>,
    pub pca_k: Vec<usize>,
    pub repetitions: usize,
    pub timeout_secs: f64,
}

impl BenchSizes {
    /// Desk scale: 35 s takes at 120 Hz and up to 58 participants x 16 stimuli.
    pub fn full() -> Self {
        BenchSizes {
            frames: vec![500, 2000, 4200],
            ridge_rows: vec![(58, 1), (58, 8), (58, 16)],
            pca_k: vec![137, 243],
            repetitions: MIN_REPETITIONS,
            timeout_secs: 120.0,
        }
    }

    pub fn quick() -> Self {
        BenchSizes {
            frames: vec![256, 1024, 4096],
            ridge_rows: vec![(10, 2), (20, 2)],
            pca_k: vec![5, 10],
            repetitions: MIN_REPETITIONS,
            timeout_secs: 120.0,
        }
    }
}

pub fn machine_descriptor() -> String {
    let cpus = std::thread::available_parallelism().map_or(1, |n| n.get());
    format!("{}-{} cpus={cpus}", std::env::consts::OS, std::env::consts::ARCH)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Runs `f` `reps` times (at least three) and reports the median. Stops early once a
/// single run exceeds `timeout`.
pub fn time_median<F: FnMut() -> Result<()>>(reps: usize, timeout: Duration, mut f: F) -> Result<(f64, usize, bool)> {
    let reps = reps.max(MIN_REPETITIONS);
    let mut runs = Vec::with_capacity(reps);
    for _ in 0..reps {
        let start = Instant::now();
        f()?;
        let took = start.elapsed();
        runs.push(took.as_secs_f64());
        if took > timeout {
            let n = runs.len();
            return Ok((median(runs), n, true));
        }
    }
    Ok((median(runs), reps, false))
}

fn feature_rows(participants: usize, stimuli: usize, frames: usize) -> Result<DMatrix<f64>> {
    let spec = SynthSpec {
        participants,
        stimuli,
        frames,
        ..SynthSpec::default()
    };
    let skeleton = SkeletonMap::default();
    let mut rows: Vec<FeatureVector> = Vec::new();
    for p in 0..participants {
        let params = participant_params(&spec, p);
        for s in 0..stimuli {
            rows.push(take_features(&generate_take(&spec, &params, p, s)?, &skeleton, MotionKind::Position, DEFAULT_SIGMA)?);
        }
    }
    let n = rows.len();
    let d = rows[0].values.len();
    Ok(DMatrix::from_fn(n, d, |r, c| rows[r].values[c]))
}

/// Runs the suite serially: kernel pass per frame count, ridge fit per row count and PCA
/// per component count (on the largest ridge design).
pub fn bench_suite(sizes: &BenchSizes) -> Result<Vec<BenchRecord>> {
    if sizes.repetitions < MIN_REPETITIONS {
        return Err(Error::Config(format!("bench needs at least {MIN_REPETITIONS} repetitions")));
    }
    let timeout = Duration::from_secs_f64(sizes.timeout_secs);
    let machine = machine_descriptor();
    let mut out = Vec::new();
    let mut record = |operation: &str, shape: String, (seconds, repetitions, timed_out): (f64, usize, bool)| {
        log::info!("event=bench op={operation} shape={shape} median_s={seconds:.6} reps={repetitions} timed_out={timed_out}");
        out.push(BenchRecord {
            operation: operation.into(),
            shape,
            seconds,
            repetitions,
            machine: machine.clone(),
            timed_out,
        });
    };

    let skeleton = SkeletonMap::default();
    for &frames in &sizes.frames {
        let spec = SynthSpec {
            participants: 1,
            stimuli: 1,
            frames,
            ..SynthSpec::default()
        };
        let take = skeleton.derive_joints(&generate_take(&spec, &participant_params(&spec, 0), 0, 0)?)?;
        let t = time_median(sizes.repetitions, timeout, || correntropy_matrix(&take, DEFAULT_SIGMA).map(|_| ()))?;
        record("correntropy_matrix", format!("{frames}x60"), t);
    }

    let mut largest: Option<DMatrix<f64>> = None;
    for &(participants, stimuli) in &sizes.ridge_rows {
        let x = feature_rows(participants, stimuli, 600)?;
        let y: Vec<f64> = (0..x.nrows()).map(|r| x.row(r).iter().take(50).sum::<f64>()).collect();
        let t = time_median(sizes.repetitions, timeout, || {
            fit_bayes_ridge(&x, &y, &BayesConfig::default()).map(|_| ())
        })?;
        record("fit_bayes_ridge", format!("{}x{}", x.nrows(), x.ncols()), t);
        if largest.as_ref().is_none_or(|l| l.nrows() < x.nrows()) {
            largest = Some(x);
        }
    }
    if let Some(x) = largest {
        for &k in &sizes.pca_k {
            let t = time_median(sizes.repetitions, timeout, || fit_pca(&x, k).map(|_| ()))?;
            record("fit_pca", format!("{}x{} k={k}", x.nrows(), x.ncols()), t);
        }
    }
    Ok(out)
}

pub fn to_csv(records: &[BenchRecord]) -> String {
    let mut s = String::from("operation,shape,median_seconds,repetitions,machine,timed_out\n");
    for r in records {
        let _ = writeln!(s, "{},{},{:.6},{},{},{}", r.operation, r.shape, r.seconds, r.repetitions, r.machine, r.timed_out);
    }
    s
}

pub fn to_markdown(records: &[BenchRecord]) -> String {
    let mut s = String::from("| operation | shape | median (s) | reps |\n|---|---|---:|---:|\n");
    for r in records {
        let flag = if r.timed_out { " (timed out)" } else { "" };
        let _ = writeln!(s, "| {} | {} | {:.4}{flag} | {} |", r.operation, r.shape, r.seconds, r.repetitions);
    }
    if let Some(r) = records.first() {
        let _ = writeln!(s, "\nMachine: `{}`", r.machine);
    }
    s
}
