//! Synthetic takes with planted trait-to-movement couplings.
//!
//! Every marker oscillates around a static standing template. Marker `m` of participant
//! `p` moves as
//!
//! ```text
//! template_m + offset_pm + e_z * bounce(t) + A_pm * energy_ps * dir_m * sin(2 pi f_s t + phi_pm + psi_s) + noise
//! ```
//!
//! where `A_pm` and `phi_pm` are affine in the participant's traits (each trait rescaled
//! to `[0, 1]` over its range). For two coordinate series driven at the same frequency the
//! mean squared difference over whole cycles is
//! `(a_i - a_j)^2 + (A_i^2 + A_j^2 - 2 A_i A_j cos(phi_i - phi_j)) / 2`, a smooth function of
//! the amplitudes and phases, so the correntropy features carry the planted signal.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{take_features, FeatureMatrix, FeatureVector};
use crate::mocap::io::{sidecar_path, TakeMeta};
use crate::mocap::{write_take, MarkerTake, MotionKind, SkeletonMap, MARKER_COUNT};
use crate::regression::{TraitTable, TRAIT_NAMES};

/// Static standing pose, millimetres (x forward, y left, z up), in marker file order.
pub const TEMPLATE: [[f64; 3]; MARKER_COUNT] = [
    [80.0, 60.0, 1700.0],
    [80.0, -60.0, 1700.0],
    [-90.0, 0.0, 1690.0],
    [0.0, 180.0, 1450.0],
    [0.0, -180.0, 1450.0],
    [80.0, 0.0, 1350.0],
    [90.0, 0.0, 1100.0],
    [-80.0, 110.0, 1000.0],
    [-80.0, -110.0, 1000.0],
    [0.0, 220.0, 1150.0],
    [0.0, -220.0, 1150.0],
    [30.0, 230.0, 880.0],
    [30.0, -230.0, 880.0],
    [40.0, 235.0, 780.0],
    [40.0, -235.0, 780.0],
    [40.0, 100.0, 520.0],
    [40.0, -100.0, 520.0],
    [0.0, 100.0, 90.0],
    [0.0, -100.0, 90.0],
    [150.0, 100.0, 20.0],
    [150.0, -100.0, 20.0],
];

/// Value range of a trait: personality scores 1..5, EQ and SQ 0..80.
pub fn trait_range(name: &str) -> (f64, f64) {
    match name {
        "EQ" | "SQ" => (0.0, 80.0),
        _ => (1.0, 5.0),
    }
}

/// How one trait drives a set of markers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraitCoupling {
    pub trait_name: String,
    pub markers: Vec<usize>,
    /// Added oscillation amplitude per unit of rescaled trait, millimetres.
    pub amplitude_gain_mm: f64,
    /// Added phase per unit of rescaled trait, radians.
    pub phase_gain_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub participants: usize,
    pub stimuli: usize,
    pub frames: usize,
    pub frame_rate: f64,
    /// Movement frequency of the first stimulus; stimulus `s` moves at `tempo_hz * (1 + 0.1 s)`.
    pub tempo_hz: f64,
    pub base_amplitude_mm: f64,
    pub bounce_mm: f64,
    pub coupling: Vec<TraitCoupling>,
    pub noise_std: f64,
    /// Standard deviation of each participant's static marker offsets.
    pub body_jitter_mm: f64,
    /// Relative standard deviation of a per-take amplitude multiplier.
    pub energy_jitter: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        let c = |t: &str, markers: &[usize]| TraitCoupling {
            trait_name: t.into(),
            markers: markers.to_vec(),
            amplitude_gain_mm: 80.0,
            phase_gain_rad: 1.0,
        };
        SynthSpec {
            participants: 60,
            stimuli: 4,
            frames: 4200,
            frame_rate: 120.0,
            tempo_hz: 1.0,
            base_amplitude_mm: 40.0,
            bounce_mm: 15.0,
            coupling: vec![
                c("O", &[0, 1, 2]),
                c("C", &[9, 11, 13]),
                c("E", &[10, 12, 14]),
                c("A", &[15, 17, 19]),
                c("N", &[16, 18, 20]),
                c("EQ", &[3, 4, 5]),
                c("SQ", &[6, 7, 8]),
            ],
            noise_std: 5.0,
            body_jitter_mm: 0.0,
            energy_jitter: 0.05,
            seed: 7,
        }
    }
}

impl SynthSpec {
    pub fn tempo_of(&self, stimulus: usize) -> f64 {
        self.tempo_hz * (1.0 + 0.1 * stimulus as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.participants == 0 || self.stimuli == 0 {
            return bad("participants and stimuli must be positive".into());
        }
        if self.frames < 2 {
            return bad(format!("frames must be at least 2, got {}", self.frames));
        }
        if !(self.frame_rate > 0.0 && self.frame_rate.is_finite()) {
            return Err(Error::FrameRate(self.frame_rate));
        }
        let top = self.tempo_of(self.stimuli - 1);
        if !(self.tempo_hz > 0.0) || top >= self.frame_rate / 2.0 {
            return bad(format!(
                "movement frequencies must lie in (0, {}) Hz, got up to {top}",
                self.frame_rate / 2.0
            ));
        }
        for v in [self.noise_std, self.body_jitter_mm, self.energy_jitter, self.base_amplitude_mm, self.bounce_mm] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad("amplitudes, noise and jitter must be finite and non-negative".into());
            }
        }
        for c in &self.coupling {
            if !TRAIT_NAMES.contains(&c.trait_name.as_str()) {
                return bad(format!("unknown trait `{}` in coupling", c.trait_name));
            }
            if c.markers.iter().any(|&m| m >= MARKER_COUNT) {
                return bad(format!("coupling for `{}` names a marker >= {MARKER_COUNT}", c.trait_name));
            }
            if !(c.amplitude_gain_mm.is_finite() && c.phase_gain_rad.is_finite()) {
                return bad(format!("coupling for `{}` is not finite", c.trait_name));
            }
        }
        Ok(())
    }

    pub fn participant_id(p: usize) -> String {
        format!("P{:03}", p + 1)
    }

    pub fn stimulus_id(s: usize) -> String {
        format!("S{:02}", s + 1)
    }
}

/// Pre-noise motion parameters of one participant.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticipantParams {
    pub traits: Vec<f64>,
    pub amplitudes: [f64; MARKER_COUNT],
    pub phases: [f64; MARKER_COUNT],
    pub offsets: [[f64; 3]; MARKER_COUNT],
}

fn direction(m: usize) -> [f64; 3] {
    let a = 0.7 * m as f64;
    let v = [a.cos(), a.sin(), 0.5];
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Amplitudes and phases implied by a trait vector in `TRAIT_NAMES` order.
pub fn planted_motion(spec: &SynthSpec, traits: &[f64]) -> ([f64; MARKER_COUNT], [f64; MARKER_COUNT]) {
    let mut amp = [spec.base_amplitude_mm; MARKER_COUNT];
    let mut phase: [f64; MARKER_COUNT] = std::array::from_fn(|m| 0.4 * m as f64);
    for c in &spec.coupling {
        let Some(t) = TRAIT_NAMES.iter().position(|&n| n == c.trait_name) else { continue };
        let (lo, hi) = trait_range(&c.trait_name);
        let z = (traits[t] - lo) / (hi - lo);
        for &m in &c.markers {
            amp[m] += c.amplitude_gain_mm * z;
            phase[m] += c.phase_gain_rad * z;
        }
    }
    (amp, phase)
}

fn participant_rng(seed: u64, p: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(p as u64 + 1);
    rng
}

fn take_rng(seed: u64, p: usize, s: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((p as u64 + 1) << 24) | (s as u64 + 1));
    rng
}

pub fn participant_params(spec: &SynthSpec, p: usize) -> ParticipantParams {
    let mut rng = participant_rng(spec.seed, p);
    let traits: Vec<f64> = TRAIT_NAMES
        .iter()
        .map(|t| {
            let (lo, hi) = trait_range(t);
            rng.random_range(lo..=hi)
        })
        .collect();
    let jitter = Normal::new(0.0, spec.body_jitter_mm).expect("validated jitter");
    let offsets = std::array::from_fn(|_| std::array::from_fn(|_| jitter.sample(&mut rng)));
    let (amplitudes, phases) = planted_motion(spec, &traits);
    ParticipantParams {
        traits,
        amplitudes,
        phases,
        offsets,
    }
}

pub fn generate_take(spec: &SynthSpec, params: &ParticipantParams, p: usize, s: usize) -> Result<MarkerTake> {
    let mut rng = take_rng(spec.seed, p, s);
    let energy = 1.0 + spec.energy_jitter * rng.sample::<f64, _>(rand_distr::StandardNormal);
    let noise = Normal::new(0.0, spec.noise_std).expect("validated noise");
    let f = spec.tempo_of(s);
    let psi = 0.9 * s as f64;
    let dirs: [[f64; 3]; MARKER_COUNT] = std::array::from_fn(direction);
    let mut data = DMatrix::<f64>::zeros(spec.frames, 3 * MARKER_COUNT);
    for r in 0..spec.frames {
        let t = r as f64 / spec.frame_rate;
        let bounce = spec.bounce_mm * (TAU * f * t).sin();
        for m in 0..MARKER_COUNT {
            let wave = params.amplitudes[m] * energy * (TAU * f * t + params.phases[m] + psi).sin();
            for c in 0..3 {
                let mut v = TEMPLATE[m][c] + params.offsets[m][c] + wave * dirs[m][c];
                if c == 2 {
                    v += bounce;
                }
                if spec.noise_std > 0.0 {
                    v += noise.sample(&mut rng);
                }
                data[(r, 3 * m + c)] = v;
            }
        }
    }
    MarkerTake::with_standard_markers(spec.frame_rate, data, SynthSpec::participant_id(p), SynthSpec::stimulus_id(s))
}

/// All takes of one participant, with their parameters.
pub fn generate_participant(spec: &SynthSpec, p: usize) -> Result<(ParticipantParams, Vec<MarkerTake>)> {
    let params = participant_params(spec, p);
    let takes = (0..spec.stimuli).map(|s| generate_take(spec, &params, p, s)).collect::<Result<_>>()?;
    Ok((params, takes))
}

pub fn trait_table(spec: &SynthSpec) -> Result<TraitTable> {
    let mut table = TraitTable::new(TRAIT_NAMES.iter().map(|s| s.to_string()).collect());
    for p in 0..spec.participants {
        table.insert(SynthSpec::participant_id(p), participant_params(spec, p).traits)?;
    }
    Ok(table)
}

pub struct SynthData {
    pub takes: Vec<MarkerTake>,
    pub traits: TraitTable,
}

/// Generates everything in memory. Participants run in parallel on independent random
/// streams, so the output does not depend on the thread count.
pub fn generate(spec: &SynthSpec) -> Result<SynthData> {
    spec.validate()?;
    let per: Vec<Vec<MarkerTake>> = (0..spec.participants)
        .into_par_iter()
        .map(|p| generate_participant(spec, p).map(|(_, t)| t))
        .collect::<Result<_>>()?;
    Ok(SynthData {
        takes: per.into_iter().flatten().collect(),
        traits: trait_table(spec)?,
    })
}

/// Feature rows for every synthetic take, participant-major, without keeping the takes.
pub fn synth_features(spec: &SynthSpec, skeleton: &SkeletonMap, kind: MotionKind, sigma: f64) -> Result<FeatureMatrix> {
    spec.validate()?;
    let rows: Vec<Vec<FeatureVector>> = (0..spec.participants)
        .into_par_iter()
        .map(|p| {
            let params = participant_params(spec, p);
            (0..spec.stimuli)
                .map(|s| take_features(&generate_take(spec, &params, p, s)?, skeleton, kind, sigma))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    FeatureMatrix::from_vectors(&rows.into_iter().flatten().collect::<Vec<_>>())
}

/// Writes `takes/<participant>_<stimulus>.tsv` with sidecars, `traits.csv` and
/// `synth_spec.json` under `out`, one participant at a time.
pub fn write_dataset(spec: &SynthSpec, out: &Path) -> Result<Vec<PathBuf>> {
    spec.validate()?;
    let take_dir = out.join("takes");
    std::fs::create_dir_all(&take_dir).map_err(|e| Error::io(&take_dir, e))?;
    let paths: Vec<Vec<PathBuf>> = (0..spec.participants)
        .into_par_iter()
        .map(|p| {
            let (_, takes) = generate_participant(spec, p)?;
            let mut written = Vec::new();
            for take in takes {
                let path = take_dir.join(format!("{}_{}.tsv", take.participant_id(), take.stimulus_id()));
                write_take(&path, &take)?;
                let meta = TakeMeta {
                    frame_rate: Some(spec.frame_rate),
                    participant_id: take.participant_id().into(),
                    stimulus_id: take.stimulus_id().into(),
                };
                let side = sidecar_path(&path);
                crate::features::io::write_json(&side, &meta)?;
                written.push(path);
                written.push(side);
            }
            Ok(written)
        })
        .collect::<Result<_>>()?;
    let mut written: Vec<PathBuf> = paths.into_iter().flatten().collect();
    let traits = out.join("traits.csv");
    std::fs::write(&traits, trait_table(spec)?.to_csv()).map_err(|e| Error::io(&traits, e))?;
    written.push(traits);
    let spec_path = out.join("synth_spec.json");
    crate::features::io::write_json(&spec_path, spec)?;
    written.push(spec_path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthSpec {
        SynthSpec {
            participants: 4,
            stimuli: 2,
            frames: 64,
            ..SynthSpec::default()
        }
    }

    #[test]
    fn deterministic() {
        let a = generate(&small()).unwrap();
        let b = generate(&small()).unwrap();
        assert_eq!(a.takes, b.takes);
        assert_eq!(a.traits, b.traits);
        assert_eq!(a.takes.len(), 8);
        let c = generate(&SynthSpec { seed: 8, ..small() }).unwrap();
        assert_ne!(a.takes[0], c.takes[0]);
    }

    #[test]
    fn no_signal_no_noise_gives_identical_takes() {
        let mut spec = small();
        spec.noise_std = 0.0;
        spec.body_jitter_mm = 0.0;
        spec.energy_jitter = 0.0;
        for c in &mut spec.coupling {
            c.amplitude_gain_mm = 0.0;
            c.phase_gain_rad = 0.0;
        }
        let d = generate(&spec).unwrap();
        for t in &d.takes {
            let same_stim = d.takes.iter().find(|o| o.stimulus_id() == t.stimulus_id()).unwrap();
            assert_eq!(t.data(), same_stim.data());
        }
    }

    #[test]
    fn traits_in_range() {
        let table = trait_table(&SynthSpec { participants: 50, ..small() }).unwrap();
        for p in table.participants() {
            for t in TRAIT_NAMES {
                let (lo, hi) = trait_range(t);
                let v = table.get(p, t).unwrap();
                assert!((lo..=hi).contains(&v));
            }
        }
    }

    #[test]
    fn amplitude_monotone_in_trait() {
        let spec = SynthSpec::default();
        let params = participant_params(&spec, 3);
        for c in &spec.coupling {
            let t = TRAIT_NAMES.iter().position(|&n| n == c.trait_name).unwrap();
            let mut raised = params.traits.clone();
            raised[t] += 0.01 * (trait_range(&c.trait_name).1 - trait_range(&c.trait_name).0);
            let (before, _) = planted_motion(&spec, &params.traits);
            let (after, _) = planted_motion(&spec, &raised);
            for &m in &c.markers {
                assert!(after[m] > before[m]);
            }
        }
    }

    #[test]
    fn noise_free_take_matches_formula() {
        let mut spec = small();
        spec.noise_std = 0.0;
        spec.energy_jitter = 0.0;
        let params = participant_params(&spec, 1);
        let take = generate_take(&spec, &params, 1, 0).unwrap();
        let (r, m) = (17, 11);
        let t = r as f64 / spec.frame_rate;
        let dir = direction(m);
        let expected = TEMPLATE[m][2]
            + params.offsets[m][2]
            + spec.bounce_mm * (TAU * spec.tempo_hz * t).sin()
            + params.amplitudes[m] * (TAU * spec.tempo_hz * t + params.phases[m]).sin() * dir[2];
        assert!((take.data()[(r, 3 * m + 2)] - expected).abs() < 1e-9);
    }

    #[test]
    fn invalid_specs() {
        assert!(SynthSpec { participants: 0, ..small() }.validate().is_err());
        assert!(SynthSpec { tempo_hz: 60.0, ..small() }.validate().is_err());
        assert!(SynthSpec { noise_std: -1.0, ..small() }.validate().is_err());
        let mut s = small();
        s.coupling[0].markers.push(21);
        assert!(s.validate().is_err());
    }

    #[test]
    fn written_dataset_reads_back() {
        let dir = tempfile::tempdir().unwrap();
        let spec = SynthSpec { participants: 2, ..small() };
        let written = write_dataset(&spec, dir.path()).unwrap();
        assert_eq!(written.len(), 2 * 2 * 2 + 2);
        let back = crate::mocap::load_take_with_sidecar(&dir.path().join("takes/P002_S02.tsv")).unwrap();
        let original = generate_take(&spec, &participant_params(&spec, 1), 1, 1).unwrap();
        assert_eq!(back.stimulus_id(), "S02");
        for (a, b) in back.data().iter().zip(original.data().iter()) {
            assert_eq!(a, b);
        }
        let traits = TraitTable::read_csv(&dir.path().join("traits.csv")).unwrap();
        assert_eq!(traits, trait_table(&spec).unwrap());
    }
}
