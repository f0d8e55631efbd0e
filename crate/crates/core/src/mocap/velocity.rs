use nalgebra::DMatrix;

use super::filter::{butterworth_lowpass, filtfilt, FILTFILT_PAD};
use super::take::{JointTake, MotionKind};
use crate::error::{Error, Result};

/// Low-pass cutoff applied after differentiation.
pub const VELOCITY_CUTOFF_HZ: f64 = 24.0;
/// Shortest take the zero-phase filter accepts.
pub const MIN_VELOCITY_FRAMES: usize = FILTFILT_PAD + 1;

/// Time derivative scaled by `frame_rate`: central differences inside, one-sided at the ends.
pub fn differentiate(x: &[f64], frame_rate: f64) -> Vec<f64> {
    let n = x.len();
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n)
            .map(|i| match i {
                0 => (x[1] - x[0]) * frame_rate,
                i if i == n - 1 => (x[n - 1] - x[n - 2]) * frame_rate,
                i => (x[i + 1] - x[i - 1]) * frame_rate / 2.0,
            })
            .collect(),
    }
}

/// Differentiates every column and smooths it with a zero-phase 24 Hz Butterworth low-pass.
pub fn velocity(take: &JointTake) -> Result<JointTake> {
    velocity_with_cutoff(take, VELOCITY_CUTOFF_HZ)
}

pub fn velocity_with_cutoff(take: &JointTake, cutoff: f64) -> Result<JointTake> {
    if take.kind() != MotionKind::Position {
        return Err(Error::Kind {
            expected: "position",
            found: take.kind().as_str(),
        });
    }
    if take.frames() < MIN_VELOCITY_FRAMES {
        return Err(Error::TooFewFrames {
            required: MIN_VELOCITY_FRAMES,
            found: take.frames(),
        });
    }
    let fs = take.frame_rate();
    let section = butterworth_lowpass(cutoff, fs)?;
    let frames = take.frames();
    let mut data = DMatrix::<f64>::zeros(frames, take.data().ncols());
    for c in 0..take.data().ncols() {
        let col: Vec<f64> = take.data().column(c).iter().copied().collect();
        let smoothed = filtfilt(&section, &differentiate(&col, fs))?;
        data.set_column(c, &nalgebra::DVector::from_vec(smoothed));
    }
    Ok(JointTake {
        frame_rate: fs,
        joints: take.joints.clone(),
        data,
        kind: MotionKind::Velocity,
        participant_id: take.participant_id.clone(),
        stimulus_id: take.stimulus_id.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn take_with_column(col: &[f64], fs: f64) -> JointTake {
        let data = DMatrix::from_fn(col.len(), 60, |r, _| col[r]);
        JointTake::from_matrix(fs, data, MotionKind::Position, "p", "s").unwrap()
    }

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    #[test]
    fn constant_position_has_zero_velocity() {
        let v = velocity(&take_with_column(&[42.0; 30], 120.0)).unwrap();
        assert!(v.data().iter().all(|x| x.abs() < 1e-9));
        assert_eq!(v.kind(), MotionKind::Velocity);
    }

    #[test]
    fn ramp_recovers_slope() {
        let fs = 120.0;
        let slope = 350.0; // mm/s
        let col: Vec<f64> = (0..200).map(|i| slope * i as f64 / fs).collect();
        let v = velocity(&take_with_column(&col, fs)).unwrap();
        for r in 10..190 {
            assert!(((v.data()[(r, 0)] - slope) / slope).abs() < 1e-6);
        }
    }

    #[test]
    fn reversed_ramp_negates_velocity() {
        let fs = 120.0;
        let col: Vec<f64> = (0..200).map(|i| 5.0 + 2.5 * i as f64).collect();
        let rev: Vec<f64> = col.iter().rev().copied().collect();
        let v = velocity(&take_with_column(&col, fs)).unwrap();
        let w = velocity(&take_with_column(&rev, fs)).unwrap();
        for r in 10..190 {
            let a = v.data()[(r, 0)];
            let b = w.data()[(199 - r, 0)];
            assert!((a + b).abs() <= 1e-6 * a.abs().max(1.0));
        }
    }

    /// Filtered-vs-unfiltered derivative RMS in dB, away from the edges.
    fn attenuation_db(freq: f64) -> f64 {
        let fs = 120.0;
        let n = 1200;
        let col: Vec<f64> = (0..n)
            .map(|i| 100.0 * (2.0 * PI * freq * i as f64 / fs).sin())
            .collect();
        let raw = differentiate(&col, fs);
        let v = velocity(&take_with_column(&col, fs)).unwrap();
        let filtered: Vec<f64> = v.data().column(0).iter().copied().collect();
        let (a, b) = (100, n - 100);
        20.0 * (rms(&filtered[a..b]) / rms(&raw[a..b])).log10()
    }

    #[test]
    fn sinusoid_attenuation_matches_designed_response() {
        let section = butterworth_lowpass(24.0, 120.0).unwrap();
        // zero-phase: amplitude gain = |H|^2
        let oracle_db = |f: f64| 20.0 * section.magnitude_sq(f, 120.0).log10();
        let high = attenuation_db(48.0);
        let low = attenuation_db(6.0);
        assert!(high <= -12.0, "48 Hz: {high} dB");
        assert!(low >= -0.5, "6 Hz: {low} dB");
        assert!((high - oracle_db(48.0)).abs() < 0.1, "{high} vs {}", oracle_db(48.0));
        assert!((low - oracle_db(6.0)).abs() < 0.01);
    }

    #[test]
    fn preconditions() {
        assert!(matches!(
            velocity(&take_with_column(&[0.0; 5], 120.0)),
            Err(Error::TooFewFrames { required: 7, found: 5 })
        ));
        assert!(matches!(
            velocity(&take_with_column(&[0.0; 30], 48.0)),
            Err(Error::CutoffAboveNyquist { .. })
        ));
        let v = velocity(&take_with_column(&[0.0; 30], 120.0)).unwrap();
        assert!(matches!(velocity(&v), Err(Error::Kind { .. })));
    }

    #[test]
    fn differentiate_endpoints() {
        assert_eq!(differentiate(&[0.0, 1.0, 4.0], 2.0), vec![2.0, 4.0, 6.0]);
    }
}
