//! Second-order low-pass Butterworth section and zero-phase (forward-backward) filtering.
//!
//! The section is designed with the bilinear transform and frequency prewarping, so the
//! digital response at the cutoff is exactly -3 dB for a single pass. Running it forward
//! and backward squares the magnitude response, which puts the effective gain at the
//! cutoff at 1/2 rather than 1/sqrt(2).

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

/// Direct-form coefficients of one biquad, `a[0]` normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

/// Designs a 2nd-order Butterworth low-pass at `cutoff` Hz for sampling rate `frame_rate`.
pub fn butterworth_lowpass(cutoff: f64, frame_rate: f64) -> Result<Biquad> {
    if !(frame_rate > 0.0) || !frame_rate.is_finite() {
        return Err(Error::FrameRate(frame_rate));
    }
    if !(cutoff > 0.0) || frame_rate <= 2.0 * cutoff {
        return Err(Error::CutoffAboveNyquist { cutoff, frame_rate });
    }
    // prewarped analog cutoff
    let k = (PI * cutoff / frame_rate).tan();
    let k2 = k * k;
    let norm = 1.0 / (1.0 + SQRT_2 * k + k2);
    let b0 = k2 * norm;
    Ok(Biquad {
        b: [b0, 2.0 * b0, b0],
        a: [1.0, 2.0 * (k2 - 1.0) * norm, (1.0 - SQRT_2 * k + k2) * norm],
    })
}

impl Biquad {
    /// |H(e^{jw})|^2 of a single pass at `freq` Hz.
    pub fn magnitude_sq(&self, freq: f64, frame_rate: f64) -> f64 {
        let w = 2.0 * PI * freq / frame_rate;
        let eval = |c: &[f64; 3]| {
            let re = c[0] + c[1] * w.cos() + c[2] * (2.0 * w).cos();
            let im = -(c[1] * w.sin() + c[2] * (2.0 * w).sin());
            re * re + im * im
        };
        eval(&self.b) / eval(&self.a)
    }

    fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / self.a.iter().sum::<f64>()
    }

    /// Transposed direct form II pass. `initial` is the input level the filter state is
    /// settled to before the first sample.
    fn run(&self, x: &[f64], initial: f64) -> Vec<f64> {
        let [b0, b1, b2] = self.b;
        let [_, a1, a2] = self.a;
        let y_ss = self.dc_gain() * initial;
        let mut z1 = b2 * initial - a2 * y_ss;
        let mut z0 = b1 * initial - a1 * y_ss + z1;
        x.iter()
            .map(|&xi| {
                let yi = b0 * xi + z0;
                z0 = b1 * xi - a1 * yi + z1;
                z1 = b2 * xi - a2 * yi;
                yi
            })
            .collect()
    }
}

/// Samples of odd-reflection padding added at each end before forward-backward filtering.
pub const FILTFILT_PAD: usize = 6;

/// Zero-phase filtering: odd-extend the signal, filter forward and backward with settled
/// initial state, then strip the padding.
pub fn filtfilt(section: &Biquad, x: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    if n <= FILTFILT_PAD {
        return Err(Error::TooFewFrames {
            required: FILTFILT_PAD + 1,
            found: n,
        });
    }
    let pad = FILTFILT_PAD;
    let mut ext = Vec::with_capacity(n + 2 * pad);
    ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
    ext.extend_from_slice(x);
    ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));

    let mut y = section.run(&ext, ext[0]);
    y.reverse();
    let mut y = section.run(&y, y[0]);
    y.reverse();
    Ok(y[pad..pad + n].to_vec())
}
