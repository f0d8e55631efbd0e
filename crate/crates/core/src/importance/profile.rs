use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{lower_cell, FEATURE_LEN};
use crate::mocap::JOINT_COUNT;

pub const GROUP_COUNT: usize = 12;

pub const GROUP_NAMES: [&str; GROUP_COUNT] = [
    "Root", "Hip", "Knee", "Ankle", "Toe", "Torso", "Neck", "Head", "Shoulder", "Elbow", "Wrist",
    "Finger",
];

/// Member joints (indices into A..T) of each group; single joints pass through.
pub const GROUP_MEMBERS: [&[usize]; GROUP_COUNT] = [
    &[0],
    &[1, 5],
    &[2, 6],
    &[3, 7],
    &[4, 8],
    &[9],
    &[10],
    &[11],
    &[12, 16],
    &[13, 17],
    &[14, 18],
    &[15, 19],
];

/// Accumulates `|W(k)|` onto both joints of the coordinate pair behind feature `k`.
/// Pairs of coordinates of the same joint credit that joint twice.
pub fn joint_importance(weights: &[f64]) -> Result<[f64; JOINT_COUNT]> {
    if weights.len() != FEATURE_LEN {
        return Err(Error::LengthMismatch {
            left: weights.len(),
            right: FEATURE_LEN,
        });
    }
    let mut out = [0.0; JOINT_COUNT];
    for (k, w) in weights.iter().enumerate() {
        let (i, j) = lower_cell(k);
        out[i / 3] += w.abs();
        out[j / 3] += w.abs();
    }
    Ok(out)
}

/// Affine map onto `[0, 1]`; a constant input maps to zeros.
pub fn minmax_normalize<const N: usize>(values: &[f64; N]) -> [f64; N] {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    if !(span > 0.0) {
        return [0.0; N];
    }
    values.map(|v| (v - lo) / span)
}

pub fn reduce_to_groups(values: &[f64; JOINT_COUNT]) -> [f64; GROUP_COUNT] {
    GROUP_MEMBERS.map(|m| m.iter().map(|&j| values[j]).sum::<f64>() / m.len() as f64)
}

/// Per-joint importance of one trait model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointImportance {
    pub trait_name: String,
    pub raw: [f64; JOINT_COUNT],
    pub normalized: [f64; JOINT_COUNT],
    pub reduced: [f64; GROUP_COUNT],
}

impl JointImportance {
    pub fn from_weights(trait_name: &str, weights: &[f64]) -> Result<Self> {
        let raw = joint_importance(weights)?;
        let normalized = minmax_normalize(&raw);
        Ok(JointImportance {
            trait_name: trait_name.to_string(),
            raw,
            normalized,
            reduced: reduce_to_groups(&normalized),
        })
    }
}
