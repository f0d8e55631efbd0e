use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::take::{JointTake, MarkerTake, MotionKind, JOINT_COUNT, JOINT_LABELS, MARKER_COUNT};
use crate::error::{Error, Result};

/// How one joint is obtained from the marker set: the equal-weight mean of `source_markers`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointRecipe {
    pub joint_label: String,
    pub source_markers: Vec<usize>,
}

/// Marker-to-joint table. Stored as data so alternative layouts can be loaded from JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SkeletonMap {
    recipes: Vec<JointRecipe>,
}

// Marker indices, 0-based, in file column order.
const LF_HEAD: usize = 0;
const RF_HEAD: usize = 1;
const B_HEAD: usize = 2;
const L_SHOULDER: usize = 3;
const R_SHOULDER: usize = 4;
const LB_HIP: usize = 7;
const RB_HIP: usize = 8;
const L_ELBOW: usize = 9;
const R_ELBOW: usize = 10;
const L_WRIST: usize = 11;
const R_WRIST: usize = 12;
const L_FINGER: usize = 13;
const R_FINGER: usize = 14;
const L_KNEE: usize = 15;
const R_KNEE: usize = 16;
const L_ANKLE: usize = 17;
const R_ANKLE: usize = 18;
const L_TOE: usize = 19;
const R_TOE: usize = 20;

impl Default for SkeletonMap {
    fn default() -> Self {
        let sources: [&[usize]; JOINT_COUNT] = [
            &[LB_HIP, RB_HIP],
            &[LB_HIP],
            &[L_KNEE],
            &[L_ANKLE],
            &[L_TOE],
            &[RB_HIP],
            &[R_KNEE],
            &[R_ANKLE],
            &[R_TOE],
            &[L_SHOULDER, R_SHOULDER, LB_HIP, RB_HIP],
            &[L_SHOULDER, R_SHOULDER],
            &[LF_HEAD, RF_HEAD, B_HEAD],
            &[L_SHOULDER],
            &[L_ELBOW],
            &[L_WRIST],
            &[L_FINGER],
            &[R_SHOULDER],
            &[R_ELBOW],
            &[R_WRIST],
            &[R_FINGER],
        ];
        let recipes = JOINT_LABELS
            .iter()
            .zip(sources)
            .map(|((label, _), src)| JointRecipe {
                joint_label: label.to_string(),
                source_markers: src.to_vec(),
            })
            .collect();
        SkeletonMap { recipes }
    }
}

impl SkeletonMap {
    pub fn new(recipes: Vec<JointRecipe>) -> Result<Self> {
        if recipes.len() != JOINT_COUNT {
            return Err(Error::Skeleton(format!(
                "expected {JOINT_COUNT} joints, found {}",
                recipes.len()
            )));
        }
        for r in &recipes {
            if r.source_markers.is_empty() {
                return Err(Error::Skeleton(format!(
                    "joint {} has no source markers",
                    r.joint_label
                )));
            }
            if let Some(&bad) = r.source_markers.iter().find(|&&m| m >= MARKER_COUNT) {
                return Err(Error::Skeleton(format!(
                    "joint {} references marker {bad} (must be < {MARKER_COUNT})",
                    r.joint_label
                )));
            }
        }
        Ok(SkeletonMap { recipes })
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let recipes: Vec<JointRecipe> =
            serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        Self::new(recipes)
    }

    pub fn recipes(&self) -> &[JointRecipe] {
        &self.recipes
    }

    /// Derives the 20-joint position take. Single-source joints copy the marker columns
    /// verbatim; the others average their sources per frame and coordinate.
    pub fn derive_joints(&self, take: &MarkerTake) -> Result<JointTake> {
        if !take.is_conformant() {
            return Err(Error::MarkerCount {
                expected: MARKER_COUNT,
                found: take.markers().len(),
            });
        }
        let src = take.data();
        let frames = take.frames();
        let mut data = DMatrix::<f64>::zeros(frames, 3 * JOINT_COUNT);
        for (j, recipe) in self.recipes.iter().enumerate() {
            for c in 0..3 {
                let out_col = 3 * j + c;
                if let [only] = recipe.source_markers.as_slice() {
                    data.set_column(out_col, &src.column(3 * only + c));
                    continue;
                }
                let n = recipe.source_markers.len() as f64;
                for f in 0..frames {
                    let sum: f64 = recipe
                        .source_markers
                        .iter()
                        .map(|&m| src[(f, 3 * m + c)])
                        .sum();
                    data[(f, out_col)] = sum / n;
                }
            }
        }
        Ok(JointTake {
            frame_rate: take.frame_rate(),
            joints: self.recipes.iter().map(|r| r.joint_label.clone()).collect(),
            data,
            kind: MotionKind::Position,
            participant_id: take.participant_id().to_string(),
            stimulus_id: take.stimulus_id().to_string(),
        })
    }
}
