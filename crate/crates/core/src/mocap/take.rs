use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of reflective markers in the capture layout.
pub const MARKER_COUNT: usize = 21;
/// Number of derived joints.
pub const JOINT_COUNT: usize = 20;
/// Number of coordinate time series per joint take (joint-major X, Y, Z).
pub const JOINT_COLUMNS: usize = 3 * JOINT_COUNT;

/// Marker labels in file column order.
pub const MARKER_LABELS: [&str; MARKER_COUNT] = [
    "LF head",
    "RF head",
    "B head",
    "L shoulder",
    "R shoulder",
    "sternum",
    "stomach",
    "LB hip",
    "RB hip",
    "L elbow",
    "R elbow",
    "L wrist",
    "R wrist",
    "L middle finger",
    "R middle finger",
    "L knee",
    "R knee",
    "L ankle",
    "R ankle",
    "L toe",
    "R toe",
];

/// Joint letters A..T with the body part each one stands for.
pub const JOINT_LABELS: [(&str, &str); JOINT_COUNT] = [
    ("A", "root"),
    ("B", "L hip"),
    ("C", "L knee"),
    ("D", "L ankle"),
    ("E", "L toe"),
    ("F", "R hip"),
    ("G", "R knee"),
    ("H", "R ankle"),
    ("I", "R toe"),
    ("J", "torso"),
    ("K", "neck"),
    ("L", "head"),
    ("M", "L shoulder"),
    ("N", "L elbow"),
    ("O", "L wrist"),
    ("P", "L finger"),
    ("Q", "R shoulder"),
    ("R", "R elbow"),
    ("S", "R wrist"),
    ("T", "R finger"),
];

/// Whether a joint take holds positions (mm) or velocities (mm/s).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionKind {
    Position,
    Velocity,
}

impl MotionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MotionKind::Position => "position",
            MotionKind::Velocity => "velocity",
        }
    }
}

impl std::fmt::Display for MotionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One recording: frames x (3 * markers) coordinates in millimetres.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerTake {
    frame_rate: f64,
    markers: Vec<String>,
    data: DMatrix<f64>,
    participant_id: String,
    stimulus_id: String,
}

impl MarkerTake {
    pub fn new(
        frame_rate: f64,
        markers: Vec<String>,
        data: DMatrix<f64>,
        participant_id: impl Into<String>,
        stimulus_id: impl Into<String>,
    ) -> Result<Self> {
        if !(frame_rate > 0.0) || !frame_rate.is_finite() {
            return Err(Error::FrameRate(frame_rate));
        }
        if data.ncols() != 3 * markers.len() {
            return Err(Error::LengthMismatch {
                left: data.ncols(),
                right: 3 * markers.len(),
            });
        }
        if data.nrows() < 2 {
            return Err(Error::TooFewFrames {
                required: 2,
                found: data.nrows(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Degenerate("non-finite sample in marker data".into()));
        }
        Ok(MarkerTake {
            frame_rate,
            markers,
            data,
            participant_id: participant_id.into(),
            stimulus_id: stimulus_id.into(),
        })
    }

    /// Builds a take using the standard 21 marker labels.
    pub fn with_standard_markers(
        frame_rate: f64,
        data: DMatrix<f64>,
        participant_id: impl Into<String>,
        stimulus_id: impl Into<String>,
    ) -> Result<Self> {
        let markers = MARKER_LABELS.iter().map(|s| s.to_string()).collect();
        Self::new(frame_rate, markers, data, participant_id, stimulus_id)
    }

    pub fn frames(&self) -> usize {
        self.data.nrows()
    }

    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    pub fn markers(&self) -> &[String] {
        &self.markers
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn participant_id(&self) -> &str {
        &self.participant_id
    }

    pub fn stimulus_id(&self) -> &str {
        &self.stimulus_id
    }

    /// True when the take follows the 21-marker layout.
    pub fn is_conformant(&self) -> bool {
        self.markers.len() == MARKER_COUNT
    }
}

/// Derived 20-joint trajectories, columns joint-major (A.x, A.y, A.z, B.x, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct JointTake {
    pub(crate) frame_rate: f64,
    pub(crate) joints: Vec<String>,
    pub(crate) data: DMatrix<f64>,
    pub(crate) kind: MotionKind,
    pub(crate) participant_id: String,
    pub(crate) stimulus_id: String,
}

impl JointTake {
    /// Wraps an existing frames x 60 matrix. Used by tests and synthetic generators.
    pub fn from_matrix(
        frame_rate: f64,
        data: DMatrix<f64>,
        kind: MotionKind,
        participant_id: impl Into<String>,
        stimulus_id: impl Into<String>,
    ) -> Result<Self> {
        if !(frame_rate > 0.0) || !frame_rate.is_finite() {
            return Err(Error::FrameRate(frame_rate));
        }
        if data.ncols() != JOINT_COLUMNS {
            return Err(Error::LengthMismatch {
                left: data.ncols(),
                right: JOINT_COLUMNS,
            });
        }
        Ok(JointTake {
            frame_rate,
            joints: JOINT_LABELS.iter().map(|(l, _)| l.to_string()).collect(),
            data,
            kind,
            participant_id: participant_id.into(),
            stimulus_id: stimulus_id.into(),
        })
    }

    pub fn frames(&self) -> usize {
        self.data.nrows()
    }

    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    pub fn joints(&self) -> &[String] {
        &self.joints
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn kind(&self) -> MotionKind {
        self.kind
    }

    pub fn participant_id(&self) -> &str {
        &self.participant_id
    }

    pub fn stimulus_id(&self) -> &str {
        &self.stimulus_id
    }

    /// Column index of `coordinate` (0 = X, 1 = Y, 2 = Z) of joint `joint`.
    pub fn column_of(joint: usize, coordinate: usize) -> usize {
        3 * joint + coordinate
    }

    /// Inverse of [`JointTake::column_of`].
    pub fn joint_of_column(column: usize) -> (usize, usize) {
        (column / 3, column % 3)
    }
}
