use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::cv::CvResult;
use super::folds::Grouping;
use crate::mocap::MotionKind;
use crate::regression::ModelKind;

/// An input feature variant: motion kind plus whether Gaussian normalization was applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InputVariant {
    pub kind: MotionKind,
    pub normalized: bool,
}

impl InputVariant {
    pub const ALL: [InputVariant; 4] = [
        InputVariant { kind: MotionKind::Position, normalized: false },
        InputVariant { kind: MotionKind::Position, normalized: true },
        InputVariant { kind: MotionKind::Velocity, normalized: false },
        InputVariant { kind: MotionKind::Velocity, normalized: true },
    ];

    pub fn label(self) -> &'static str {
        match (self.kind, self.normalized) {
            (MotionKind::Position, false) => "Position",
            (MotionKind::Position, true) => "Position (N)",
            (MotionKind::Velocity, false) => "Velocity",
            (MotionKind::Velocity, true) => "Velocity (N)",
        }
    }
}

/// Published scores `(rmse, r2)` used for side-by-side display only.
pub fn reference_score(trait_name: &str, input: InputVariant, model: ModelKind) -> Option<(f64, f64)> {
    let row = InputVariant::ALL.iter().position(|&v| v == input)?;
    match (trait_name, model) {
        ("EQ", ModelKind::Pcr) => Some(EQ_PCR[row]),
        ("EQ", ModelKind::BayesRidge) => Some(EQ_BR[row]),
        ("SQ", ModelKind::Pcr) => Some(SQ_PCR[row]),
        ("SQ", ModelKind::BayesRidge) => Some(SQ_BR[row]),
        (t, ModelKind::BayesRidge) => {
            let col = ["O", "C", "E", "A", "N"].iter().position(|&n| n == t)?;
            Some(OCEAN_BR[row][col])
        }
        _ => None,
    }
}

const EQ_PCR: [(f64, f64); 4] = [(3.071, 0.708), (3.201, 0.684), (4.938, 0.249), (4.583, 0.353)];
const EQ_BR: [(f64, f64); 4] = [(2.722, 0.771), (2.733, 0.765), (4.343, 0.423), (4.015, 0.503)];
const SQ_PCR: [(f64, f64); 4] = [(2.398, 0.781), (2.363, 0.786), (4.448, 0.252), (4.211, 0.329)];
const SQ_BR: [(f64, f64); 4] = [(2.161, 0.867), (2.502, 0.838), (3.832, 0.469), (3.714, 0.552)];
const OCEAN_BR: [[(f64, f64); 5]; 4] = [
    [(0.197, 0.776), (0.317, 0.760), (0.384, 0.743), (0.252, 0.776), (0.384, 0.758)],
    [(0.227, 0.740), (0.332, 0.690), (0.414, 0.756), (0.273, 0.716), (0.390, 0.739)],
    [(0.332, 0.464), (0.487, 0.415), (0.556, 0.523), (0.440, 0.335), (0.557, 0.483)],
    [(0.304, 0.527), (0.426, 0.543), (0.501, 0.623), (0.408, 0.442), (0.461, 0.654)],
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub trait_name: String,
    pub input: InputVariant,
    pub model: ModelKind,
    pub mean_rmse: f64,
    pub mean_r2: f64,
    pub pooled_rmse: f64,
    pub pooled_r2: f64,
    pub fold_rmse: Vec<f64>,
    pub fold_r2: Vec<f64>,
}

impl ScoreEntry {
    pub fn from_cv(trait_name: &str, input: InputVariant, model: ModelKind, cv: &CvResult) -> Self {
        ScoreEntry {
            trait_name: trait_name.to_string(),
            input,
            model,
            mean_rmse: cv.mean_rmse,
            mean_r2: cv.mean_r2,
            pooled_rmse: cv.pooled_rmse,
            pooled_r2: cv.pooled_r2,
            fold_rmse: cv.folds.iter().map(|f| f.rmse).collect(),
            fold_r2: cv.folds.iter().map(|f| f.r2).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub n_folds: usize,
    pub seed: u64,
    pub grouping: Grouping,
    /// Report pooled instead of fold-mean metrics in the text and CSV views.
    pub pooled: bool,
    pub entries: Vec<ScoreEntry>,
}

impl ScoreTable {
    pub fn new(n_folds: usize, seed: u64, grouping: Grouping, pooled: bool) -> Self {
        ScoreTable {
            n_folds,
            seed,
            grouping,
            pooled,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, entry: ScoreEntry) {
        self.entries.push(entry);
    }

    fn shown(&self, e: &ScoreEntry) -> (f64, f64) {
        if self.pooled {
            (e.pooled_rmse, e.pooled_r2)
        } else {
            (e.mean_rmse, e.mean_r2)
        }
    }

    fn find(&self, t: &str, input: InputVariant, model: ModelKind) -> Option<&ScoreEntry> {
        self.entries
            .iter()
            .find(|e| e.trait_name == t && e.input == input && e.model == model)
    }

    fn traits(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.trait_name.as_str()) {
                out.push(&e.trait_name);
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("trait,input,model,rmse,r2,ref_rmse,ref_r2\n");
        for e in &self.entries {
            let (rmse, r2) = self.shown(e);
            let (rr, rq) = match reference_score(&e.trait_name, e.input, e.model) {
                Some((a, b)) => (a.to_string(), b.to_string()),
                None => (String::new(), String::new()),
            };
            let _ = writeln!(
                s,
                "{},{},{},{rmse},{r2},{rr},{rq}",
                e.trait_name,
                e.input.label(),
                e.model.label()
            );
        }
        s
    }

    /// One block per trait: input variants as rows, each model's RMSE and R² with the
    /// published values alongside.
    pub fn to_text(&self) -> String {
        let metric = if self.pooled { "pooled" } else { "fold mean" };
        let grouping = match self.grouping {
            Grouping::None => "none",
            Grouping::ByParticipant => "by participant",
        };
        let mut s = String::new();
        for t in self.traits() {
            let _ = writeln!(
                s,
                "{t}  ({}-fold, seed {}, grouping {grouping}, {metric})",
                self.n_folds, self.seed
            );
            let header = format!("{:<14}| {:<30}| {:<30}", "input", "PCR  rmse r2 (ref)", "Bayesian Ridge  rmse r2 (ref)");
            s.push_str(header.trim_end());
            s.push('\n');
            for input in InputVariant::ALL {
                let mut line = format!("{:<14}", input.label());
                let mut any = false;
                for model in [ModelKind::Pcr, ModelKind::BayesRidge] {
                    let cell = match self.find(t, input, model) {
                        Some(e) => {
                            any = true;
                            let (a, b) = self.shown(e);
                            let r = reference_score(t, input, model)
                                .map(|(x, y)| format!(" ({x:.3} {y:.3})"))
                                .unwrap_or_default();
                            format!("{a:.3} {b:.3}{r}")
                        }
                        None => "-".to_string(),
                    };
                    let _ = write!(line, "| {cell:<30}");
                }
                if any {
                    s.push_str(line.trim_end());
                    s.push('\n');
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("score table serializes") + "\n"
    }
}
