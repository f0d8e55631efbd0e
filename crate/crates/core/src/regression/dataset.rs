use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FeatureSource};

/// Trait columns in the order the trait table CSV uses.
pub const TRAIT_NAMES: [&str; 7] = ["O", "C", "E", "A", "N", "EQ", "SQ"];
/// The five personality traits.
pub const PERSONALITY_TRAITS: [&str; 5] = ["O", "C", "E", "A", "N"];

/// Per-participant trait scores.
#[derive(Debug, Clone, PartialEq)]
pub struct TraitTable {
    names: Vec<String>,
    scores: BTreeMap<String, Vec<f64>>,
}

impl TraitTable {
    pub fn new(names: Vec<String>) -> Self {
        TraitTable {
            names,
            scores: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, participant: impl Into<String>, values: Vec<f64>) -> Result<()> {
        if values.len() != self.names.len() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: self.names.len(),
            });
        }
        self.scores.insert(participant.into(), values);
        Ok(())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn participants(&self) -> impl Iterator<Item = &str> {
        self.scores.keys().map(String::as_str)
    }

    pub fn trait_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Config(format!("trait `{name}` not in trait table")))
    }

    pub fn get(&self, participant: &str, trait_name: &str) -> Result<f64> {
        let idx = self.trait_index(trait_name)?;
        self.scores
            .get(participant)
            .map(|v| v[idx])
            .ok_or_else(|| Error::MissingTarget(participant.to_string()))
    }

    /// Parses `participant_id,<trait>,...` CSV text.
    pub fn parse_csv(text: &str, origin: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let header = match lines.next() {
            Some((_, h)) => h,
            None => return Err(Error::Config(format!("{}: empty trait table", origin.display()))),
        };
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.first() != Some(&"participant_id") {
            return Err(Error::Config(format!(
                "{}: trait table must start with a participant_id column",
                origin.display()
            )));
        }
        let mut table = TraitTable::new(cols[1..].iter().map(|s| s.to_string()).collect());
        for (idx, line) in lines {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != cols.len() {
                return Err(Error::ColumnCount {
                    path: origin.to_path_buf(),
                    line: idx + 1,
                    expected: cols.len(),
                    found: fields.len(),
                });
            }
            let values = fields[1..]
                .iter()
                .map(|tok| {
                    tok.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| Error::Parse {
                            path: origin.to_path_buf(),
                            line: idx + 1,
                            token: tok.to_string(),
                        })
                })
                .collect::<Result<Vec<f64>>>()?;
            table.insert(fields[0], values)?;
        }
        Ok(table)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, path)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("participant_id");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (p, vals) in &self.scores {
            out.push_str(p);
            for v in vals {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// How feature rows become regression samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetMode {
    /// One sample per take; the participant's score is repeated across their takes.
    PerStimulus,
    /// Feature rows averaged per participant; one sample per participant.
    ParticipantMean,
}

/// Design matrix, targets and the participant of every sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub y: Vec<f64>,
    pub groups: Vec<String>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

pub fn build_dataset(
    features: &FeatureMatrix,
    targets: &TraitTable,
    trait_name: &str,
    mode: DatasetMode,
) -> Result<Dataset> {
    let idx = targets.trait_index(trait_name)?;
    let lookup = |src: &FeatureSource| -> Result<f64> {
        targets
            .scores
            .get(&src.participant_id)
            .map(|v| v[idx])
            .ok_or_else(|| Error::MissingTarget(src.participant_id.clone()))
    };
    match mode {
        DatasetMode::PerStimulus => {
            let y = features.rows().iter().map(lookup).collect::<Result<Vec<_>>>()?;
            Ok(Dataset {
                x: features.data().clone(),
                y,
                groups: features.rows().iter().map(|s| s.participant_id.clone()).collect(),
            })
        }
        DatasetMode::ParticipantMean => {
            // participants in order of first appearance
            let mut order: Vec<&str> = Vec::new();
            let mut members: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
            for (r, src) in features.rows().iter().enumerate() {
                lookup(src)?;
                let entry = members.entry(src.participant_id.as_str()).or_default();
                if entry.is_empty() {
                    order.push(src.participant_id.as_str());
                }
                entry.push(r);
            }
            let cols = features.ncols();
            let mut x = DMatrix::<f64>::zeros(order.len(), cols);
            let mut y = Vec::with_capacity(order.len());
            for (i, p) in order.iter().enumerate() {
                let rows = &members[p];
                for c in 0..cols {
                    let sum: f64 = rows.iter().map(|&r| features.data()[(r, c)]).sum();
                    x[(i, c)] = sum / rows.len() as f64;
                }
                y.push(lookup(&features.rows()[rows[0]])?);
            }
            Ok(Dataset {
                x,
                y,
                groups: order.iter().map(|s| s.to_string()).collect(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mocap::MotionKind;

    fn features(participants: usize, stimuli: usize) -> FeatureMatrix {
        let n = participants * stimuli;
        let data = DMatrix::from_fn(n, 4, |r, c| (r * 4 + c) as f64);
        let rows = (0..n)
            .map(|r| FeatureSource {
                participant_id: format!("P{:02}", r / stimuli),
                stimulus_id: format!("S{:02}", r % stimuli),
                kind: MotionKind::Position,
            })
            .collect();
        FeatureMatrix::new(data, rows).unwrap()
    }

    fn table(participants: usize) -> TraitTable {
        let mut t = TraitTable::new(TRAIT_NAMES.iter().map(|s| s.to_string()).collect());
        for p in 0..participants {
            t.insert(format!("P{p:02}"), (0..7).map(|i| (p * 10 + i) as f64).collect())
                .unwrap();
        }
        t
    }

    #[test]
    fn per_stimulus_rows() {
        let d = build_dataset(&features(58, 16), &table(58), "EQ", DatasetMode::PerStimulus).unwrap();
        assert_eq!(d.len(), 928);
        assert_eq!(d.y[17], 15.0); // P01, EQ column
        assert_eq!(d.groups[17], "P01");
    }

    #[test]
    fn participant_mean_rows() {
        let d = build_dataset(&features(58, 16), &table(58), "SQ", DatasetMode::ParticipantMean)
            .unwrap();
        assert_eq!(d.len(), 58);
        // rows 16..32 of column 0 are 64, 68, ..., 124 -> mean 94
        assert_eq!(d.x[(1, 0)], 94.0);
        assert_eq!(d.y[1], 16.0);
    }

    #[test]
    fn missing_participant_named() {
        let err = build_dataset(&features(3, 2), &table(2), "O", DatasetMode::PerStimulus)
            .unwrap_err();
        assert!(err.to_string().contains("P02"), "{err}");
        assert!(build_dataset(&features(3, 2), &table(2), "O", DatasetMode::ParticipantMean).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let t = table(3);
        let back = TraitTable::parse_csv(&t.to_csv(), Path::new("t.csv")).unwrap();
        assert_eq!(back, t);
        assert!(TraitTable::parse_csv("id,O\nP1,2\n", Path::new("t")).is_err());
        assert!(TraitTable::parse_csv("participant_id,O\nP1,x\n", Path::new("t")).is_err());
    }
}
