use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    None,
    ByParticipant,
}

/// Assignment of every sample to one of `n_folds` validation folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub n_folds: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
    pub grouping: Grouping,
}

impl FoldPlan {
    /// Seeded shuffle of the units (samples, or participants when grouped), then
    /// round-robin over folds.
    pub fn new(groups: &[String], n_folds: usize, seed: u64, grouping: Grouping) -> Result<Self> {
        if n_folds < 2 {
            return Err(Error::Folds(format!("need at least 2 folds, got {n_folds}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let assignments = match grouping {
            Grouping::None => {
                let n = groups.len();
                if n < n_folds {
                    return Err(Error::Folds(format!("{n} samples cannot fill {n_folds} folds")));
                }
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(&mut rng);
                let mut a = vec![0; n];
                for (pos, &i) in order.iter().enumerate() {
                    a[i] = pos % n_folds;
                }
                a
            }
            Grouping::ByParticipant => {
                let mut units: Vec<&str> = Vec::new();
                let mut seen = BTreeSet::new();
                for g in groups {
                    if seen.insert(g.as_str()) {
                        units.push(g);
                    }
                }
                if units.len() < n_folds {
                    return Err(Error::Folds(format!(
                        "{} participants cannot fill {n_folds} folds",
                        units.len()
                    )));
                }
                units.shuffle(&mut rng);
                let fold_of: HashMap<&str, usize> =
                    units.iter().enumerate().map(|(pos, &u)| (u, pos % n_folds)).collect();
                groups.iter().map(|g| fold_of[g.as_str()]).collect()
            }
        };
        Ok(FoldPlan {
            n_folds,
            assignments,
            seed,
            grouping,
        })
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// `(training rows, validation rows)` of fold `fold`, each in ascending order.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.len()).partition(|&i| self.assignments[i] != fold)
    }

    /// Number of distinct groups seen on both sides of any fold.
    pub fn shared_groups(&self, groups: &[String]) -> usize {
        let mut shared = BTreeSet::new();
        for fold in 0..self.n_folds {
            let (train, valid) = self.split(fold);
            let train: BTreeSet<&str> = train.iter().map(|&i| groups[i].as_str()).collect();
            for &i in &valid {
                if train.contains(groups[i].as_str()) {
                    shared.insert(groups[i].as_str());
                }
            }
        }
        shared.len()
    }
}
