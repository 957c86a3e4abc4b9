//! Deterministic stratified splits.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub fold_count: usize,
    pub seed: u64,
    /// Fraction of each training fold used to learn blocks; the rest
    /// selects k.
    pub hb_fraction: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            fold_count: 10,
            seed: 7,
            hb_fraction: 1.0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.hb_fraction > 0.0 && self.hb_fraction <= 1.0) {
            return Err(Error::InvalidSplit(format!(
                "hb_fraction {} not in (0, 1]",
                self.hb_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

/// Stratified fold index per item. Items of each class are shuffled with
/// the seed, then dealt round-robin with a counter that carries across
/// classes, so fold sizes and per-class fold counts each differ by at most 1.
pub fn fold_assignment(labels: &[usize], folds: usize, seed: u64) -> Vec<usize> {
    let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![0; labels.len()];
    let mut counter = 0usize;
    for class in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for m in members {
            out[m] = counter % folds;
            counter += 1;
        }
    }
    out
}

/// Folds over the complete cases of `d` (cases with missing cells take no
/// part in classifier training or evaluation). Indices are case indices.
pub fn make_folds(d: &Dataset, spec: &SplitSpec) -> Result<Vec<Fold>> {
    spec.validate()?;
    let complete = d.complete_indices();
    if spec.fold_count < 2 || spec.fold_count > complete.len() {
        return Err(Error::FoldCount {
            folds: spec.fold_count,
            cases: complete.len(),
        });
    }
    let all_labels = d.labels();
    let labels: Vec<usize> = complete.iter().map(|&i| all_labels[i]).collect();
    let assign = fold_assignment(&labels, spec.fold_count, spec.seed);
    Ok((0..spec.fold_count)
        .map(|f| {
            let (validation, train): (Vec<usize>, Vec<usize>) = complete.iter().partition(|&&i| {
                let pos = complete.binary_search(&i).expect("present");
                assign[pos] == f
            });
            Fold { train, validation }
        })
        .collect())
}

/// Split training rows into the block-learning part and the k-selection
/// part, stratified by class. Returns positions into `labels`.
pub fn split_train(labels: &[usize], hb_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut hb = Vec::new();
    let mut k = Vec::new();
    for class in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if hb_fraction < 1.0 {
            members.shuffle(&mut rng);
        }
        let take = ((members.len() as f64) * hb_fraction).ceil() as usize;
        hb.extend_from_slice(&members[..take.min(members.len())]);
        k.extend_from_slice(&members[take.min(members.len())..]);
    }
    hb.sort_unstable();
    k.sort_unstable();
    (hb, k)
}
