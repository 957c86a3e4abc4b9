//! Cross-validation, confusion matrices, pruning analysis and storage
//! complexity of block models versus tree branches.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{learn, HyperModel, ModelConfig};
use crate::dataset::NormalizedDataset;
use crate::dtree::DTBranch;
use crate::error::{Error, Result};
use crate::mhyper::MergeConfig;
use crate::points::dominant_label;
use crate::scalar::Scalar;
use crate::split::{make_folds, SplitSpec};

/// `matrix[truth][pred]`, with refusals counted per true class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub classes: Vec<String>,
    pub matrix: Vec<Vec<usize>>,
    pub refused: Vec<usize>,
}

impl Confusion {
    pub fn from_indices(
        preds: &[Option<usize>],
        truth: &[usize],
        classes: &[String],
    ) -> Result<Self> {
        if preds.len() != truth.len() {
            return Err(Error::Config(format!(
                "{} predictions for {} cases",
                preds.len(),
                truth.len()
            )));
        }
        let n = classes.len();
        let mut matrix = vec![vec![0; n]; n];
        let mut refused = vec![0; n];
        for (p, &t) in preds.iter().zip(truth) {
            if t >= n {
                return Err(Error::UnknownLabel(format!("#{t}")));
            }
            match *p {
                Some(p) if p >= n => return Err(Error::UnknownLabel(format!("#{p}"))),
                Some(p) => matrix[t][p] += 1,
                None => refused[t] += 1,
            }
        }
        Ok(Confusion {
            classes: classes.to_vec(),
            matrix,
            refused,
        })
    }

    pub fn correct(&self) -> usize {
        (0..self.matrix.len()).map(|i| self.matrix[i][i]).sum()
    }

    pub fn total(&self) -> usize {
        self.matrix.iter().flatten().sum::<usize>() + self.refused.iter().sum::<usize>()
    }

    pub fn refusals(&self) -> usize {
        self.refused.iter().sum()
    }
}

/// Confusion matrix over class labels; `None` predictions are refusals.
pub fn confusion(preds: &[Option<&str>], truth: &[&str], classes: &[String]) -> Result<Confusion> {
    let index = |l: &str| {
        classes
            .iter()
            .position(|c| c == l)
            .ok_or_else(|| Error::UnknownLabel(l.to_string()))
    };
    let p = preds
        .iter()
        .map(|p| p.map(index).transpose())
        .collect::<Result<Vec<_>>>()?;
    let t = truth
        .iter()
        .map(|&l| index(l))
        .collect::<Result<Vec<_>>>()?;
    Confusion::from_indices(&p, &t, classes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub accuracy: f64,
    pub confusion: Confusion,
    pub block_count: usize,
    pub k: usize,
    /// Blocks holding a single case.
    pub singleton_blocks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSummary {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub mean_blocks: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationConfig {
    pub split: SplitSpec,
    pub merge: MergeConfig,
    pub model: ModelConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub per_fold: Vec<FoldResult>,
    pub summary: EvaluationSummary,
    pub config: EvaluationConfig,
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    /// Plain-text table: one line per fold, then average/min/max and the
    /// mean block count.
    pub fn table(&self) -> String {
        let kind = if self.config.merge.impurity_threshold > 0.0 {
            "mix"
        } else {
            "pure"
        };
        let mut s = format!(
            "{} {} k={}  folds={} seed={}\n",
            self.config.model.variant,
            kind,
            self.config
                .model
                .k_candidates
                .iter()
                .map(|k| k.to_string())
                .collect::<Vec<_>>()
                .join("/"),
            self.config.split.fold_count,
            self.config.split.seed
        );
        s.push_str("fold  accuracy  correct/total  HBs  k\n");
        for f in &self.per_fold {
            s.push_str(&format!(
                "{:>4}  {:>8.2}  {:>7}/{:<5}  {:>3}  {}\n",
                f.fold + 1,
                100.0 * f.accuracy,
                f.confusion.correct(),
                f.confusion.total(),
                f.block_count,
                f.k
            ));
        }
        s.push_str("method    average  min    max    HBs\n");
        s.push_str(&format!(
            "{} {:<5}  {:>6.2}  {:>5.2}  {:>5.2}  {:.1}\n",
            self.config.model.variant,
            kind,
            100.0 * self.summary.mean,
            100.0 * self.summary.min,
            100.0 * self.summary.max,
            self.summary.mean_blocks
        ));
        s
    }
}

/// Learn on each training fold and classify its validation fold. Folds run
/// in parallel; results keep fold order.
pub fn cross_validate<T: Scalar>(
    data: &NormalizedDataset<T>,
    split: &SplitSpec,
    merge_cfg: &MergeConfig,
    model_cfg: &ModelConfig,
) -> Result<EvaluationReport> {
    let folds = make_folds(&data.base, split)?;
    let per_fold = folds
        .par_iter()
        .enumerate()
        .map(|(i, fold)| {
            let wrap = |e: Error| Error::Fold {
                fold: i,
                source: Box::new(e),
            };
            let train = data.points(&fold.train);
            let val = data.points(&fold.validation);
            let model = learn(&train, split, merge_cfg, model_cfg).map_err(wrap)?;
            let preds: Vec<Option<usize>> = (0..val.len())
                .map(|r| model.classify(val.row(r)).class)
                .collect();
            let confusion =
                Confusion::from_indices(&preds, &val.labels, &val.class_labels).map_err(wrap)?;
            Ok(FoldResult {
                fold: i,
                accuracy: confusion.correct() as f64 / confusion.total().max(1) as f64,
                confusion,
                block_count: model.blocks.len(),
                k: model.k,
                singleton_blocks: model.blocks.blocks.iter().filter(|b| b.len() == 1).count(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = per_fold.len() as f64;
    let summary = EvaluationSummary {
        mean: per_fold.iter().map(|f| f.accuracy).sum::<f64>() / n,
        min: per_fold
            .iter()
            .map(|f| f.accuracy)
            .fold(f64::INFINITY, f64::min),
        max: per_fold
            .iter()
            .map(|f| f.accuracy)
            .fold(f64::NEG_INFINITY, f64::max),
        mean_blocks: per_fold.iter().map(|f| f.block_count as f64).sum::<f64>() / n,
    };
    Ok(EvaluationReport {
        per_fold,
        summary,
        config: EvaluationConfig {
            split: split.clone(),
            merge: merge_cfg.clone(),
            model: model_cfg.clone(),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruningReport {
    pub min_block_size: usize,
    pub removed_blocks: usize,
    pub removed_cases: usize,
    pub covered: usize,
    pub total: usize,
    /// covered / total.
    pub recall: f64,
    /// Containment-rule accuracy on covered cases.
    pub covered_accuracy: f64,
    /// Same value as `covered_accuracy`.
    pub precision: f64,
}

/// Drop blocks with fewer than `min_size` members and score the containment
/// rule on the model's reference points. A case is refused when it lies in
/// a dropped block or in no kept block.
pub fn prune_small<T: Scalar>(model: &HyperModel<T>, min_size: usize) -> PruningReport {
    let points = &model.reference;
    let (kept, dropped): (Vec<usize>, Vec<usize>) =
        (0..model.blocks.len()).partition(|&i| model.blocks.blocks[i].len() >= min_size);
    let mut covered = 0;
    let mut correct = 0;
    for r in 0..points.len() {
        let x = points.row(r);
        if dropped.iter().any(|&i| model.blocks.blocks[i].contains(x)) {
            continue;
        }
        let mut votes = vec![0; points.n_classes()];
        let mut inside = false;
        for &i in &kept {
            let b = &model.blocks.blocks[i];
            if b.contains(x) {
                inside = true;
                votes[b.label] += 1;
            }
        }
        if inside {
            covered += 1;
            if dominant_label(&votes, Some(model.tie_class)) == points.labels[r] {
                correct += 1;
            }
        }
    }
    let total = points.len();
    let covered_accuracy = if covered == 0 {
        0.0
    } else {
        correct as f64 / covered as f64
    };
    PruningReport {
        min_block_size: min_size,
        removed_blocks: model.blocks.len() - kept.len(),
        removed_cases: total - covered,
        covered,
        total,
        recall: covered as f64 / total.max(1) as f64,
        covered_accuracy,
        precision: covered_accuracy,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Complexity {
    pub hb_values: usize,
    pub dt_values: usize,
    pub ratio: f64,
}

/// Values needed to store each model: two bounds per active coordinate of
/// each block; a threshold and a direction per branch conjunct plus one per
/// leaf.
pub fn complexity_counts<T: Scalar>(model: &HyperModel<T>, branches: &[DTBranch]) -> Complexity {
    let hb_values: usize = model.blocks.blocks.iter().map(|b| 2 * b.active.len()).sum();
    let dt_values: usize = branches.iter().map(DTBranch::stored_values).sum();
    Complexity {
        hb_values,
        dt_values,
        ratio: dt_values as f64 / hb_values.max(1) as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperblock::{Distance, HyperBlock};
    use crate::mhyper::HBSet;
    use crate::points::Points;

    fn classes() -> Vec<String> {
        vec!["B".into(), "M".into()]
    }

    #[test]
    fn diagonal_when_all_correct() {
        let c = confusion(
            &[Some("B"), Some("M"), Some("B")],
            &["B", "M", "B"],
            &classes(),
        )
        .unwrap();
        assert_eq!(c.matrix, vec![vec![2, 0], vec![0, 1]]);
        assert_eq!(c.correct(), 3);
    }

    #[test]
    fn replica_matrix() {
        let mut preds = Vec::new();
        let mut truth = Vec::new();
        for (t, p, n) in [("B", "B", 45), ("B", "M", 2), ("M", "B", 5), ("M", "M", 17)] {
            for _ in 0..n {
                preds.push(Some(p));
                truth.push(t);
            }
        }
        let c = confusion(&preds, &truth, &classes()).unwrap();
        assert_eq!(c.matrix, vec![vec![45, 2], vec![5, 17]]);
    }

    #[test]
    fn refusal_column() {
        let c = confusion(&[None, Some("M")], &["B", "M"], &classes()).unwrap();
        assert_eq!(c.refused, vec![1, 0]);
        assert_eq!(c.refusals(), 1);
        assert_eq!(c.total(), 2);
    }

    #[test]
    fn unknown_label_rejected() {
        assert_eq!(
            confusion(&[Some("X")], &["B"], &classes()),
            Err(Error::UnknownLabel("X".into()))
        );
    }

    #[test]
    fn full_domain_block_counts_eighteen() {
        let p = Points::new(9, vec![vec![0.5; 9]], vec![0], classes());
        let hb = HyperBlock::closed(&[0.0; 9], &[1.0; 9], &p);
        let m = HyperModel::new(
            HBSet::from_blocks(vec![hb]),
            p,
            1,
            ModelConfig::fixed_k(1, Distance::N1),
        )
        .unwrap();
        let c = complexity_counts(&m, &[]);
        assert_eq!(c.hb_values, 18);
    }

    #[test]
    fn pruning_min_one_keeps_everything() {
        let p = Points::new(1, vec![vec![0.1], vec![0.9]], vec![0, 1], classes());
        let set = crate::mhyper::merge_pure(&p, &MergeConfig::default()).unwrap();
        let m = HyperModel::new(set, p, 1, ModelConfig::fixed_k(1, Distance::N1)).unwrap();
        let r = prune_small(&m, 1);
        assert_eq!(
            (r.removed_blocks, r.recall, r.covered_accuracy),
            (0, 1.0, 1.0)
        );
        let r = prune_small(&m, 2);
        assert_eq!((r.removed_blocks, r.removed_cases, r.recall), (2, 2, 0.0));
    }
}
