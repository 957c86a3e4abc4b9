//! The Hyper classifier: containment (R1), nearest block (R2) and
//! k-nearest-block voting (R3).

use std::cmp::Ordering;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperblock::{nonoverlap_coordinates, Distance, HyperBlock, HyperBlockJson};
use crate::mhyper::{merge_dominant, merge_pure, HBSet, MergeConfig};
use crate::points::{dominant_label, Points};
use crate::rules::ThresholdRule;
use crate::scalar::Scalar;
use crate::split::{split_train, SplitSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub k_candidates: Vec<usize>,
    pub variant: Distance,
    /// Q: when the best k reaches less than this on T_rk, the model is
    /// flagged as leaving an unclassified residue.
    pub accuracy_threshold: f64,
    /// Refuse when fewer than k blocks lie within this distance.
    pub refusal_radius: Option<f64>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            k_candidates: vec![1, 3, 5],
            variant: Distance::N1,
            accuracy_threshold: 0.0,
            refusal_radius: None,
        }
    }
}

impl ModelConfig {
    pub fn fixed_k(k: usize, variant: Distance) -> Self {
        ModelConfig {
            k_candidates: vec![k],
            variant,
            ..ModelConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_candidates.is_empty() {
            return Err(Error::Config("k_candidates is empty".into()));
        }
        if let Some(k) = self.k_candidates.iter().find(|&&k| k == 0 || k % 2 == 0) {
            return Err(Error::Config(format!(
                "k = {k} is not a positive odd number"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rule {
    R1,
    R2,
    R3,
    #[serde(rename = "refused")]
    Refused,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class: Option<usize>,
    pub rule_used: Rule,
    /// Vote count per class index: containing blocks under R1, the k
    /// nearest blocks under R2/R3.
    pub votes: Vec<usize>,
    pub containing_blocks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionJson {
    pub class: Option<String>,
    pub rule_used: Rule,
    pub votes: IndexMap<String, usize>,
    pub containing_blocks: Vec<usize>,
}

impl Prediction {
    pub fn to_json(&self, class_labels: &[String]) -> PredictionJson {
        PredictionJson {
            class: self.class.map(|c| class_labels[c].clone()),
            rule_used: self.rule_used,
            votes: class_labels
                .iter()
                .cloned()
                .zip(self.votes.iter().copied())
                .collect(),
            containing_blocks: self.containing_blocks.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSelection {
    pub k: usize,
    pub accuracy: f64,
    /// Accuracy per candidate, in candidate order.
    pub per_k: Vec<(usize, f64)>,
    /// Best accuracy fell below Q.
    pub residue: bool,
}

/// A learned model. `reference` is the point set the blocks were built on;
/// member-based distances read it.
#[derive(Debug, Clone)]
pub struct HyperModel<T> {
    pub blocks: HBSet<T>,
    pub reference: Points<T>,
    pub k: usize,
    pub config: ModelConfig,
    pub tie_class: usize,
    pub selection: Option<KSelection>,
    pub rules: Vec<ThresholdRule>,
    means: Vec<Vec<T>>,
}

impl<T: Scalar> HyperModel<T> {
    pub fn new(
        blocks: HBSet<T>,
        reference: Points<T>,
        k: usize,
        config: ModelConfig,
    ) -> Result<Self> {
        config.validate()?;
        if blocks.is_empty() {
            return Err(Error::EmptyBlock);
        }
        let means = blocks
            .blocks
            .iter()
            .map(|b| b.member_mean(&reference).unwrap_or_else(|_| b.center()))
            .collect();
        let tie_class = reference.tie_class.unwrap_or(0);
        Ok(HyperModel {
            blocks,
            reference,
            k,
            config,
            tie_class,
            selection: None,
            rules: Vec::new(),
            means,
        })
    }

    pub fn class_labels(&self) -> &[String] {
        &self.reference.class_labels
    }

    fn block_distance(&self, i: usize, x: &[T]) -> T {
        let b = &self.blocks.blocks[i];
        let sq = |target: &mut dyn Iterator<Item = (usize, T)>| {
            target.fold(T::zero(), |acc, (c, v)| acc + (x[c] - v) * (x[c] - v))
        };
        let d2 = match self.config.variant {
            Distance::N1 => sq(&mut b.active.iter().copied().zip(b.center())),
            Distance::N2 => sq(&mut b.active.iter().copied().zip(self.means[i].iter().copied())),
            Distance::N3 => {
                if b.members.is_empty() {
                    sq(&mut b.active.iter().copied().zip(b.center()))
                } else {
                    b.members
                        .iter()
                        .map(|&m| {
                            let row = self.reference.row(m);
                            sq(&mut b.active.iter().map(|&c| (c, row[c])))
                        })
                        .fold(T::infinity(), T::min)
                }
            }
        };
        d2.sqrt()
    }

    pub fn classify(&self, x: &[T]) -> Prediction {
        self.classify_with_k(x, self.k)
    }

    pub fn classify_with_k(&self, x: &[T], k: usize) -> Prediction {
        let n_classes = self.reference.n_classes();
        let containing: Vec<usize> = (0..self.blocks.len())
            .filter(|&i| self.blocks.blocks[i].contains(x))
            .collect();
        if !containing.is_empty() {
            let mut votes = vec![0; n_classes];
            for &i in &containing {
                votes[self.blocks.blocks[i].label] += 1;
            }
            return Prediction {
                class: Some(dominant_label(&votes, Some(self.tie_class))),
                rule_used: Rule::R1,
                votes,
                containing_blocks: containing,
            };
        }

        let mut ranked: Vec<(T, usize)> = (0..self.blocks.len())
            .map(|i| (self.block_distance(i, x), i))
            .collect();
        ranked.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(Ordering::Equal)
                .then(a.1.cmp(&b.1))
        });
        let k = k.min(ranked.len());
        let nearest = &ranked[..k];

        if let Some(r) = self.config.refusal_radius {
            if nearest.iter().filter(|(d, _)| d.as_f64() <= r).count() < k {
                return Prediction {
                    class: None,
                    rule_used: Rule::Refused,
                    votes: vec![0; n_classes],
                    containing_blocks: Vec::new(),
                };
            }
        }

        let mut votes = vec![0; n_classes];
        for &(_, i) in nearest {
            votes[self.blocks.blocks[i].label] += 1;
        }
        let max = votes.iter().copied().max().unwrap_or(0);
        let tied: Vec<usize> = (0..n_classes).filter(|&c| votes[c] == max).collect();
        let class = if tied.contains(&self.tie_class) {
            self.tie_class
        } else {
            // Nearest block among the tied classes.
            nearest
                .iter()
                .map(|&(_, i)| self.blocks.blocks[i].label)
                .find(|l| tied.contains(l))
                .unwrap_or(tied[0])
        };
        Prediction {
            class: Some(class),
            rule_used: if k == 1 { Rule::R2 } else { Rule::R3 },
            votes,
            containing_blocks: Vec::new(),
        }
    }

    /// Pick k by accuracy on `t_rk`; ties go to the smallest k.
    pub fn select_k(&self, t_rk: &Points<T>) -> Result<KSelection> {
        k_selection(
            self,
            t_rk,
            &self.config.k_candidates,
            self.config.accuracy_threshold,
        )
    }

    pub fn to_bundle(&self) -> ModelBundle {
        ModelBundle {
            blocks: self
                .blocks
                .blocks
                .iter()
                .map(|b| b.to_json(&self.reference))
                .collect(),
            k: self.k,
            variant: self.config.variant,
            tie_class: self.reference.class_labels[self.tie_class].clone(),
            rules: self
                .rules
                .iter()
                .map(|r| {
                    r.to_json(
                        &self.reference.coordinate_names,
                        &self.reference.class_labels,
                    )
                })
                .collect(),
            k_candidates: self.config.k_candidates.clone(),
            accuracy_threshold: self.config.accuracy_threshold,
            refusal_radius: self.config.refusal_radius,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_bundle()).expect("model serializes")
    }

    /// Rebuild from a bundle against the points it was learned on.
    pub fn from_bundle(bundle: &ModelBundle, reference: Points<T>) -> Result<Self> {
        let blocks = bundle
            .blocks
            .iter()
            .map(|j| HyperBlock::from_json(j, &reference))
            .collect::<Result<Vec<_>>>()?;
        let tie = reference
            .class_labels
            .iter()
            .position(|l| *l == bundle.tie_class)
            .ok_or_else(|| Error::UnknownLabel(bundle.tie_class.clone()))?;
        let rules = bundle
            .rules
            .iter()
            .map(|r| {
                ThresholdRule::from_json(r, &reference.coordinate_names, &reference.class_labels)
            })
            .collect::<Result<Vec<_>>>()?;
        let config = ModelConfig {
            k_candidates: if bundle.k_candidates.is_empty() {
                vec![bundle.k]
            } else {
                bundle.k_candidates.clone()
            },
            variant: bundle.variant,
            accuracy_threshold: bundle.accuracy_threshold,
            refusal_radius: bundle.refusal_radius,
        };
        let mut m = HyperModel::new(
            HBSet::from_blocks(blocks),
            reference.with_tie_class(Some(tie)),
            bundle.k,
            config,
        )?;
        m.rules = rules;
        Ok(m)
    }
}

/// Wire form of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub blocks: Vec<HyperBlockJson>,
    pub k: usize,
    pub variant: Distance,
    pub tie_class: String,
    #[serde(default)]
    pub rules: Vec<crate::rules::ThresholdRuleJson>,
    #[serde(default)]
    pub k_candidates: Vec<usize>,
    #[serde(default)]
    pub accuracy_threshold: f64,
    #[serde(default)]
    pub refusal_radius: Option<f64>,
}

pub fn k_selection<T: Scalar>(
    model: &HyperModel<T>,
    t_rk: &Points<T>,
    candidates: &[usize],
    q: f64,
) -> Result<KSelection> {
    if t_rk.is_empty() {
        return Err(Error::EmptyKSet);
    }
    if candidates.is_empty() {
        return Err(Error::Config("k_candidates is empty".into()));
    }
    let per_k: Vec<(usize, f64)> = candidates
        .iter()
        .map(|&k| {
            let correct = (0..t_rk.len())
                .filter(|&r| model.classify_with_k(t_rk.row(r), k).class == Some(t_rk.labels[r]))
                .count();
            (k, correct as f64 / t_rk.len() as f64)
        })
        .collect();
    let (k, accuracy) = per_k
        .iter()
        .copied()
        .reduce(|best, cur| {
            if cur.1 > best.1 || (cur.1 == best.1 && cur.0 < best.0) {
                cur
            } else {
                best
            }
        })
        .expect("non-empty");
    Ok(KSelection {
        k,
        accuracy,
        per_k,
        residue: accuracy < q,
    })
}

/// Learn blocks on the T_rh part of `train` and pick k on the T_rk part.
pub fn learn<T: Scalar>(
    train: &Points<T>,
    split: &SplitSpec,
    merge_cfg: &MergeConfig,
    model_cfg: &ModelConfig,
) -> Result<HyperModel<T>> {
    split.validate()?;
    model_cfg.validate()?;
    let (hb_rows, k_rows) = split_train(&train.labels, split.hb_fraction, split.seed);
    let t_rh = train.select(&hb_rows);
    for (c, label) in train.class_labels.iter().enumerate() {
        if train.labels.contains(&c) && !t_rh.labels.contains(&c) {
            return Err(Error::MissingClass(label.clone()));
        }
    }
    let pure = merge_pure(&t_rh, merge_cfg)?;
    let blocks = if merge_cfg.impurity_threshold > 0.0 {
        merge_dominant(&pure, &t_rh, merge_cfg)?
    } else {
        pure
    };
    let first_k = model_cfg.k_candidates[0];
    let mut model = HyperModel::new(blocks, t_rh, first_k, model_cfg.clone())?;
    if model_cfg.k_candidates.len() > 1 {
        let sel = model.select_k(&train.select(&k_rows))?;
        model.k = sel.k;
        model.selection = Some(sel);
    }
    Ok(model)
}

/// Outcome of the two-block reduced-coordinate rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatingPair {
    /// Indices into the block set: largest block of each of the two classes.
    pub first: usize,
    pub second: usize,
    /// Coordinates on which the two blocks do not overlap.
    pub coordinates: Vec<usize>,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

/// Take the largest pure block of each class, keep the coordinates where
/// they are disjoint, and classify every point on those coordinates only:
/// inside one block gives its class, otherwise the class of the nearer
/// block center.
pub fn separating_pair<T: Scalar>(hbs: &HBSet<T>, points: &Points<T>) -> Result<SeparatingPair> {
    let largest = |class: usize| {
        (0..hbs.len())
            .filter(|&i| {
                hbs.blocks[i].is_pure() && hbs.blocks[i].label == class && !hbs.blocks[i].is_empty()
            })
            .max_by(|&a, &b| {
                hbs.blocks[a]
                    .len()
                    .cmp(&hbs.blocks[b].len())
                    .then(b.cmp(&a))
            })
    };
    if points.n_classes() != 2 {
        return Err(Error::NotBinary(points.n_classes()));
    }
    let first = largest(0).ok_or_else(|| Error::MissingClass(points.class_labels[0].clone()))?;
    let second = largest(1).ok_or_else(|| Error::MissingClass(points.class_labels[1].clone()))?;
    let (a, b) = (&hbs.blocks[first], &hbs.blocks[second]);
    let coordinates = nonoverlap_coordinates(a, b);
    let inside = |hb: &HyperBlock<T>, x: &[T]| {
        coordinates
            .iter()
            .all(|&c| hb.interval(c).is_some_and(|iv| iv.contains(x[c])))
    };
    let d2 = |hb: &HyperBlock<T>, x: &[T]| {
        coordinates.iter().fold(T::zero(), |acc, &c| {
            let m = hb.interval(c).map_or(T::of(0.5), |iv| iv.center());
            acc + (x[c] - m) * (x[c] - m)
        })
    };
    let mut correct = 0;
    for r in 0..points.len() {
        let x = points.row(r);
        let pred = if inside(a, x) {
            a.label
        } else if inside(b, x) {
            b.label
        } else if d2(a, x) <= d2(b, x) {
            a.label
        } else {
            b.label
        };
        if pred == points.labels[r] {
            correct += 1;
        }
    }
    Ok(SeparatingPair {
        first,
        second,
        coordinates,
        correct,
        total: points.len(),
        accuracy: correct as f64 / points.len().max(1) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperblock::Interval;

    fn pts(rows: Vec<Vec<f64>>, labels: Vec<usize>) -> Points<f64> {
        let dim = rows[0].len();
        Points::new(dim, rows, labels, vec!["B".into(), "M".into()]).with_tie_class(Some(1))
    }

    fn model(blocks: Vec<HyperBlock<f64>>, p: &Points<f64>, k: usize) -> HyperModel<f64> {
        HyperModel::new(
            HBSet::from_blocks(blocks),
            p.clone(),
            k,
            ModelConfig::fixed_k(k, Distance::N1),
        )
        .unwrap()
    }

    #[test]
    fn containment_rule() {
        let p = pts(vec![vec![0.1, 0.1], vec![0.9, 0.9]], vec![0, 1]);
        let b = HyperBlock::closed(&[0.0, 0.0], &[0.3, 0.3], &p);
        let m = HyperBlock::closed(&[0.7, 0.7], &[1.0, 1.0], &p);
        let mdl = model(vec![b, m], &p, 3);
        let pred = mdl.classify(&[0.2, 0.2]);
        assert_eq!(pred.class, Some(0));
        assert_eq!(pred.rule_used, Rule::R1);
        assert_eq!(pred.containing_blocks, vec![0]);
    }

    #[test]
    fn multi_containment_majority() {
        let p = pts(vec![vec![0.5], vec![0.5], vec![0.6]], vec![0, 0, 1]);
        let mut b1 = HyperBlock::closed(&[0.0], &[1.0], &p);
        b1.label = 0;
        let b2 = HyperBlock::closed(&[0.4], &[0.55], &p);
        let m = HyperBlock::closed(&[0.55], &[0.7], &p);
        let mdl = model(vec![b1, b2, m], &p, 1);
        let pred = mdl.classify(&[0.5]);
        assert_eq!(pred.class, Some(0));
        assert_eq!(pred.votes, vec![2, 0]);
    }

    #[test]
    fn mixed_pair_goes_to_tie_class() {
        let p = pts(vec![vec![0.5], vec![0.5]], vec![0, 1]);
        let mixed = HyperBlock::closed(&[0.5], &[0.5], &p);
        assert_eq!(mixed.counts, vec![1, 1]);
        let mdl = model(vec![mixed], &p, 1);
        let pred = mdl.classify(&[0.5]);
        assert_eq!(pred.class, Some(1));
        assert_eq!(pred.rule_used, Rule::R1);
    }

    #[test]
    fn nearest_and_vote() {
        let p = pts(vec![vec![0.0], vec![0.2], vec![0.4]], vec![0, 0, 1]);
        let blocks: Vec<_> = (0..3)
            .map(|i| {
                HyperBlock::from_bounds(
                    vec![0],
                    vec![Interval::closed(p.row(i)[0], p.row(i)[0])],
                    &p,
                )
            })
            .collect();
        let one = model(blocks.clone(), &p, 1);
        let pr = one.classify(&[0.35]);
        assert_eq!((pr.class, pr.rule_used), (Some(1), Rule::R2));
        let three = model(blocks, &p, 3);
        let pr = three.classify(&[0.35]);
        assert_eq!((pr.class, pr.rule_used), (Some(0), Rule::R3));
        assert_eq!(pr.votes.iter().sum::<usize>(), 3);
    }

    #[test]
    fn refusal_radius() {
        let p = pts(vec![vec![0.0], vec![1.0]], vec![0, 1]);
        let blocks: Vec<_> = (0..2)
            .map(|i| {
                HyperBlock::from_bounds(
                    vec![0],
                    vec![Interval::closed(p.row(i)[0], p.row(i)[0])],
                    &p,
                )
            })
            .collect();
        let mut m = model(blocks, &p, 1);
        m.config.refusal_radius = Some(0.1);
        let pr = m.classify(&[0.5]);
        assert_eq!(pr.class, None);
        assert_eq!(pr.rule_used, Rule::Refused);
        assert_eq!(m.classify(&[0.05]).class, Some(0));
    }

    #[test]
    fn k_selection_ties_and_residue() {
        let p = pts(
            vec![vec![0.0], vec![0.1], vec![0.9], vec![1.0]],
            vec![0, 0, 1, 1],
        );
        let mdl = HyperModel::new(
            merge_pure(&p, &MergeConfig::default()).unwrap(),
            p.clone(),
            1,
            ModelConfig::default(),
        )
        .unwrap();
        let sel = k_selection(&mdl, &p, &[1, 3, 5], 0.0).unwrap();
        assert_eq!(sel.k, 1);
        assert_eq!(sel.accuracy, 1.0);
        assert!(!sel.residue);
        assert!(k_selection(&mdl, &p, &[1, 3, 5], 1.01).unwrap().residue);
        let empty = p.select(&[]);
        assert_eq!(k_selection(&mdl, &empty, &[1], 0.0), Err(Error::EmptyKSet));
    }

    #[test]
    fn learn_single_candidate() {
        let p = pts(
            vec![vec![0.0], vec![0.1], vec![0.9], vec![1.0]],
            vec![0, 0, 1, 1],
        );
        let m = learn(
            &p,
            &SplitSpec::default(),
            &MergeConfig::default(),
            &ModelConfig::fixed_k(1, Distance::N2),
        )
        .unwrap();
        assert_eq!(m.blocks.len(), 2);
        assert_eq!(m.classify(&[0.6]).class, Some(1));
    }

    #[test]
    fn learn_rejects_missing_class() {
        let p = pts(
            vec![vec![0.0], vec![0.1], vec![0.2], vec![1.0]],
            vec![0, 0, 0, 1],
        );
        let split = SplitSpec {
            hb_fraction: 0.5,
            ..SplitSpec::default()
        };
        // ceil keeps at least one case per present class.
        assert!(learn(&p, &split, &MergeConfig::default(), &ModelConfig::default()).is_ok());
    }

    #[test]
    fn bundle_roundtrip() {
        let p = pts(vec![vec![0.0, 0.0], vec![1.0, 1.0]], vec![0, 1]);
        let m = learn(
            &p,
            &SplitSpec::default(),
            &MergeConfig::default(),
            &ModelConfig::fixed_k(3, Distance::N2),
        )
        .unwrap();
        let text = m.to_json();
        assert!(text.starts_with(r#"{"blocks":[{"label":"B""#));
        assert!(text.contains(r#""k":3,"variant":"N2","tie_class":"M","rules":[]"#));
        let back: ModelBundle = serde_json::from_str(&text).unwrap();
        let m2 = HyperModel::from_bundle(&back, p.clone()).unwrap();
        assert_eq!(m2.blocks.blocks, m.blocks.blocks);
        assert_eq!(m2.to_json(), text);
    }
}
