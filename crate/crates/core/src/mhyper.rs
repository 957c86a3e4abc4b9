//! Merger Hyperblocks: grow maximal pure blocks from single-point seeds,
//! then merge them into dominant blocks under an impurity threshold.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperblock::{distance, envelope, impurity_of, seed_hb, Distance, HyperBlock, Interval};
use crate::points::Points;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeConfig {
    /// Dominant merges are accepted only while the joint impurity stays
    /// strictly below this value. 0 disables the dominant phase.
    pub impurity_threshold: f64,
    pub order_seed: u64,
    /// Process blocks in dataset order; otherwise in an order shuffled by
    /// `order_seed`.
    pub deterministic_order: bool,
    /// Half side length of the initial seed boxes. A seed box only picks
    /// the seed's members; the seed block is their min/max envelope. A box
    /// that would hold an opposite-class point falls back to the bare point.
    pub seed_half_length: f64,
}

impl Default for MergeConfig {
    fn default() -> Self {
        MergeConfig {
            impurity_threshold: 0.0,
            order_seed: 0,
            deterministic_order: true,
            seed_half_length: 0.0,
        }
    }
}

impl MergeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.impurity_threshold) {
            return Err(Error::Config(format!(
                "impurity_threshold {} not in [0, 1)",
                self.impurity_threshold
            )));
        }
        if !(0.0..=0.5).contains(&self.seed_half_length) {
            return Err(Error::Config(format!(
                "seed_half_length {} not in [0, 0.5]",
                self.seed_half_length
            )));
        }
        Ok(())
    }
}

/// One accepted merge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeRecord {
    pub step: usize,
    /// Block ids; a merged block keeps the id of its left operand.
    pub left: usize,
    pub right: usize,
    pub resulting_impurity: f64,
    /// Member count of the joint block.
    pub captured_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HBSet<T> {
    pub blocks: Vec<HyperBlock<T>>,
    /// Stable id per block.
    pub ids: Vec<usize>,
    /// Seed rows that were merged into each block.
    pub provenance: Vec<Vec<usize>>,
    pub trace: Vec<MergeRecord>,
}

impl<T: Scalar> HBSet<T> {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Merge trace as JSON lines.
    pub fn trace_jsonl(&self) -> String {
        self.trace
            .iter()
            .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
            .collect()
    }

    /// Wrap externally built blocks (each its own lineage).
    pub fn from_blocks(blocks: Vec<HyperBlock<T>>) -> Self {
        let n = blocks.len();
        HBSet {
            blocks,
            ids: (0..n).collect(),
            provenance: (0..n).map(|i| vec![i]).collect(),
            trace: Vec::new(),
        }
    }
}

fn order(n: usize, cfg: &MergeConfig) -> Vec<usize> {
    let mut o: Vec<usize> = (0..n).collect();
    if !cfg.deterministic_order {
        o.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.order_seed));
    }
    o
}

fn joint_bounds<T: Scalar>(a: &HyperBlock<T>, b: &HyperBlock<T>) -> Vec<Interval<T>> {
    a.bounds
        .iter()
        .zip(&b.bounds)
        .map(|(x, y)| Interval::closed(x.lo.min(y.lo), x.hi.max(y.hi)))
        .collect()
}

/// True if no row in `others` falls inside the closed box.
fn excludes<T: Scalar>(bounds: &[Interval<T>], others: &[usize], points: &Points<T>) -> bool {
    others.iter().all(|&r| {
        let row = points.row(r);
        !bounds
            .iter()
            .enumerate()
            .all(|(c, iv)| iv.lo <= row[c] && row[c] <= iv.hi)
    })
}

/// Tightest closed block around the members of `hb`.
fn member_envelope<T: Scalar>(hb: &HyperBlock<T>, points: &Points<T>) -> HyperBlock<T> {
    let dim = points.dim();
    let mut lo = vec![T::infinity(); dim];
    let mut hi = vec![T::neg_infinity(); dim];
    for &m in &hb.members {
        for (c, &v) in points.row(m).iter().enumerate() {
            lo[c] = lo[c].min(v);
            hi[c] = hi[c].max(v);
        }
    }
    HyperBlock::closed(&lo, &hi, points)
}

struct Work<T> {
    hb: HyperBlock<T>,
    id: usize,
    seeds: Vec<usize>,
    touched: bool,
}

/// Phase one: maximal pure blocks covering every point.
pub fn merge_pure<T: Scalar>(points: &Points<T>, cfg: &MergeConfig) -> Result<HBSet<T>> {
    cfg.validate()?;
    let n = points.len();
    let dim = points.dim();
    let by_class: Vec<Vec<usize>> = (0..points.n_classes())
        .map(|c| (0..n).filter(|&r| points.labels[r] == c).collect())
        .collect();
    let opposite = |label: usize| -> Vec<usize> {
        by_class
            .iter()
            .enumerate()
            .filter(|(c, _)| *c != label)
            .flat_map(|(_, rows)| rows.iter().copied())
            .collect()
    };
    let opposite_of: Vec<Vec<usize>> = (0..points.n_classes()).map(opposite).collect();

    let half = T::of(cfg.seed_half_length);
    let seq = order(n, cfg);
    let mut alive: Vec<Option<Work<T>>> = seq
        .iter()
        .map(|&r| {
            let boxed = seed_hb(points, r, half);
            let mut hb = if boxed.is_pure() {
                member_envelope(&boxed, points)
            } else {
                seed_hb(points, r, T::zero())
            };
            // A conflicting duplicate makes even the bare point impure; it
            // is still a seed, labelled by its own class.
            if !hb.is_pure() {
                hb.label = points.labels[r];
            }
            Some(Work {
                hb,
                id: r,
                seeds: vec![r],
                touched: false,
            })
        })
        .collect();
    debug_assert!(alive
        .iter()
        .all(|w| w.as_ref().unwrap().hb.active.len() == dim));

    let mut finished: Vec<Work<T>> = Vec::new();
    let mut trace = Vec::new();
    for pos in 0..alive.len() {
        let Some(mut x) = alive[pos].take() else {
            continue;
        };
        // Points already inside a finished block do not start a new one.
        if !x.touched {
            let seed_row = points.row(x.seeds[0]);
            if finished.iter().any(|f| f.hb.contains(seed_row)) {
                continue;
            }
        }
        let opp = &opposite_of[x.hb.label];
        if x.hb.is_pure() {
            loop {
                let mut changed = false;
                for slot in alive.iter_mut() {
                    let Some(other) = slot.as_ref() else { continue };
                    if other.hb.label != x.hb.label || !other.hb.is_pure() {
                        continue;
                    }
                    let bounds = joint_bounds(&x.hb, &other.hb);
                    if !excludes(&bounds, opp, points) {
                        continue;
                    }
                    let other = slot.take().expect("checked");
                    x.hb = HyperBlock::from_bounds(x.hb.active.clone(), bounds, points);
                    x.seeds.extend(other.seeds);
                    x.touched = true;
                    trace.push(MergeRecord {
                        step: trace.len(),
                        left: x.id,
                        right: other.id,
                        resulting_impurity: 0.0,
                        captured_points: x.hb.len(),
                    });
                    changed = true;
                }
                if !changed {
                    break;
                }
            }
        }
        finished.push(x);
    }

    let mut set = HBSet {
        blocks: Vec::with_capacity(finished.len()),
        ids: Vec::with_capacity(finished.len()),
        provenance: Vec::with_capacity(finished.len()),
        trace,
    };
    for mut w in finished {
        w.seeds.sort_unstable();
        set.blocks.push(w.hb);
        set.ids.push(w.id);
        set.provenance.push(w.seeds);
    }
    Ok(set)
}

/// Phase two: repeatedly merge each block with the partner giving the
/// lowest joint impurity while that impurity is below the threshold.
pub fn merge_dominant<T: Scalar>(
    pure: &HBSet<T>,
    points: &Points<T>,
    cfg: &MergeConfig,
) -> Result<HBSet<T>> {
    cfg.validate()?;
    let mut set = pure.clone();
    let mut step = set.trace.len();
    loop {
        let mut merged_any = false;
        let mut i = 0;
        while i < set.blocks.len() {
            let mut best: Option<(f64, usize, HyperBlock<T>)> = None;
            for j in 0..set.blocks.len() {
                if j == i {
                    continue;
                }
                let joint = envelope(&set.blocks[i], &set.blocks[j], points)?;
                let imp = impurity_of(&joint.counts)?;
                if best.as_ref().is_none_or(|(b, _, _)| imp < *b) {
                    best = Some((imp, j, joint));
                }
            }
            match best {
                Some((imp, j, joint)) if imp < cfg.impurity_threshold => {
                    step += 1;
                    set.trace.push(MergeRecord {
                        step: step - 1,
                        left: set.ids[i],
                        right: set.ids[j],
                        resulting_impurity: imp,
                        captured_points: joint.len(),
                    });
                    set.blocks[i] = joint;
                    let absorbed = set.provenance[j].clone();
                    set.provenance[i].extend(absorbed);
                    set.provenance[i].sort_unstable();
                    set.blocks.remove(j);
                    set.ids.remove(j);
                    set.provenance.remove(j);
                    if j < i {
                        i -= 1;
                    }
                    merged_any = true;
                    // Re-examine the grown block at the same position.
                }
                _ => i += 1,
            }
        }
        if !merged_any {
            break;
        }
    }
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinglePointEntry {
    pub case_id: String,
    /// Index of the nearest multi-point pure block, if any.
    pub reference: Option<usize>,
    /// Whether that block's class matches the case; `None` when there is
    /// no reference block.
    pub same_class: Option<bool>,
}

/// For each single-member block, the nearest multi-member pure block by
/// center distance and whether its class agrees.
pub fn single_point_report<T: Scalar>(
    hbs: &HBSet<T>,
    points: &Points<T>,
) -> Result<Vec<SinglePointEntry>> {
    let refs: Vec<usize> = (0..hbs.len())
        .filter(|&i| hbs.blocks[i].len() > 1 && hbs.blocks[i].is_pure())
        .collect();
    let mut out = Vec::new();
    for b in hbs.blocks.iter().filter(|b| b.len() == 1) {
        let row = b.members[0];
        let x = points.row(row);
        let mut best: Option<(T, usize)> = None;
        for &r in &refs {
            let d = distance(x, &hbs.blocks[r], Distance::N1, points)?;
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, r));
            }
        }
        out.push(SinglePointEntry {
            case_id: points.ids[row].clone(),
            reference: best.map(|(_, r)| r),
            same_class: best.map(|(_, r)| hbs.blocks[r].label == points.labels[row]),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(values: &[f64], labels: &[usize]) -> Points<f64> {
        Points::new(
            1,
            values.iter().map(|&v| vec![v]).collect(),
            labels.to_vec(),
            vec!["A".into(), "B".into()],
        )
    }

    #[test]
    fn forced_pure_blocks() {
        let p = line(&[0.1, 0.2, 0.5], &[0, 0, 1]);
        let set = merge_pure(&p, &MergeConfig::default()).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(
            (set.blocks[0].bounds[0].lo, set.blocks[0].bounds[0].hi),
            (0.1, 0.2)
        );
        assert_eq!(set.blocks[0].label, 0);
        assert_eq!(
            (set.blocks[1].bounds[0].lo, set.blocks[1].bounds[0].hi),
            (0.5, 0.5)
        );
        assert_eq!(set.provenance[0], vec![0, 1]);
        assert_eq!(set.trace.len(), 1);
    }

    #[test]
    fn interleaved_stays_singletons() {
        let p = line(&[0.1, 0.2, 0.3], &[0, 1, 0]);
        let set = merge_pure(&p, &MergeConfig::default()).unwrap();
        assert_eq!(set.len(), 3);
        let report = single_point_report(&set, &p).unwrap();
        assert_eq!(report.len(), 3);
        assert!(report.iter().all(|e| e.reference.is_none()));
    }

    #[test]
    fn singleton_against_reference_block() {
        let p = line(&[0.1, 0.15, 0.2, 0.3], &[0, 0, 1, 0]);
        let set = merge_pure(&p, &MergeConfig::default()).unwrap();
        let report = single_point_report(&set, &p).unwrap();
        let b = report.iter().find(|e| e.case_id == "2").unwrap();
        assert_eq!(b.same_class, Some(false));
        assert_eq!(set.blocks[b.reference.unwrap()].label, 0);
    }

    #[test]
    fn zero_threshold_keeps_pure_set() {
        let p = line(&[0.1, 0.2, 0.3, 0.6, 0.7], &[0, 1, 0, 1, 1]);
        let pure = merge_pure(&p, &MergeConfig::default()).unwrap();
        let dom = merge_dominant(&pure, &p, &MergeConfig::default()).unwrap();
        assert_eq!(dom, pure);
    }

    #[test]
    fn dominant_merge_below_threshold() {
        let mut v: Vec<f64> = (0..20).map(|i| i as f64 / 40.0).collect();
        let mut l = vec![0; 20];
        v.push(0.3);
        l.push(1);
        v.push(0.9);
        l.push(1);
        let p = line(&v, &l);
        let cfg = MergeConfig {
            impurity_threshold: 0.1,
            ..MergeConfig::default()
        };
        let pure = merge_pure(&p, &cfg).unwrap();
        let dom = merge_dominant(&pure, &p, &cfg).unwrap();
        assert!(dom.len() < pure.len());
        for b in &dom.blocks {
            assert!(b.impurity().unwrap() < 0.1);
        }
    }

    #[test]
    fn threshold_validated() {
        let cfg = MergeConfig {
            impurity_threshold: 1.0,
            ..MergeConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn trace_lines() {
        let p = line(&[0.1, 0.2, 0.5], &[0, 0, 1]);
        let set = merge_pure(&p, &MergeConfig::default()).unwrap();
        assert_eq!(
            set.trace_jsonl(),
            "{\"step\":0,\"left\":0,\"right\":1,\"resulting_impurity\":0.0,\"captured_points\":2}\n"
        );
    }
}
