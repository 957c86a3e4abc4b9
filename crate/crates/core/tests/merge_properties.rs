//! Pure and dominant merging checked by brute force on small datasets.

mod common;

use std::collections::HashMap;

use hyperview::mhyper::{merge_dominant, merge_pure};
use hyperview::{MergeConfig, Points};
use proptest::prelude::*;

/// Up to 300 cases on a coarse grid, without same-point conflicts.
fn dataset() -> impl Strategy<Value = Points<f64>> {
    (1usize..=4).prop_flat_map(|dim| {
        prop::collection::vec((prop::collection::vec(0u32..=8, dim), 0usize..2), 2..300).prop_map(
            move |raw| {
                let mut seen: HashMap<Vec<u32>, usize> = HashMap::new();
                let (rows, labels): (Vec<Vec<f64>>, Vec<usize>) = raw
                    .into_iter()
                    .filter(|(x, c)| *seen.entry(x.clone()).or_insert(*c) == *c)
                    .map(|(x, c)| (x.iter().map(|&v| v as f64 / 8.0).collect(), c))
                    .unzip();
                common::points(rows, labels, 2)
            },
        )
    })
}

fn config() -> impl Strategy<Value = MergeConfig> {
    (
        prop_oneof![Just(0.0), Just(0.1), Just(0.2)],
        any::<bool>(),
        0u64..50,
    )
        .prop_map(|(h, det, seed)| MergeConfig {
            impurity_threshold: 0.0,
            order_seed: seed,
            deterministic_order: det,
            seed_half_length: h,
        })
}

fn in_box(lo: &[f64], hi: &[f64], x: &[f64]) -> bool {
    x.iter().enumerate().all(|(c, &v)| lo[c] <= v && v <= hi[c])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pure_blocks_are_pure_covering_and_maximal(points in dataset(), cfg in config()) {
        let set = merge_pure(&points, &cfg).unwrap();
        for b in &set.blocks {
            prop_assert_eq!(b.impurity().unwrap(), 0.0);
        }
        for r in 0..points.len() {
            prop_assert!(set.blocks.iter().any(|b| b.contains(points.row(r))), "row {} uncovered", r);
        }
        // No two same-class blocks can be joined into a pure box.
        for i in 0..set.len() {
            for j in i + 1..set.len() {
                let (a, b) = (&set.blocks[i], &set.blocks[j]);
                if a.label != b.label {
                    continue;
                }
                let lo: Vec<f64> = a.bounds.iter().zip(&b.bounds).map(|(x, y)| x.lo.min(y.lo)).collect();
                let hi: Vec<f64> = a.bounds.iter().zip(&b.bounds).map(|(x, y)| x.hi.max(y.hi)).collect();
                let blocked = (0..points.len())
                    .any(|r| points.labels[r] != a.label && in_box(&lo, &hi, points.row(r)));
                prop_assert!(blocked, "blocks {} and {} could merge", i, j);
            }
        }
        // Provenance partitions the seeds that were kept.
        let mut seeds: Vec<usize> = set.provenance.iter().flatten().copied().collect();
        let n = seeds.len();
        seeds.sort_unstable();
        seeds.dedup();
        prop_assert_eq!(seeds.len(), n);
    }

    #[test]
    fn dominant_blocks_respect_threshold(points in dataset(), t in 0.05f64..0.5) {
        let cfg = MergeConfig { impurity_threshold: t, ..MergeConfig::default() };
        let pure = merge_pure(&points, &cfg).unwrap();
        let set = merge_dominant(&pure, &points, &cfg).unwrap();
        prop_assert!(set.len() <= pure.len());
        for b in &set.blocks {
            prop_assert!(b.impurity().unwrap() < t);
        }
        for r in 0..points.len() {
            prop_assert!(set.blocks.iter().any(|b| b.contains(points.row(r))));
        }
        // Nothing left to merge.
        for i in 0..set.len() {
            for j in 0..set.len() {
                if i == j {
                    continue;
                }
                let joint = hyperview::hyperblock::envelope(&set.blocks[i], &set.blocks[j], &points).unwrap();
                prop_assert!(joint.impurity().unwrap() >= t);
            }
        }
    }
}

#[test]
fn zero_threshold_is_identity() {
    let points = common::points(vec![vec![0.0], vec![0.5], vec![1.0]], vec![0, 1, 0], 2);
    let cfg = MergeConfig::default();
    let pure = merge_pure(&points, &cfg).unwrap();
    let dom = merge_dominant(&pure, &points, &cfg).unwrap();
    assert_eq!(pure.blocks, dom.blocks);
}
