//! Decision-tree branches and hyperblocks describe the same regions.

mod common;

use hyperview::dtree::{
    branch_intervals, dt_branch_to_hb, hb_to_dt_branch, parse_tree_text, DTBranch,
};
use hyperview::Points;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DOMAIN: (f64, f64) = (1.0, 10.0);

fn tree() -> (Vec<DTBranch>, Vec<String>) {
    let text = std::fs::read_to_string(common::data_path("id3_wbc_tree.txt")).unwrap();
    let names: Vec<String> = (1..=9).map(|i| format!("X{i}")).collect();
    (parse_tree_text(&text, &names).unwrap(), names)
}

/// Random point that often lands exactly on a threshold or domain edge.
fn probe(rng: &mut ChaCha8Rng, thresholds: &[f64]) -> Vec<f64> {
    (0..9)
        .map(|_| match rng.gen_range(0..4) {
            0 => thresholds[rng.gen_range(0..thresholds.len())],
            1 => rng.gen_range(1..=10) as f64,
            _ => rng.gen_range(DOMAIN.0..=DOMAIN.1),
        })
        .collect()
}

#[test]
fn a1_import_has_expected_shape() {
    let (branches, _) = tree();
    assert_eq!(branches.len(), 29);
    assert!(branches
        .iter()
        .all(|b| b.predicted_class == "2" || b.predicted_class == "4"));
}

#[test]
fn branch_block_branch_is_predicate_equivalent() {
    let (branches, _) = tree();
    let domain = vec![DOMAIN; 9];
    let empty: Points<f64> = Points::new(9, vec![], vec![], vec!["2".into(), "4".into()]);
    let mut thresholds: Vec<f64> = branches
        .iter()
        .flat_map(|b| b.conjuncts.iter().map(|c| c.threshold))
        .chain([DOMAIN.0, DOMAIN.1])
        .collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (i, branch) in branches.iter().enumerate() {
        let hb = dt_branch_to_hb(branch, &domain, &empty).unwrap();
        assert_eq!(
            hb.label,
            empty
                .class_labels
                .iter()
                .position(|c| *c == branch.predicted_class)
                .unwrap()
        );
        let back = hb_to_dt_branch(&hb, &domain, &empty.class_labels);
        assert_eq!(back.predicted_class, branch.predicted_class);
        assert_eq!(
            branch_intervals(&back, &domain).unwrap(),
            branch_intervals(branch, &domain).unwrap()
        );
        for _ in 0..10_000 {
            let x = probe(&mut rng, &thresholds);
            let want = branch.holds(&x);
            assert_eq!(hb.contains(&x), want, "branch {i} block at {x:?}");
            assert_eq!(back.holds(&x), want, "branch {i} round trip at {x:?}");
        }
    }
}

#[test]
fn branches_partition_the_domain() {
    let (branches, _) = tree();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5_000 {
        let x: Vec<f64> = (0..9).map(|_| rng.gen_range(1..=10) as f64).collect();
        assert_eq!(branches.iter().filter(|b| b.holds(&x)).count(), 1, "{x:?}");
    }
}
