//! With one block per training point, block classification is k-NN.

mod common;

use hyperview::classifier::Rule;
use hyperview::hyperblock::seed_hb;
use hyperview::{Distance, HBSet, HyperModel, ModelConfig, Points};
use proptest::prelude::*;

/// k-NN with the same tie rules the model documents: distance ties go to
/// the lower index; a vote tie goes to the tie class if it is tied, else to
/// the class of the nearest tied neighbour.
fn knn(points: &Points<f64>, x: &[f64], k: usize, tie_class: usize, classes: usize) -> usize {
    let mut ranked: Vec<(f64, usize)> = (0..points.len())
        .map(|r| {
            let d = points
                .row(r)
                .iter()
                .zip(x)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            (d, r)
        })
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let nearest = &ranked[..k.min(ranked.len())];
    let mut votes = vec![0; classes];
    for &(_, r) in nearest {
        votes[points.labels[r]] += 1;
    }
    let max = *votes.iter().max().unwrap();
    if votes[tie_class] == max {
        return tie_class;
    }
    nearest
        .iter()
        .map(|&(_, r)| points.labels[r])
        .find(|&l| votes[l] == max)
        .unwrap()
}

fn case() -> impl Strategy<Value = (Points<f64>, Vec<Vec<f64>>, usize, usize, usize)> {
    (1usize..=3, 2usize..=3).prop_flat_map(|(dim, classes)| {
        (
            prop::collection::vec((prop::collection::vec(0.0f64..1.0, dim), 0..classes), 1..40),
            prop::collection::vec(prop::collection::vec(0.0f64..1.0, dim), 20),
            prop_oneof![Just(1usize), Just(3), Just(5), Just(7)],
            0..classes,
        )
            .prop_map(move |(rows, probes, k, tie)| {
                let (rows, labels): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
                (
                    common::points(rows, labels, classes),
                    probes,
                    k,
                    tie,
                    classes,
                )
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn singleton_blocks_classify_like_knn((points, probes, k, tie, classes) in case()) {
        let points = points.with_tie_class(Some(tie));
        let blocks: Vec<_> = (0..points.len()).map(|r| seed_hb(&points, r, 0.0)).collect();
        // Continuous random points are distinct, so each block holds one case.
        prop_assume!(blocks.iter().all(|b| b.len() == 1));
        let model = HyperModel::new(HBSet::from_blocks(blocks), points.clone(), k, ModelConfig::fixed_k(k, Distance::N1)).unwrap();
        for x in &probes {
            let p = model.classify(x);
            prop_assert_ne!(p.rule_used, Rule::R1);
            prop_assert_eq!(p.class, Some(knn(&points, x, k, tie, classes)));
        }
    }
}

#[test]
fn contained_point_uses_r1() {
    let points = common::points(vec![vec![0.2, 0.2], vec![0.8, 0.8]], vec![0, 1], 2);
    let blocks: Vec<_> = (0..2).map(|r| seed_hb(&points, r, 0.1)).collect();
    let model = HyperModel::new(
        HBSet::from_blocks(blocks),
        points,
        1,
        ModelConfig::fixed_k(1, Distance::N1),
    )
    .unwrap();
    let p = model.classify(&[0.25, 0.15]);
    assert_eq!(p.rule_used, Rule::R1);
    assert_eq!(p.class, Some(0));
    let p = model.classify(&[0.6, 0.6]);
    assert_eq!(p.rule_used, Rule::R2);
    assert_eq!(p.class, Some(1));
}
