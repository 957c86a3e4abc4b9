mod common;

use hyperview::classifier::learn;
use hyperview::dataset::{Case, Cell};
use hyperview::evaluation::{cross_validate, prune_small};
use hyperview::{normalize, Dataset, Distance, MergeConfig, ModelConfig, SplitSpec};

#[test]
fn two_fold_cv_on_separable_points_is_perfect() {
    let cases = [(0.0, "A"), (1.0, "A"), (9.0, "B"), (10.0, "B")]
        .iter()
        .enumerate()
        .map(|(i, &(v, c))| Case {
            id: format!("c{i}"),
            class: c.into(),
            cells: vec![Cell::Value { v }],
        })
        .collect();
    let d = Dataset::from_parts(vec!["X1".into()], cases, vec!["A".into(), "B".into()]).unwrap();
    let n = normalize::<f64>(&d).unwrap();
    let split = SplitSpec {
        fold_count: 2,
        seed: 1,
        hb_fraction: 1.0,
    };
    let report = cross_validate(
        &n,
        &split,
        &MergeConfig::default(),
        &ModelConfig::fixed_k(1, Distance::N1),
    )
    .unwrap();
    assert_eq!(report.per_fold.len(), 2);
    assert_eq!(report.summary.mean, 1.0);
    assert_eq!(report.summary.min, 1.0);
}

#[test]
fn pruning_recall_never_grows_with_min_size() {
    let data = common::wbc_normalized();
    let points = data.complete_points();
    let split = SplitSpec::default();
    let merge = MergeConfig {
        seed_half_length: 0.2,
        ..MergeConfig::default()
    };
    let model = learn(
        &points,
        &split,
        &merge,
        &ModelConfig::fixed_k(1, Distance::N1),
    )
    .unwrap();
    let mut last = f64::INFINITY;
    for min in [1, 2, 5, 10, 20, 26, 50, 100, 500] {
        let r = prune_small(&model, min);
        assert!(r.recall <= last, "min {min}: {} > {last}", r.recall);
        assert_eq!(r.covered + r.removed_cases, r.total);
        assert!(r.covered_accuracy <= 1.0);
        last = r.recall;
    }
    // Nothing is dropped at size 1 and the pure blocks cover every case.
    let all = prune_small(&model, 1);
    assert_eq!(all.removed_blocks, 0);
    assert_eq!(all.recall, 1.0);
    assert_eq!(all.covered_accuracy, 1.0);
}
