//! Membership, envelope and distance checked against direct recomputation.

mod common;

use hyperview::hyperblock::{distance, envelope};
use hyperview::{Distance, HyperBlock, Interval, Points};
use proptest::prelude::*;

fn grid_value() -> impl Strategy<Value = f64> {
    // A coarse grid makes shared bounds and boundary points common.
    (0u32..=10).prop_map(|v| v as f64 / 10.0)
}

#[derive(Debug, Clone)]
struct Instance {
    points: Points<f64>,
    a: HyperBlock<f64>,
    b: HyperBlock<f64>,
    probe: Vec<f64>,
}

fn interval() -> impl Strategy<Value = Interval<f64>> {
    (grid_value(), grid_value(), any::<bool>(), any::<bool>()).prop_map(
        |(x, y, lo_open, hi_open)| Interval {
            lo: x.min(y),
            hi: x.max(y),
            lo_open,
            hi_open,
        },
    )
}

fn instance() -> impl Strategy<Value = Instance> {
    (1usize..=4).prop_flat_map(|dim| {
        (
            prop::collection::vec((prop::collection::vec(grid_value(), dim), 0usize..2), 1..25),
            prop::collection::vec(interval(), dim),
            prop::collection::vec(interval(), dim),
            prop::collection::vec(grid_value(), dim),
        )
            .prop_map(move |(rows, ia, ib, probe)| {
                let (rows, labels): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
                let points = common::points(rows, labels, 2);
                let active: Vec<usize> = (0..dim).collect();
                let a = HyperBlock::from_bounds(active.clone(), ia, &points);
                let b = HyperBlock::from_bounds(active, ib, &points);
                Instance {
                    points,
                    a,
                    b,
                    probe,
                }
            })
    })
}

fn inside(iv: &Interval<f64>, v: f64) -> bool {
    let lo_ok = if iv.lo_open { v > iv.lo } else { v >= iv.lo };
    let hi_ok = if iv.hi_open { v < iv.hi } else { v <= iv.hi };
    lo_ok && hi_ok
}

fn oracle_members(bounds: &[Interval<f64>], points: &Points<f64>) -> Vec<usize> {
    (0..points.len())
        .filter(|&r| {
            bounds
                .iter()
                .enumerate()
                .all(|(c, iv)| inside(iv, points.row(r)[c]))
        })
        .collect()
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn membership_matches_oracle(inst in instance()) {
        prop_assert_eq!(&inst.a.members, &oracle_members(&inst.a.bounds, &inst.points));
        let expect = inst.a.bounds.iter().enumerate().all(|(c, iv)| inside(iv, inst.probe[c]));
        prop_assert_eq!(inst.a.contains(&inst.probe), expect);
        let mut counts = vec![0; 2];
        for &m in &inst.a.members {
            counts[inst.points.labels[m]] += 1;
        }
        prop_assert_eq!(&inst.a.counts, &counts);
    }

    #[test]
    fn envelope_matches_oracle(inst in instance()) {
        let e = envelope(&inst.a, &inst.b, &inst.points).unwrap();
        for (c, iv) in e.bounds.iter().enumerate() {
            let (x, y) = (&inst.a.bounds[c], &inst.b.bounds[c]);
            prop_assert_eq!(iv.lo, x.lo.min(y.lo));
            prop_assert_eq!(iv.hi, x.hi.max(y.hi));
            // Every value either input admits, the envelope admits.
            for k in 0..=10 {
                let v = k as f64 / 10.0;
                if inside(x, v) || inside(y, v) {
                    prop_assert!(inside(iv, v));
                }
            }
        }
        prop_assert_eq!(&e.members, &oracle_members(&e.bounds, &inst.points));
        // Symmetric.
        let f = envelope(&inst.b, &inst.a, &inst.points).unwrap();
        prop_assert_eq!(e, f);
    }

    #[test]
    fn distances_match_oracle(inst in instance()) {
        let hb = &inst.a;
        let centre: Vec<f64> = hb.bounds.iter().map(|iv| (iv.lo + iv.hi) / 2.0).collect();
        let n1 = distance(&inst.probe, hb, Distance::N1, &inst.points).unwrap();
        prop_assert!((n1 - euclid(&inst.probe, &centre)).abs() < 1e-12);
        if hb.members.is_empty() {
            prop_assert!(distance(&inst.probe, hb, Distance::N2, &inst.points).is_err());
            prop_assert!(distance(&inst.probe, hb, Distance::N3, &inst.points).is_err());
        } else {
            let dim = inst.probe.len();
            let n = hb.members.len() as f64;
            let mean: Vec<f64> = (0..dim)
                .map(|c| hb.members.iter().map(|&m| inst.points.row(m)[c]).sum::<f64>() / n)
                .collect();
            let n2 = distance(&inst.probe, hb, Distance::N2, &inst.points).unwrap();
            prop_assert!((n2 - euclid(&inst.probe, &mean)).abs() < 1e-12);
            let nearest = hb
                .members
                .iter()
                .map(|&m| euclid(&inst.probe, inst.points.row(m)))
                .fold(f64::INFINITY, f64::min);
            let n3 = distance(&inst.probe, hb, Distance::N3, &inst.points).unwrap();
            prop_assert!((n3 - nearest).abs() < 1e-12);
        }
    }
}
