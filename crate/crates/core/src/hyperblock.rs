//! Hyperblock geometry: membership, envelopes, impurity, point-to-block
//! distances and pairwise predicates.
//!
//! A hyperblock is a conjunction of per-coordinate intervals over a set of
//! active coordinates. Its members are exactly the points of the reference
//! [`Points`] that satisfy every interval.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::points::Points;
use crate::scalar::{Scalar, BOUND_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
    #[serde(default)]
    pub lo_open: bool,
    #[serde(default)]
    pub hi_open: bool,
}

impl<T: Scalar> Interval<T> {
    pub fn closed(lo: T, hi: T) -> Self {
        Interval {
            lo,
            hi,
            lo_open: false,
            hi_open: false,
        }
    }

    pub fn contains(&self, v: T) -> bool {
        let above = if self.lo_open {
            v > self.lo
        } else {
            v >= self.lo
        };
        let below = if self.hi_open {
            v < self.hi
        } else {
            v <= self.hi
        };
        above && below
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && (self.lo_open || self.hi_open))
    }

    /// Shared points exist. Touching closed endpoints count as intersecting.
    pub fn intersects(&self, other: &Interval<T>) -> bool {
        let left_ok = if self.hi == other.lo {
            !(self.hi_open || other.lo_open)
        } else {
            self.hi > other.lo
        };
        let right_ok = if other.hi == self.lo {
            !(other.hi_open || self.lo_open)
        } else {
            other.hi > self.lo
        };
        left_ok && right_ok
    }

    /// Intersect or share an endpoint.
    pub fn touches(&self, other: &Interval<T>) -> bool {
        self.hi >= other.lo && other.hi >= self.lo
    }

    pub fn center(&self) -> T {
        (self.lo + self.hi) / T::of(2.0)
    }

    pub fn length(&self) -> T {
        self.hi - self.lo
    }

    fn same_as(&self, other: &Interval<T>) -> bool {
        (self.lo - other.lo).abs().as_f64() <= BOUND_EPS
            && (self.hi - other.hi).abs().as_f64() <= BOUND_EPS
            && self.lo_open == other.lo_open
            && self.hi_open == other.hi_open
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperBlock<T> {
    pub active: Vec<usize>,
    pub bounds: Vec<Interval<T>>,
    /// Rows of the reference point set inside the block.
    pub members: Vec<usize>,
    /// Member count per class index.
    pub counts: Vec<usize>,
    pub label: usize,
}

/// Result of testing a point that may have missing values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Inside,
    Outside,
    NotEvaluable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Distance {
    /// To the geometric center.
    N1,
    /// To the mean of member points.
    N2,
    /// To the nearest member point.
    N3,
}

impl std::str::FromStr for Distance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "N1" | "CENTER" => Ok(Distance::N1),
            "N2" | "MEAN" => Ok(Distance::N2),
            "N3" | "NEAREST" => Ok(Distance::N3),
            _ => Err(Error::Config(format!("unknown distance variant `{s}`"))),
        }
    }
}

impl std::fmt::Display for Distance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CombineMode {
    /// Intervals intersect on every coordinate.
    M1Overlap,
    /// Some case lies in both blocks.
    M2SharedPoint,
    /// Identical on n-1 coordinates; the remaining one intersects or touches.
    M3MatchedEdges,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinationVerdict {
    pub mode: CombineMode,
    pub holds: bool,
    /// Row of a shared case, for M2 only.
    pub witness: Option<usize>,
}

fn sq_dist<T: Scalar>(a: impl Iterator<Item = (T, T)>) -> T {
    a.fold(T::zero(), |acc, (x, y)| acc + (x - y) * (x - y))
}

impl<T: Scalar> HyperBlock<T> {
    /// Block over the given intervals; members and counts are scanned from
    /// `points`.
    pub fn from_bounds(active: Vec<usize>, bounds: Vec<Interval<T>>, points: &Points<T>) -> Self {
        assert_eq!(active.len(), bounds.len());
        let mut hb = HyperBlock {
            active,
            bounds,
            members: Vec::new(),
            counts: vec![0; points.n_classes()],
            label: 0,
        };
        hb.refresh(points);
        hb
    }

    /// Closed block over all coordinates.
    pub fn closed(lo: &[T], hi: &[T], points: &Points<T>) -> Self {
        let bounds = lo
            .iter()
            .zip(hi)
            .map(|(&l, &h)| Interval::closed(l, h))
            .collect();
        Self::from_bounds((0..lo.len()).collect(), bounds, points)
    }

    /// Recompute members, counts and label against `points`.
    pub fn refresh(&mut self, points: &Points<T>) {
        self.members = (0..points.len())
            .filter(|&r| self.contains(points.row(r)))
            .collect();
        self.counts = vec![0; points.n_classes()];
        for &m in &self.members {
            self.counts[points.labels[m]] += 1;
        }
        self.label = points.dominant(&self.counts);
    }

    pub fn contains(&self, x: &[T]) -> bool {
        self.active
            .iter()
            .zip(&self.bounds)
            .all(|(&c, iv)| iv.contains(x[c]))
    }

    pub fn membership(&self, x: &[Option<T>]) -> Membership {
        let mut inside = true;
        for (&c, iv) in self.active.iter().zip(&self.bounds) {
            match x[c] {
                None => return Membership::NotEvaluable,
                Some(v) => inside &= iv.contains(v),
            }
        }
        if inside {
            Membership::Inside
        } else {
            Membership::Outside
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_pure(&self) -> bool {
        self.counts.iter().filter(|&&c| c > 0).count() <= 1
    }

    /// Center per active coordinate.
    pub fn center(&self) -> Vec<T> {
        self.bounds.iter().map(Interval::center).collect()
    }

    /// Side length per active coordinate.
    pub fn lengths(&self) -> Vec<T> {
        self.bounds.iter().map(Interval::length).collect()
    }

    pub fn interval(&self, coordinate: usize) -> Option<&Interval<T>> {
        self.active
            .iter()
            .position(|&c| c == coordinate)
            .map(|p| &self.bounds[p])
    }

    /// Fraction of members not in the dominant class.
    pub fn impurity(&self) -> Result<f64> {
        impurity_of(&self.counts)
    }

    /// Coordinate-wise mean of members over active coordinates.
    pub fn member_mean(&self, points: &Points<T>) -> Result<Vec<T>> {
        if self.members.is_empty() {
            return Err(Error::EmptyBlock);
        }
        let n = T::of(self.members.len() as f64);
        Ok(self
            .active
            .iter()
            .map(|&c| {
                self.members
                    .iter()
                    .fold(T::zero(), |acc, &m| acc + points.row(m)[c])
                    / n
            })
            .collect())
    }

    fn same_active(&self, other: &HyperBlock<T>) -> Result<()> {
        if self.active != other.active {
            return Err(Error::CoordinateMismatch);
        }
        Ok(())
    }
}

pub fn impurity_of(counts: &[usize]) -> Result<f64> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyBlock);
    }
    let max = counts.iter().copied().max().unwrap_or(0);
    Ok((total - max) as f64 / total as f64)
}

/// Block of half-width `half_length` around a point, clipped to [0, 1].
pub fn seed_hb<T: Scalar>(points: &Points<T>, row: usize, half_length: T) -> HyperBlock<T> {
    let x = points.row(row);
    let lo: Vec<T> = x
        .iter()
        .map(|&v| (v - half_length).max(T::zero()))
        .collect();
    let hi: Vec<T> = x.iter().map(|&v| (v + half_length).min(T::one())).collect();
    HyperBlock::closed(&lo, &hi, points)
}

/// Smallest block containing both, with members rescanned.
pub fn envelope<T: Scalar>(
    a: &HyperBlock<T>,
    b: &HyperBlock<T>,
    points: &Points<T>,
) -> Result<HyperBlock<T>> {
    a.same_active(b)?;
    let bounds = a
        .bounds
        .iter()
        .zip(&b.bounds)
        .map(|(x, y)| {
            let (lo, lo_open) = if x.lo < y.lo {
                (x.lo, x.lo_open)
            } else if y.lo < x.lo {
                (y.lo, y.lo_open)
            } else {
                (x.lo, x.lo_open && y.lo_open)
            };
            let (hi, hi_open) = if x.hi > y.hi {
                (x.hi, x.hi_open)
            } else if y.hi > x.hi {
                (y.hi, y.hi_open)
            } else {
                (x.hi, x.hi_open && y.hi_open)
            };
            Interval {
                lo,
                hi,
                lo_open,
                hi_open,
            }
        })
        .collect();
    Ok(HyperBlock::from_bounds(a.active.clone(), bounds, points))
}

/// Euclidean distance in normalized space from `x` to the block.
pub fn distance<T: Scalar>(
    x: &[T],
    hb: &HyperBlock<T>,
    variant: Distance,
    points: &Points<T>,
) -> Result<T> {
    let d2 = match variant {
        Distance::N1 => sq_dist(
            hb.active
                .iter()
                .zip(&hb.bounds)
                .map(|(&c, iv)| (x[c], iv.center())),
        ),
        Distance::N2 => {
            let mean = hb.member_mean(points)?;
            sq_dist(hb.active.iter().zip(mean).map(|(&c, m)| (x[c], m)))
        }
        Distance::N3 => {
            if hb.members.is_empty() {
                return Err(Error::EmptyBlock);
            }
            hb.members
                .iter()
                .map(|&m| {
                    let row = points.row(m);
                    sq_dist(hb.active.iter().map(|&c| (x[c], row[c])))
                })
                .fold(T::infinity(), T::min)
        }
    };
    Ok(d2.sqrt())
}

pub fn combine_check<T: Scalar>(
    a: &HyperBlock<T>,
    b: &HyperBlock<T>,
    mode: CombineMode,
) -> CombinationVerdict {
    let comparable = a.active == b.active;
    let (holds, witness) = if !comparable {
        (false, None)
    } else {
        match mode {
            CombineMode::M1Overlap => (
                a.bounds.iter().zip(&b.bounds).all(|(x, y)| x.intersects(y)),
                None,
            ),
            CombineMode::M2SharedPoint => {
                // Member lists are sorted row indices.
                let w = first_common(&a.members, &b.members);
                (w.is_some(), w)
            }
            CombineMode::M3MatchedEdges => {
                let differing: Vec<usize> = (0..a.bounds.len())
                    .filter(|&i| !a.bounds[i].same_as(&b.bounds[i]))
                    .collect();
                (
                    differing.len() == 1 && a.bounds[differing[0]].touches(&b.bounds[differing[0]]),
                    None,
                )
            }
        }
    };
    CombinationVerdict {
        mode,
        holds,
        witness,
    }
}

fn first_common(a: &[usize], b: &[usize]) -> Option<usize> {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Equal => return Some(a[i]),
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
        }
    }
    None
}

/// Half the summed absolute bound differences.
pub fn adjacency_score<T: Scalar>(a: &HyperBlock<T>, b: &HyperBlock<T>) -> T {
    a.bounds
        .iter()
        .zip(&b.bounds)
        .fold(T::zero(), |acc, (x, y)| {
            acc + (x.lo - y.lo).abs() + (x.hi - y.hi).abs()
        })
        / T::of(2.0)
}

pub fn adjacency<T: Scalar>(a: &HyperBlock<T>, b: &HyperBlock<T>, threshold: T) -> bool {
    adjacency_score(a, b) <= threshold
}

/// Coordinates on which the two blocks' intervals are disjoint.
pub fn nonoverlap_coordinates<T: Scalar>(a: &HyperBlock<T>, b: &HyperBlock<T>) -> Vec<usize> {
    a.active
        .iter()
        .zip(&a.bounds)
        .filter_map(|(&c, ia)| {
            let ib = b.interval(c)?;
            (!ia.intersects(ib)).then_some(c)
        })
        .collect()
}

/// Count of distinct blocks after grouping adjacent ones, and how many of
/// the distinct blocks hold more than one class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniqueSummary {
    pub total: usize,
    pub unique: usize,
    pub mixed: usize,
    /// Index of the kept representative for each input block.
    pub representative: Vec<usize>,
}

pub fn unique_blocks<T: Scalar>(blocks: &[HyperBlock<T>], threshold: T) -> UniqueSummary {
    let mut reps: Vec<usize> = Vec::new();
    let mut representative = Vec::with_capacity(blocks.len());
    for (i, b) in blocks.iter().enumerate() {
        match reps
            .iter()
            .find(|&&r| blocks[r].active == b.active && adjacency(&blocks[r], b, threshold))
        {
            Some(&r) => representative.push(r),
            None => {
                reps.push(i);
                representative.push(i);
            }
        }
    }
    let mixed = reps.iter().filter(|&&r| !blocks[r].is_pure()).count();
    UniqueSummary {
        total: blocks.len(),
        unique: reps.len(),
        mixed,
        representative,
    }
}

/// Wire form of a block. Bounds are in normalized units keyed by
/// coordinate name; members are case ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperBlockJson {
    pub label: String,
    pub bounds: IndexMap<String, Interval<f64>>,
    #[serde(default)]
    pub members: Vec<String>,
    #[serde(default)]
    pub counts: IndexMap<String, usize>,
}

impl<T: Scalar> HyperBlock<T> {
    pub fn to_json(&self, points: &Points<T>) -> HyperBlockJson {
        HyperBlockJson {
            label: points.class_labels[self.label].clone(),
            bounds: self
                .active
                .iter()
                .zip(&self.bounds)
                .map(|(&c, iv)| {
                    (
                        points.coordinate_names[c].clone(),
                        Interval {
                            lo: iv.lo.as_f64(),
                            hi: iv.hi.as_f64(),
                            lo_open: iv.lo_open,
                            hi_open: iv.hi_open,
                        },
                    )
                })
                .collect(),
            members: self
                .members
                .iter()
                .map(|&m| points.ids[m].clone())
                .collect(),
            counts: points
                .class_labels
                .iter()
                .cloned()
                .zip(self.counts.iter().copied())
                .collect(),
        }
    }

    /// Rebuild from the wire form; members are rescanned from `points`.
    pub fn from_json(j: &HyperBlockJson, points: &Points<T>) -> Result<Self> {
        let mut active = Vec::new();
        let mut bounds = Vec::new();
        for (name, iv) in &j.bounds {
            let c = points
                .coordinate_names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::UnknownCoordinate(name.clone()))?;
            active.push(c);
            bounds.push(Interval {
                lo: T::of(iv.lo),
                hi: T::of(iv.hi),
                lo_open: iv.lo_open,
                hi_open: iv.hi_open,
            });
        }
        let mut hb = HyperBlock::from_bounds(active, bounds, points);
        if hb.members.is_empty() {
            hb.label = points
                .class_labels
                .iter()
                .position(|l| *l == j.label)
                .ok_or_else(|| Error::UnknownLabel(j.label.clone()))?;
        }
        Ok(hb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(rows: Vec<Vec<f64>>, labels: Vec<usize>) -> Points<f64> {
        let dim = rows[0].len();
        Points::new(dim, rows, labels, vec!["B".into(), "M".into()]).with_tie_class(Some(1))
    }

    #[test]
    fn center_and_face_membership() {
        let p = pts(vec![vec![0.4, 0.4, 0.4]], vec![0]);
        let hb = HyperBlock::closed(&[0.2; 3], &[0.6; 3], &p);
        assert!(hb.contains(&[0.4, 0.4, 0.4]));
        assert!(hb.contains(&[0.6, 0.4, 0.4]));
        assert!(!hb.contains(&[0.61, 0.4, 0.4]));
        assert!(hb.center().iter().all(|c| (c - 0.4).abs() < 1e-12));
    }

    #[test]
    fn strict_edges_from_branch_intervals() {
        let p = pts(vec![vec![6.0, 4.0, 3.0]], vec![0]);
        let open = |lo, hi| Interval {
            lo,
            hi,
            lo_open: true,
            hi_open: true,
        };
        let hb = HyperBlock::from_bounds(
            vec![0, 1, 2],
            vec![open(5.0, 7.0), open(3.0, 6.0), open(2.0, 4.0)],
            &p,
        );
        assert!(hb.contains(&[6.0, 4.0, 3.0]));
        assert!(!hb.contains(&[5.0, 4.0, 3.0]));
    }

    #[test]
    fn not_evaluable_on_missing() {
        let p = pts(vec![vec![0.1, 0.1]], vec![0]);
        let hb = HyperBlock::closed(&[0.0, 0.0], &[1.0, 1.0], &p);
        assert_eq!(hb.membership(&[Some(0.5), None]), Membership::NotEvaluable);
        assert_eq!(hb.membership(&[Some(0.5), Some(0.5)]), Membership::Inside);
    }

    #[test]
    fn seed_zero_and_clipping() {
        let p = pts(
            vec![vec![0.1, 0.5], vec![0.1, 0.5], vec![0.2, 0.5]],
            vec![0, 0, 1],
        );
        let hb = seed_hb(&p, 0, 0.0);
        assert_eq!(hb.members, vec![0, 1]);
        let hb = seed_hb(&p, 0, 0.2);
        assert_eq!(hb.bounds[0].lo, 0.0);
        assert!((hb.bounds[0].hi - 0.3).abs() < 1e-12);
        assert_eq!(hb.members, vec![0, 1, 2]);
    }

    #[test]
    fn envelope_min_max_and_idempotent() {
        let p = pts(
            vec![vec![0.1, 0.2], vec![0.3, 0.1], vec![0.2, 0.15]],
            vec![0, 0, 1],
        );
        let a = seed_hb(&p, 0, 0.0);
        let b = seed_hb(&p, 1, 0.0);
        let e = envelope(&a, &b, &p).unwrap();
        assert_eq!((e.bounds[0].lo, e.bounds[0].hi), (0.1, 0.3));
        assert_eq!((e.bounds[1].lo, e.bounds[1].hi), (0.1, 0.2));
        assert_eq!(e.members, vec![0, 1, 2]);
        assert_eq!(envelope(&a, &a, &p).unwrap(), a);
    }

    #[test]
    fn envelope_mismatch_rejected() {
        let p = pts(vec![vec![0.1, 0.2]], vec![0]);
        let a = HyperBlock::from_bounds(vec![0], vec![Interval::closed(0.0, 1.0)], &p);
        let b = HyperBlock::from_bounds(vec![1], vec![Interval::closed(0.0, 1.0)], &p);
        assert_eq!(envelope(&a, &b, &p), Err(Error::CoordinateMismatch));
    }

    #[test]
    fn impurity_values() {
        assert!((impurity_of(&[25, 226]).unwrap() - 25.0 / 251.0).abs() < 1e-12);
        assert!((impurity_of(&[25, 226]).unwrap() - 0.0996).abs() < 1e-4);
        assert_eq!(impurity_of(&[0, 53]).unwrap(), 0.0);
        assert_eq!(impurity_of(&[1, 1]).unwrap(), 0.5);
        assert_eq!(impurity_of(&[0, 0]), Err(Error::EmptyBlock));
    }

    #[test]
    fn tie_goes_to_high_risk() {
        let p = pts(vec![vec![0.5], vec![0.5]], vec![0, 1]);
        let hb = seed_hb(&p, 0, 0.0);
        assert_eq!(hb.counts, vec![1, 1]);
        assert_eq!(hb.label, 1);
    }

    #[test]
    fn distance_variants() {
        let p = pts(vec![vec![0.2, 0.2], vec![0.4, 0.6]], vec![0, 0]);
        let hb = HyperBlock::closed(&[0.2, 0.2], &[0.4, 0.6], &p);
        let c = [0.3, 0.4];
        assert!(distance(&c, &hb, Distance::N1, &p).unwrap() < 1e-12);
        let single = seed_hb(&p, 1, 0.0);
        let x = [0.0, 0.0];
        let d1 = distance(&x, &single, Distance::N1, &p).unwrap();
        let d2 = distance(&x, &single, Distance::N2, &p).unwrap();
        let d3 = distance(&x, &single, Distance::N3, &p).unwrap();
        let expect = (0.4f64 * 0.4 + 0.6 * 0.6).sqrt();
        for d in [d1, d2, d3] {
            assert!((d - expect).abs() < 1e-12);
        }
        let empty = HyperBlock::closed(&[0.9, 0.9], &[1.0, 1.0], &p);
        assert_eq!(
            distance(&x, &empty, Distance::N2, &p),
            Err(Error::EmptyBlock)
        );
        assert_eq!(
            distance(&x, &empty, Distance::N3, &p),
            Err(Error::EmptyBlock)
        );
    }

    #[test]
    fn combination_modes() {
        let p = pts(vec![vec![0.5, 0.5]], vec![0]);
        let sq = |x0, x1, y0, y1| HyperBlock::closed(&[x0, y0], &[x1, y1], &p);
        let a = sq(0.0, 0.5, 0.0, 0.5);
        assert!(combine_check(&a, &a, CombineMode::M1Overlap).holds);
        assert!(!combine_check(&a, &a, CombineMode::M3MatchedEdges).holds);

        let corner = sq(0.5, 1.0, 0.5, 1.0);
        assert!(combine_check(&a, &corner, CombineMode::M1Overlap).holds);
        assert!(!combine_check(&a, &corner, CombineMode::M3MatchedEdges).holds);

        let edge = sq(0.5, 1.0, 0.0, 0.5);
        assert!(combine_check(&a, &edge, CombineMode::M3MatchedEdges).holds);

        let m2 = combine_check(&a, &corner, CombineMode::M2SharedPoint);
        assert!(m2.holds);
        assert_eq!(m2.witness, Some(0));
        let far = sq(0.8, 1.0, 0.8, 1.0);
        let m2 = combine_check(&a, &far, CombineMode::M2SharedPoint);
        assert!(!m2.holds);
        assert_eq!(m2.witness, None);
    }

    #[test]
    fn adjacency_threshold() {
        let p = pts(vec![vec![0.1]], vec![0]);
        let a = HyperBlock::closed(&[0.0], &[0.2], &p);
        let b = HyperBlock::closed(&[0.1], &[0.3], &p);
        assert!(adjacency(&a, &a, 0.0));
        assert!(adjacency(&a, &b, 0.1 + 1e-12));
        assert!((adjacency_score(&a, &b) - 0.1).abs() < 1e-12);
        assert!(!adjacency(&a, &b, 0.05));
    }

    #[test]
    fn nonoverlap() {
        let p = pts(vec![vec![0.1, 0.1]], vec![0]);
        let a = HyperBlock::closed(&[0.0, 0.0], &[0.2, 0.2], &p);
        let b = HyperBlock::closed(&[0.5, 0.5], &[0.7, 0.7], &p);
        assert_eq!(nonoverlap_coordinates(&a, &b), vec![0, 1]);
        let big = HyperBlock::closed(&[0.0, 0.0], &[1.0, 1.0], &p);
        assert!(nonoverlap_coordinates(&a, &big).is_empty());
    }

    #[test]
    fn unique_grouping() {
        let p = pts(vec![vec![0.1], vec![0.12]], vec![0, 1]);
        let blocks = vec![
            HyperBlock::closed(&[0.0], &[0.2], &p),
            HyperBlock::closed(&[0.0], &[0.2], &p),
            HyperBlock::closed(&[0.5], &[0.6], &p),
        ];
        let s = unique_blocks(&blocks, 0.0);
        assert_eq!(s.unique, 2);
        assert_eq!(s.mixed, 1);
        assert_eq!(s.representative, vec![0, 0, 2]);
    }

    #[test]
    fn json_roundtrip() {
        let p = pts(vec![vec![0.1, 0.2], vec![0.9, 0.9]], vec![0, 1]);
        let hb = HyperBlock::closed(&[0.0, 0.0], &[0.5, 0.5], &p);
        let j = hb.to_json(&p);
        let text = serde_json::to_string(&j).unwrap();
        assert_eq!(
            text,
            r#"{"label":"B","bounds":{"X1":{"lo":0.0,"hi":0.5,"lo_open":false,"hi_open":false},"X2":{"lo":0.0,"hi":0.5,"lo_open":false,"hi_open":false}},"members":["0"],"counts":{"B":1,"M":0}}"#
        );
        assert_eq!(HyperBlock::from_json(&j, &p).unwrap(), hb);
    }
}
