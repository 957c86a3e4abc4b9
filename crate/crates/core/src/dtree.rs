//! Decision-tree branches as hyperblocks and back.
//!
//! A branch is a conjunction of threshold tests ending in a class. Over a
//! bounded domain each branch is exactly one hyperblock whose interval
//! endpoints keep the strict/inclusive sense of the comparators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperblock::{HyperBlock, Interval};
use crate::points::Points;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl Comparator {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "<" => Some(Comparator::Lt),
            "<=" | "≤" => Some(Comparator::Le),
            ">" => Some(Comparator::Gt),
            ">=" | "≥" => Some(Comparator::Ge),
            _ => None,
        }
    }

    fn is_lower(self) -> bool {
        matches!(self, Comparator::Gt | Comparator::Ge)
    }

    fn is_strict(self) -> bool {
        matches!(self, Comparator::Lt | Comparator::Gt)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conjunct {
    pub coordinate: usize,
    pub op: Comparator,
    pub threshold: f64,
}

impl Conjunct {
    pub fn holds(&self, v: f64) -> bool {
        match self.op {
            Comparator::Lt => v < self.threshold,
            Comparator::Le => v <= self.threshold,
            Comparator::Gt => v > self.threshold,
            Comparator::Ge => v >= self.threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DTBranch {
    pub conjuncts: Vec<Conjunct>,
    #[serde(rename = "class")]
    pub predicted_class: String,
}

impl DTBranch {
    pub fn holds(&self, x: &[f64]) -> bool {
        self.conjuncts.iter().all(|c| c.holds(x[c.coordinate]))
    }

    /// Keep only the tightest lower and upper test per coordinate, ordered
    /// by coordinate then lower before upper.
    pub fn canonical(&self) -> DTBranch {
        let mut coords: Vec<usize> = self.conjuncts.iter().map(|c| c.coordinate).collect();
        coords.sort_unstable();
        coords.dedup();
        let mut out = Vec::new();
        for c in coords {
            let tightest = |lower: bool| {
                self.conjuncts
                    .iter()
                    .filter(|k| k.coordinate == c && k.op.is_lower() == lower)
                    .cloned()
                    .reduce(|a, b| {
                        let tighter = if lower {
                            b.threshold > a.threshold
                                || (b.threshold == a.threshold && b.op.is_strict())
                        } else {
                            b.threshold < a.threshold
                                || (b.threshold == a.threshold && b.op.is_strict())
                        };
                        if tighter {
                            b
                        } else {
                            a
                        }
                    })
            };
            out.extend(tightest(true));
            out.extend(tightest(false));
        }
        DTBranch {
            conjuncts: out,
            predicted_class: self.predicted_class.clone(),
        }
    }

    /// Values needed to store the branch: threshold and direction per
    /// conjunct plus one for the leaf class.
    pub fn stored_values(&self) -> usize {
        2 * self.canonical().conjuncts.len() + 1
    }

    /// Apply a monotone per-coordinate map (e.g. normalization) to thresholds.
    pub fn map_thresholds(&self, f: impl Fn(usize, f64) -> f64) -> DTBranch {
        DTBranch {
            conjuncts: self
                .conjuncts
                .iter()
                .map(|c| Conjunct {
                    threshold: f(c.coordinate, c.threshold),
                    ..c.clone()
                })
                .collect(),
            predicted_class: self.predicted_class.clone(),
        }
    }
}

/// Intervals of a branch over `domain`; unconstrained coordinates span
/// the full domain.
pub fn branch_intervals(branch: &DTBranch, domain: &[(f64, f64)]) -> Result<Vec<Interval<f64>>> {
    let mut ivs: Vec<Interval<f64>> = domain
        .iter()
        .map(|&(lo, hi)| Interval::closed(lo, hi))
        .collect();
    for k in &branch.canonical().conjuncts {
        let iv = ivs
            .get_mut(k.coordinate)
            .ok_or_else(|| Error::UnknownCoordinate(format!("x{}", k.coordinate + 1)))?;
        if k.op.is_lower() {
            if k.threshold > iv.lo || (k.threshold == iv.lo && k.op.is_strict()) {
                iv.lo = k.threshold;
                iv.lo_open = k.op.is_strict();
            }
        } else if k.threshold < iv.hi || (k.threshold == iv.hi && k.op.is_strict()) {
            iv.hi = k.threshold;
            iv.hi_open = k.op.is_strict();
        }
        if iv.is_empty() {
            return Err(Error::ContradictoryBranch(format!("x{}", k.coordinate + 1)));
        }
    }
    Ok(ivs)
}

/// Hyperblock equivalent to the branch over `domain`. `points` must be in
/// the same units as the domain. The label is the branch class when it is
/// one of the point classes and the block is empty; otherwise the dominant
/// member class.
pub fn dt_branch_to_hb<T: Scalar>(
    branch: &DTBranch,
    domain: &[(f64, f64)],
    points: &Points<T>,
) -> Result<HyperBlock<T>> {
    let ivs = branch_intervals(branch, domain)?;
    let bounds = ivs
        .iter()
        .map(|iv| Interval {
            lo: T::of(iv.lo),
            hi: T::of(iv.hi),
            lo_open: iv.lo_open,
            hi_open: iv.hi_open,
        })
        .collect();
    let mut hb = HyperBlock::from_bounds((0..domain.len()).collect(), bounds, points);
    if hb.members.is_empty() {
        if let Some(i) = points
            .class_labels
            .iter()
            .position(|l| *l == branch.predicted_class)
        {
            hb.label = i;
        }
    }
    Ok(hb)
}

/// Branch equivalent to the block over `domain`, omitting tests that sit
/// on a closed domain edge.
pub fn hb_to_dt_branch<T: Scalar>(
    hb: &HyperBlock<T>,
    domain: &[(f64, f64)],
    class_labels: &[String],
) -> DTBranch {
    let mut conjuncts = Vec::new();
    for (&c, iv) in hb.active.iter().zip(&hb.bounds) {
        let (dlo, dhi) = domain[c];
        let (lo, hi) = (iv.lo.as_f64(), iv.hi.as_f64());
        if lo > dlo || iv.lo_open {
            conjuncts.push(Conjunct {
                coordinate: c,
                op: if iv.lo_open {
                    Comparator::Gt
                } else {
                    Comparator::Ge
                },
                threshold: lo,
            });
        }
        if hi < dhi || iv.hi_open {
            conjuncts.push(Conjunct {
                coordinate: c,
                op: if iv.hi_open {
                    Comparator::Lt
                } else {
                    Comparator::Le
                },
                threshold: hi,
            });
        }
    }
    DTBranch {
        conjuncts,
        predicted_class: class_labels.get(hb.label).cloned().unwrap_or_default(),
    }
}

/// Map a coordinate name to an index: exact or case-insensitive match in
/// `names`, else the `x<N>` convention (1-based).
pub fn resolve_coordinate(name: &str, names: &[String]) -> Result<usize> {
    if let Some(i) = names.iter().position(|n| n == name) {
        return Ok(i);
    }
    if let Some(i) = names.iter().position(|n| n.eq_ignore_ascii_case(name)) {
        return Ok(i);
    }
    let lower = name.to_ascii_lowercase();
    if let Some(num) = lower.strip_prefix('x') {
        if let Ok(n) = num.parse::<usize>() {
            if n >= 1 && (names.is_empty() || n <= names.len()) {
                return Ok(n - 1);
            }
        }
    }
    Err(Error::UnknownCoordinate(name.to_string()))
}

/// Parse the indented text export of a tree:
///
/// ```text
/// |--- x2 <= 2.50
/// |   |--- class: 2
/// |--- x2 >  2.50
/// |   |--- class: 4
/// ```
///
/// Each `class:` leaf yields one branch made of the tests on its path.
pub fn parse_tree_text(text: &str, names: &[String]) -> Result<Vec<DTBranch>> {
    let mut path: Vec<Conjunct> = Vec::new();
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let marker = line
            .find("---")
            .ok_or_else(|| Error::Malformed(format!("line {}: no `---` marker", ln + 1)))?;
        let prefix = &line[..marker];
        if !prefix.chars().all(|c| c == '|' || c == ' ') {
            return Err(Error::Malformed(format!(
                "line {}: bad indentation",
                ln + 1
            )));
        }
        // "|--- " is depth 0; each "|   " adds one level.
        let depth = prefix.chars().count() / 4;
        let body = line[marker + 3..].trim();
        if let Some(class) = body.strip_prefix("class:") {
            if depth > path.len() {
                return Err(Error::Malformed(format!(
                    "line {}: leaf deeper than path",
                    ln + 1
                )));
            }
            out.push(DTBranch {
                conjuncts: path[..depth].to_vec(),
                predicted_class: class.trim().to_string(),
            });
            continue;
        }
        if body.starts_with("weights:") {
            continue;
        }
        let mut parts = body.split_whitespace();
        let (name, op, thr) = match (parts.next(), parts.next(), parts.next()) {
            (Some(n), Some(o), Some(t)) => (n, o, t),
            _ => return Err(Error::Malformed(format!("line {}: `{body}`", ln + 1))),
        };
        let op = Comparator::parse(op)
            .ok_or_else(|| Error::Malformed(format!("line {}: comparator `{op}`", ln + 1)))?;
        let threshold: f64 = thr
            .parse()
            .map_err(|_| Error::Malformed(format!("line {}: threshold `{thr}`", ln + 1)))?;
        if depth > path.len() {
            return Err(Error::Malformed(format!(
                "line {}: skipped a level",
                ln + 1
            )));
        }
        path.truncate(depth);
        path.push(Conjunct {
            coordinate: resolve_coordinate(name, names)?,
            op,
            threshold,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ConjunctJson {
    coordinate: String,
    op: Comparator,
    threshold: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BranchJson {
    conjuncts: Vec<ConjunctJson>,
    #[serde(rename = "class")]
    class: String,
}

/// JSON list form: `[{"conjuncts":[{"coordinate":"x2","op":"<=","threshold":2.5}],"class":"2"}]`.
pub fn parse_tree_json(text: &str, names: &[String]) -> Result<Vec<DTBranch>> {
    let list: Vec<BranchJson> = serde_json::from_str(text)?;
    list.into_iter()
        .map(|b| {
            Ok(DTBranch {
                conjuncts: b
                    .conjuncts
                    .into_iter()
                    .map(|c| {
                        Ok(Conjunct {
                            coordinate: resolve_coordinate(&c.coordinate, names)?,
                            op: c.op,
                            threshold: c.threshold,
                        })
                    })
                    .collect::<Result<_>>()?,
                predicted_class: b.class,
            })
        })
        .collect()
}

pub fn tree_to_json(branches: &[DTBranch], names: &[String]) -> String {
    let list: Vec<BranchJson> = branches
        .iter()
        .map(|b| BranchJson {
            conjuncts: b
                .conjuncts
                .iter()
                .map(|c| ConjunctJson {
                    coordinate: names
                        .get(c.coordinate)
                        .cloned()
                        .unwrap_or_else(|| format!("x{}", c.coordinate + 1)),
                    op: c.op,
                    threshold: c.threshold,
                })
                .collect(),
            class: b.predicted_class.clone(),
        })
        .collect();
    serde_json::to_string(&list).expect("branches serialize")
}
