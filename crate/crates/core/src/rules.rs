//! Conjunctive threshold rules `x_i < T_i & x_j < T_j ... → A else B`, and
//! their greedy search.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConjunct {
    pub coordinate: usize,
    /// Raw units; the test is `x < threshold`.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRule {
    pub conjuncts: Vec<ThresholdConjunct>,
    pub then_class: usize,
    pub else_class: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConjunctJson {
    pub coordinate: String,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRuleJson {
    pub conjuncts: Vec<ThresholdConjunctJson>,
    pub then_class: String,
    pub else_class: String,
}

impl ThresholdRule {
    /// True when every conjunct holds. A rule with no conjuncts never fires,
    /// so it predicts `else_class` everywhere.
    pub fn holds(&self, x: &[f64]) -> bool {
        !self.conjuncts.is_empty() && self.conjuncts.iter().all(|c| x[c.coordinate] < c.threshold)
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        if self.holds(x) {
            self.then_class
        } else {
            self.else_class
        }
    }

    /// Human form, e.g. `X6 < 3 → B`. On integer-valued coordinates the
    /// threshold is shown as the equivalent integer bound. The else class
    /// is implied for two-class data and not shown.
    pub fn display(&self, data: &Dataset) -> String {
        let tests: Vec<String> = self
            .conjuncts
            .iter()
            .map(|c| {
                let t = if data.is_integer_valued(c.coordinate) {
                    c.threshold.ceil()
                } else {
                    c.threshold
                };
                format!("{} < {}", data.coordinate_names[c.coordinate], t)
            })
            .collect();
        let lhs = if tests.is_empty() {
            "true".to_string()
        } else {
            tests.join(" & ")
        };
        format!("{lhs} → {}", data.class_labels[self.then_class])
    }

    /// Parse `X6 < 3 & X8 < 4 → B` (or `->`). Without a class the first
    /// class is assumed. The else class is the other class of a two-class
    /// dataset.
    pub fn parse(text: &str, data: &Dataset) -> Result<Self> {
        if data.class_labels.len() != 2 {
            return Err(Error::NotBinary(data.class_labels.len()));
        }
        let (lhs, class) = match text.split_once('→').or_else(|| text.split_once("->")) {
            Some((l, c)) => (l, Some(c.trim())),
            None => (text, None),
        };
        let then_class = match class {
            Some(c) => data.class_index(c)?,
            None => 0,
        };
        let conjuncts = lhs
            .split('&')
            .map(|part| {
                let (name, t) = part.split_once('<').ok_or_else(|| {
                    Error::Malformed(format!("expected `name < threshold` in `{}`", part.trim()))
                })?;
                let threshold = t
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Malformed(format!("bad threshold `{}`", t.trim())))?;
                Ok(ThresholdConjunct {
                    coordinate: crate::dtree::resolve_coordinate(
                        name.trim(),
                        &data.coordinate_names,
                    )?,
                    threshold,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ThresholdRule {
            conjuncts,
            then_class,
            else_class: 1 - then_class,
        })
    }

    pub fn to_json(
        &self,
        coordinate_names: &[String],
        class_labels: &[String],
    ) -> ThresholdRuleJson {
        ThresholdRuleJson {
            conjuncts: self
                .conjuncts
                .iter()
                .map(|c| ThresholdConjunctJson {
                    coordinate: coordinate_names[c.coordinate].clone(),
                    threshold: c.threshold,
                })
                .collect(),
            then_class: class_labels[self.then_class].clone(),
            else_class: class_labels[self.else_class].clone(),
        }
    }

    pub fn from_json(
        j: &ThresholdRuleJson,
        coordinate_names: &[String],
        class_labels: &[String],
    ) -> Result<Self> {
        let class = |l: &str| {
            class_labels
                .iter()
                .position(|c| c == l)
                .ok_or_else(|| Error::UnknownLabel(l.to_string()))
        };
        Ok(ThresholdRule {
            conjuncts: j
                .conjuncts
                .iter()
                .map(|c| {
                    Ok(ThresholdConjunct {
                        coordinate: crate::dtree::resolve_coordinate(
                            &c.coordinate,
                            coordinate_names,
                        )?,
                        threshold: c.threshold,
                    })
                })
                .collect::<Result<_>>()?,
            then_class: class(&j.then_class)?,
            else_class: class(&j.else_class)?,
        })
    }
}

/// Rule outcome on a dataset's complete cases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleApplication {
    /// Predicted class index per complete case.
    pub predictions: Vec<usize>,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

fn complete_rows(data: &Dataset) -> (Vec<Vec<f64>>, Vec<usize>) {
    let labels = data.labels();
    let idx = data.complete_indices();
    let rows = idx
        .iter()
        .map(|&i| {
            data.cases[i]
                .cells
                .iter()
                .map(|c| c.value().expect("complete"))
                .collect()
        })
        .collect();
    (rows, idx.iter().map(|&i| labels[i]).collect())
}

pub fn apply_threshold_rule(rule: &ThresholdRule, data: &Dataset) -> RuleApplication {
    let (rows, labels) = complete_rows(data);
    let predictions: Vec<usize> = rows.iter().map(|x| rule.predict(x)).collect();
    let correct = predictions
        .iter()
        .zip(&labels)
        .filter(|(p, l)| p == l)
        .count();
    RuleApplication {
        correct,
        total: labels.len(),
        accuracy: correct as f64 / labels.len().max(1) as f64,
        predictions,
    }
}

/// Midpoints between consecutive distinct values.
fn midpoints(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    values.dedup();
    values.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect()
}

/// Greedy search for one class orientation. Returns the rule and the
/// correct count after each accepted step (index 0 is the empty rule).
fn greedy(
    rows: &[Vec<f64>],
    labels: &[usize],
    grids: &[(usize, Vec<f64>)],
    then_class: usize,
    else_class: usize,
    max_dims: usize,
) -> (ThresholdRule, Vec<usize>) {
    let mut rule = ThresholdRule {
        conjuncts: Vec::new(),
        then_class,
        else_class,
    };
    // Rows satisfying the conjuncts chosen so far (vacuously all).
    let mut pass = vec![true; rows.len()];
    let mut best = labels.iter().filter(|&&l| l == else_class).count();
    let mut history = vec![best];
    while rule.conjuncts.len() < max_dims {
        let mut pick: Option<(usize, usize, f64)> = None;
        for (c, grid) in grids {
            if rule.conjuncts.iter().any(|k| k.coordinate == *c) {
                continue;
            }
            for &t in grid {
                let correct = rows
                    .iter()
                    .zip(labels)
                    .zip(&pass)
                    .filter(|((x, &l), &p)| {
                        if p && x[*c] < t {
                            l == then_class
                        } else {
                            l == else_class
                        }
                    })
                    .count();
                if correct > pick.map_or(best, |p| p.0) {
                    pick = Some((correct, *c, t));
                }
            }
        }
        let Some((correct, c, t)) = pick else { break };
        for (p, x) in pass.iter_mut().zip(rows) {
            *p = *p && x[c] < t;
        }
        rule.conjuncts.push(ThresholdConjunct {
            coordinate: c,
            threshold: t,
        });
        best = correct;
        history.push(best);
    }
    (rule, history)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSearch {
    pub rule: ThresholdRule,
    /// Correct count after each accepted conjunct, starting with the
    /// empty rule.
    pub history: Vec<usize>,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

/// Greedy forward selection of `<` conjuncts maximizing training accuracy,
/// over the complete cases of a two-class dataset. Candidate thresholds are
/// midpoints of consecutive observed values; ties keep the first candidate
/// in coordinate order then ascending threshold. Both class orientations
/// are searched and the better kept (the first class wins ties).
/// `allowed` restricts the coordinates that may appear.
pub fn threshold_rule_search(
    data: &Dataset,
    max_dims: usize,
    allowed: Option<&[usize]>,
) -> Result<RuleSearch> {
    if data.class_labels.len() != 2 {
        return Err(Error::NotBinary(data.class_labels.len()));
    }
    let (rows, labels) = complete_rows(data);
    if rows.is_empty() {
        return Err(Error::NoRows);
    }
    let coords: Vec<usize> = match allowed {
        Some(a) => {
            if let Some(&bad) = a.iter().find(|&&c| c >= data.dim()) {
                return Err(Error::UnknownCoordinate(format!("#{bad}")));
            }
            (0..data.dim()).filter(|c| a.contains(c)).collect()
        }
        None => (0..data.dim()).collect(),
    };
    let grids: Vec<(usize, Vec<f64>)> = coords
        .into_iter()
        .map(|c| (c, midpoints(rows.iter().map(|x| x[c]).collect())))
        .collect();
    let (r0, h0) = greedy(&rows, &labels, &grids, 0, 1, max_dims);
    let (r1, h1) = greedy(&rows, &labels, &grids, 1, 0, max_dims);
    let (rule, history) = if h1.last() > h0.last() {
        (r1, h1)
    } else {
        (r0, h0)
    };
    let correct = *history.last().expect("non-empty");
    Ok(RuleSearch {
        rule,
        correct,
        total: rows.len(),
        accuracy: correct as f64 / rows.len() as f64,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Case, Cell};

    fn data(rows: &[(&[f64], &str)]) -> Dataset {
        let dim = rows[0].0.len();
        let cases = rows
            .iter()
            .enumerate()
            .map(|(i, (x, c))| Case {
                id: i.to_string(),
                class: c.to_string(),
                cells: x.iter().map(|&v| Cell::Value { v }).collect(),
            })
            .collect();
        Dataset::from_parts(
            (1..=dim).map(|i| format!("X{i}")).collect(),
            cases,
            vec!["B".into(), "M".into()],
        )
        .unwrap()
    }

    #[test]
    fn empty_rule_predicts_else() {
        let d = data(&[(&[1.0], "B"), (&[2.0], "M"), (&[3.0], "M")]);
        let rule = ThresholdRule {
            conjuncts: vec![],
            then_class: 0,
            else_class: 1,
        };
        let app = apply_threshold_rule(&rule, &d);
        assert_eq!(app.predictions, vec![1, 1, 1]);
        assert_eq!(app.correct, 2);
    }

    #[test]
    fn finds_separating_threshold() {
        let d = data(&[
            (&[1.0, 5.0], "B"),
            (&[2.0, 1.0], "B"),
            (&[3.0, 9.0], "M"),
            (&[4.0, 2.0], "M"),
        ]);
        let s = threshold_rule_search(&d, 2, None).unwrap();
        assert_eq!(s.correct, 4);
        assert_eq!(
            s.rule.conjuncts,
            vec![ThresholdConjunct {
                coordinate: 0,
                threshold: 2.5
            }]
        );
        assert_eq!(s.rule.display(&d), "X1 < 3 → B");
        assert_eq!(s.history, vec![2, 4]);
    }

    #[test]
    fn restricted_coordinates() {
        let d = data(&[
            (&[1.0, 5.0], "B"),
            (&[2.0, 1.0], "B"),
            (&[3.0, 9.0], "M"),
            (&[4.0, 2.0], "M"),
        ]);
        let s = threshold_rule_search(&d, 1, Some(&[1])).unwrap();
        assert!(s.rule.conjuncts.iter().all(|c| c.coordinate == 1));
        assert!(s.correct < 4);
    }

    #[test]
    fn parse_rule() {
        let d = data(&[(&[1.0, 5.0], "B"), (&[2.0, 1.0], "M")]);
        let r = ThresholdRule::parse("x2 < 3 & X1<1.5 -> M", &d).unwrap();
        assert_eq!(r.then_class, 1);
        assert_eq!(r.else_class, 0);
        assert_eq!(
            r.conjuncts,
            vec![
                ThresholdConjunct {
                    coordinate: 1,
                    threshold: 3.0
                },
                ThresholdConjunct {
                    coordinate: 0,
                    threshold: 1.5
                }
            ]
        );
        assert_eq!(ThresholdRule::parse("X1 < 2", &d).unwrap().then_class, 0);
        assert!(ThresholdRule::parse("X1 > 2", &d).is_err());
        assert!(ThresholdRule::parse("X7 < 2", &d).is_err());
    }

    #[test]
    fn rejects_non_binary() {
        let mut d = data(&[(&[1.0], "B"), (&[2.0], "M")]);
        d.class_labels.push("X".into());
        assert_eq!(threshold_rule_search(&d, 1, None), Err(Error::NotBinary(3)));
    }

    #[test]
    fn json_roundtrip() {
        let names = vec!["X1".to_string(), "X6".to_string()];
        let labels = vec!["B".to_string(), "M".to_string()];
        let r = ThresholdRule {
            conjuncts: vec![ThresholdConjunct {
                coordinate: 1,
                threshold: 2.5,
            }],
            then_class: 0,
            else_class: 1,
        };
        let j = r.to_json(&names, &labels);
        assert_eq!(
            serde_json::to_string(&j).unwrap(),
            r#"{"conjuncts":[{"coordinate":"X6","threshold":2.5}],"then_class":"B","else_class":"M"}"#
        );
        assert_eq!(ThresholdRule::from_json(&j, &names, &labels).unwrap(), r);
    }
}
