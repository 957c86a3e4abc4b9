//! Plain-language summaries of where data concentrates along each
//! coordinate, by thirds of the normalized range.

use serde::{Deserialize, Serialize};

use crate::points::Points;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Third {
    Lower,
    Middle,
    Upper,
}

impl Third {
    pub const ALL: [Third; 3] = [Third::Lower, Third::Middle, Third::Upper];

    /// [0, 1/3), [1/3, 2/3), [2/3, 1].
    pub fn of(v: f64) -> Third {
        if v < 1.0 / 3.0 {
            Third::Lower
        } else if v < 2.0 / 3.0 {
            Third::Middle
        } else {
            Third::Upper
        }
    }

    pub fn word(self) -> &'static str {
        match self {
            Third::Lower => "lower",
            Third::Middle => "middle",
            Third::Upper => "upper",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThirdsProfile {
    pub coordinate_names: Vec<String>,
    /// Fractions in the lower, middle and upper third per coordinate.
    pub fractions: Vec<[f64; 3]>,
    pub concentration: Vec<Option<Third>>,
    pub cutoff: f64,
}

impl ThirdsProfile {
    /// Coordinates concentrated in `third`, in coordinate order.
    pub fn group(&self, third: Third) -> Vec<&str> {
        self.concentration
            .iter()
            .zip(&self.coordinate_names)
            .filter(|(c, _)| **c == Some(third))
            .map(|(_, n)| n.as_str())
            .collect()
    }
}

/// Profile of normalized values given column-wise.
pub fn profile_columns(columns: &[Vec<f64>], names: &[String], cutoff: f64) -> ThirdsProfile {
    let mut fractions = Vec::with_capacity(columns.len());
    let mut concentration = Vec::with_capacity(columns.len());
    for col in columns {
        let mut counts = [0usize; 3];
        for &v in col {
            counts[Third::of(v) as usize] += 1;
        }
        let n = col.len().max(1) as f64;
        let f = counts.map(|c| c as f64 / n);
        // Highest fraction, lowest third on ties.
        let best = (0..3).fold(0, |b, i| if f[i] > f[b] { i } else { b });
        fractions.push(f);
        concentration.push((!col.is_empty() && f[best] >= cutoff).then_some(Third::ALL[best]));
    }
    ThirdsProfile {
        coordinate_names: names.to_vec(),
        fractions,
        concentration,
        cutoff,
    }
}

/// Profile of the given rows of a point set.
pub fn profile<T: Scalar>(points: &Points<T>, rows: &[usize], cutoff: f64) -> ThirdsProfile {
    let columns: Vec<Vec<f64>> = (0..points.dim())
        .map(|c| rows.iter().map(|&r| points.row(r)[c].as_f64()).collect())
        .collect();
    profile_columns(&columns, &points.coordinate_names, cutoff)
}

/// One profile per class, in class order.
pub fn class_profiles<T: Scalar>(points: &Points<T>, cutoff: f64) -> Vec<(String, ThirdsProfile)> {
    (0..points.n_classes())
        .map(|c| {
            let rows: Vec<usize> = (0..points.len())
                .filter(|&r| points.labels[r] == c)
                .collect();
            (
                points.class_labels[c].clone(),
                profile(points, &rows, cutoff),
            )
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Style {
    /// A header per profile and one line per third.
    Structured,
    /// One sentence per non-empty third.
    Sentence,
}

/// "X1", "X1, and X6", "X1, X2, and X3".
fn list(names: &[&str]) -> String {
    match names {
        [] => String::new(),
        [one] => one.to_string(),
        [head @ .., last] => format!("{}, and {last}", head.join(", ")),
    }
}

fn clause(names: &[&str], third: Third) -> String {
    if names.len() == 1 {
        format!(
            "the data in dimension {} is concentrated in the {} third",
            names[0],
            third.word()
        )
    } else {
        format!(
            "the data in dimensions {} are concentrated in the {} third",
            list(names),
            third.word()
        )
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next()
        .map(|f| f.to_uppercase().collect::<String>() + c.as_str())
        .unwrap_or_default()
}

/// Text for labelled profiles (one per class or block).
pub fn describe(profiles: &[(String, ThirdsProfile)], style: Style) -> String {
    let mut out = String::new();
    for (name, p) in profiles {
        match style {
            Style::Structured => {
                out.push_str(&format!("Class {name}\n"));
                for t in Third::ALL {
                    let g = p.group(t);
                    if g.is_empty() {
                        out.push_str(&format!(
                            "No dimensions have their data concentrated in the {} third.\n",
                            t.word()
                        ));
                    } else {
                        out.push_str(&capitalize(&clause(&g, t)));
                        out.push_str(".\n");
                    }
                }
            }
            Style::Sentence => {
                let mut any = false;
                for t in Third::ALL {
                    let g = p.group(t);
                    if !g.is_empty() {
                        out.push_str(&format!("For {name}, {}.\n", clause(&g, t)));
                        any = true;
                    }
                }
                if !any {
                    out.push_str(&format!(
                        "For {name}, no dimensions have their data concentrated in any third.\n"
                    ));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("X{i}")).collect()
    }

    #[test]
    fn all_high_is_upper() {
        let p = profile_columns(&[vec![0.9; 5]], &names(1), 0.5);
        assert_eq!(p.fractions[0], [0.0, 0.0, 1.0]);
        assert_eq!(p.concentration[0], Some(Third::Upper));
    }

    #[test]
    fn uniform_has_no_concentration() {
        let col: Vec<f64> = (0..99).map(|i| i as f64 / 98.0).collect();
        let p = profile_columns(&[col], &names(1), 0.5);
        assert_eq!(p.concentration[0], None);
        assert!((p.fractions[0].iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn boundaries() {
        assert_eq!(Third::of(1.0 / 3.0), Third::Middle);
        assert_eq!(Third::of(2.0 / 3.0), Third::Upper);
        assert_eq!(Third::of(1.0), Third::Upper);
        assert_eq!(Third::of(0.0), Third::Lower);
    }

    #[test]
    fn structured_template() {
        let mut conc = vec![Some(Third::Middle); 9];
        conc[0] = Some(Third::Upper);
        conc[5] = Some(Third::Upper);
        conc[8] = Some(Third::Lower);
        let benign = ThirdsProfile {
            coordinate_names: names(9),
            fractions: vec![[0.0, 1.0, 0.0]; 9],
            concentration: conc,
            cutoff: 0.5,
        };
        let malignant = ThirdsProfile {
            concentration: vec![Some(Third::Lower); 9],
            ..benign.clone()
        };
        let text = describe(
            &[("malignant".into(), malignant), ("benign".into(), benign)],
            Style::Structured,
        );
        assert_eq!(
            text,
            "Class malignant\n\
             The data in dimensions X1, X2, X3, X4, X5, X6, X7, X8, and X9 are concentrated in the lower third.\n\
             No dimensions have their data concentrated in the middle third.\n\
             No dimensions have their data concentrated in the upper third.\n\
             Class benign\n\
             The data in dimension X9 is concentrated in the lower third.\n\
             The data in dimensions X2, X3, X4, X5, X7, and X8 are concentrated in the middle third.\n\
             The data in dimensions X1, and X6 are concentrated in the upper third.\n"
        );
    }

    #[test]
    fn sentence_style() {
        let p = profile_columns(&[vec![0.1, 0.2], vec![0.5, 0.5]], &names(2), 0.5);
        assert_eq!(
            describe(&[("block 1".into(), p)], Style::Sentence),
            "For block 1, the data in dimension X1 is concentrated in the lower third.\n\
             For block 1, the data in dimension X2 is concentrated in the middle third.\n"
        );
    }

    #[test]
    fn nothing_concentrated() {
        let p = ThirdsProfile {
            coordinate_names: names(2),
            fractions: vec![[0.4, 0.3, 0.3]; 2],
            concentration: vec![None; 2],
            cutoff: 0.5,
        };
        let text = describe(&[("A".into(), p)], Style::Structured);
        assert_eq!(
            text.lines()
                .filter(|l| l.starts_with("No dimensions"))
                .count(),
            3
        );
    }
}
