//! Tabular input with verbatim missing-value tokens, and unit-hypercube
//! normalization.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Token recorded for cells that are empty in the source.
pub const EMPTY_TOKEN: &str = "Empty";

/// One attribute value of a case. A cell that does not parse as a number is
/// kept as its source text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Value { v: f64 },
    Missing { missing: String },
}

impl Cell {
    pub fn value(&self) -> Option<f64> {
        match self {
            Cell::Value { v } => Some(*v),
            Cell::Missing { .. } => None,
        }
    }

    pub fn missing_token(&self) -> Option<&str> {
        match self {
            Cell::Value { .. } => None,
            Cell::Missing { missing } => Some(missing),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub id: String,
    #[serde(rename = "class")]
    pub class: String,
    pub cells: Vec<Cell>,
}

impl Case {
    pub fn is_complete(&self) -> bool {
        self.cells.iter().all(|c| c.value().is_some())
    }
}

/// Column selector for the class and id columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRef {
    Name(String),
    Index(usize),
    Last,
}

impl ColumnRef {
    fn resolve(&self, header: &[String]) -> Result<usize> {
        match self {
            ColumnRef::Last if !header.is_empty() => Ok(header.len() - 1),
            ColumnRef::Last => Err(Error::ColumnNotFound("last".into())),
            ColumnRef::Index(i) if *i < header.len() => Ok(*i),
            ColumnRef::Index(i) => Err(Error::ColumnNotFound(i.to_string())),
            ColumnRef::Name(n) => header
                .iter()
                .position(|h| h == n)
                .ok_or_else(|| Error::ColumnNotFound(n.clone())),
        }
    }
}

impl std::str::FromStr for ColumnRef {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "last" => ColumnRef::Last,
            _ => match s.parse::<usize>() {
                Ok(i) => ColumnRef::Index(i),
                Err(_) => ColumnRef::Name(s.to_string()),
            },
        })
    }
}

#[derive(Debug, Clone)]
pub struct ParseOptions {
    pub class_column: ColumnRef,
    /// `None` uses a header column named `id` when there is one, else the
    /// row index.
    pub id_column: Option<ColumnRef>,
    /// Tokens treated as missing even when they would parse as numbers.
    /// Anything non-numeric is missing regardless.
    pub missing_tokens: Option<Vec<String>>,
    /// `None` auto-detects among comma, tab and semicolon.
    pub delimiter: Option<u8>,
    pub has_header: bool,
    /// Class used to break label ties ("high-risk" class).
    pub high_risk_class: Option<String>,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            class_column: ColumnRef::Last,
            id_column: None,
            missing_tokens: None,
            delimiter: None,
            has_header: true,
            high_risk_class: None,
        }
    }
}

/// Labeled n-D cases as read from the source table.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub coordinate_names: Vec<String>,
    pub cases: Vec<Case>,
    pub class_labels: Vec<String>,
    /// (min, max) over present values; `None` when a coordinate has none.
    pub raw_ranges: Vec<Option<(f64, f64)>>,
    pub high_risk_class: Option<usize>,
}

fn detect_delimiter(text: &str) -> u8 {
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    b",\t;"
        .iter()
        .copied()
        .max_by_key(|d| (first.bytes().filter(|b| b == d).count(), *d == b','))
        .unwrap_or(b',')
}

/// Parse delimiter-separated text into a [`Dataset`].
pub fn parse_table(text: &str, options: &ParseOptions) -> Result<Dataset> {
    let delimiter = options.delimiter.unwrap_or_else(|| detect_delimiter(text));
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());

    let mut rows: Vec<Vec<String>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Malformed(e.to_string()))?;
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        rows.push(record.iter().map(|f| f.trim().to_string()).collect());
    }
    if rows.is_empty() {
        return Err(Error::NoRows);
    }
    let header: Vec<String> = if options.has_header {
        rows.remove(0)
    } else {
        (1..=rows[0].len()).map(|i| format!("X{i}")).collect()
    };
    if rows.is_empty() {
        return Err(Error::NoRows);
    }

    let class_col = options.class_column.resolve(&header)?;
    let id_col = match &options.id_column {
        Some(c) => Some(c.resolve(&header)?),
        None if options.has_header => header
            .iter()
            .position(|h| h.eq_ignore_ascii_case("id"))
            .filter(|&c| c != class_col),
        None => None,
    };
    let attr_cols: Vec<usize> = (0..header.len())
        .filter(|&c| c != class_col && Some(c) != id_col)
        .collect();
    let forced: HashSet<&str> = options
        .missing_tokens
        .iter()
        .flatten()
        .map(String::as_str)
        .collect();

    let mut cases = Vec::with_capacity(rows.len());
    let mut class_labels: Vec<String> = Vec::new();
    for (r, row) in rows.iter().enumerate() {
        if row.len() != header.len() {
            return Err(Error::RowLength {
                row: r,
                expected: header.len(),
                found: row.len(),
            });
        }
        let class = row[class_col].clone();
        if !class_labels.contains(&class) {
            class_labels.push(class.clone());
        }
        let id = id_col.map_or_else(|| r.to_string(), |c| row[c].clone());
        let cells = attr_cols
            .iter()
            .map(|&c| parse_cell(&row[c], &forced))
            .collect();
        cases.push(Case { id, class, cells });
    }

    sort_labels(&mut class_labels);
    let coordinate_names = attr_cols.iter().map(|&c| header[c].clone()).collect();
    let mut d = Dataset::from_parts(coordinate_names, cases, class_labels)?;
    if let Some(hr) = &options.high_risk_class {
        d.set_high_risk(hr)?;
    }
    Ok(d)
}

/// Numeric order when every label is a number, else lexicographic.
fn sort_labels(labels: &mut [String]) {
    let numeric: Option<Vec<f64>> = labels.iter().map(|l| l.parse().ok()).collect();
    match numeric {
        Some(_) => labels.sort_by(|a, b| {
            let (x, y): (f64, f64) = (a.parse().unwrap(), b.parse().unwrap());
            x.total_cmp(&y)
        }),
        None => labels.sort(),
    }
}

fn parse_cell(raw: &str, forced: &HashSet<&str>) -> Cell {
    if raw.is_empty() {
        return Cell::Missing {
            missing: EMPTY_TOKEN.to_string(),
        };
    }
    if forced.contains(raw) {
        return Cell::Missing {
            missing: raw.to_string(),
        };
    }
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Cell::Value { v },
        _ => Cell::Missing {
            missing: raw.to_string(),
        },
    }
}

#[derive(Serialize, Deserialize)]
struct DatasetJson {
    coordinates: Vec<String>,
    classes: Vec<String>,
    cases: Vec<Case>,
}

impl Dataset {
    pub fn from_parts(
        coordinate_names: Vec<String>,
        cases: Vec<Case>,
        class_labels: Vec<String>,
    ) -> Result<Self> {
        if cases.is_empty() {
            return Err(Error::NoRows);
        }
        let n = coordinate_names.len();
        for (r, case) in cases.iter().enumerate() {
            if case.cells.len() != n {
                return Err(Error::RowLength {
                    row: r,
                    expected: n,
                    found: case.cells.len(),
                });
            }
            if !class_labels.contains(&case.class) {
                return Err(Error::UnknownLabel(case.class.clone()));
            }
        }
        let raw_ranges = (0..n)
            .map(|c| {
                cases.iter().filter_map(|case| case.cells[c].value()).fold(
                    None,
                    |acc: Option<(f64, f64)>, v| match acc {
                        None => Some((v, v)),
                        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
                    },
                )
            })
            .collect();
        Ok(Dataset {
            coordinate_names,
            cases,
            class_labels,
            raw_ranges,
            high_risk_class: None,
        })
    }

    pub fn set_high_risk(&mut self, label: &str) -> Result<()> {
        self.high_risk_class = Some(self.class_index(label)?);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.coordinate_names.len()
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn class_index(&self, label: &str) -> Result<usize> {
        self.class_labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn coordinate_index(&self, name: &str) -> Result<usize> {
        self.coordinate_names
            .iter()
            .position(|n| n == name)
            .or_else(|| {
                self.coordinate_names
                    .iter()
                    .position(|n| n.eq_ignore_ascii_case(name))
            })
            .ok_or_else(|| Error::UnknownCoordinate(name.to_string()))
    }

    /// Indices of cases without missing cells.
    pub fn complete_indices(&self) -> Vec<usize> {
        (0..self.cases.len())
            .filter(|&i| self.cases[i].is_complete())
            .collect()
    }

    /// Class index per case.
    pub fn labels(&self) -> Vec<usize> {
        self.cases
            .iter()
            .map(|c| {
                self.class_labels
                    .iter()
                    .position(|l| *l == c.class)
                    .expect("validated at construction")
            })
            .collect()
    }

    /// True when every present value of the coordinate is an integer.
    pub fn is_integer_valued(&self, coordinate: usize) -> bool {
        self.cases
            .iter()
            .filter_map(|c| c.cells[coordinate].value())
            .all(|v| v.fract() == 0.0)
    }

    /// Distinct missing tokens in order of first appearance.
    pub fn missing_tokens(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for case in &self.cases {
            for cell in &case.cells {
                if let Some(t) = cell.missing_token() {
                    if !out.iter().any(|o| o == t) {
                        out.push(t.to_string());
                    }
                }
            }
        }
        out
    }

    /// Keep only the listed cases, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let cases = indices.iter().map(|&i| self.cases[i].clone()).collect();
        let mut d = Dataset::from_parts(
            self.coordinate_names.clone(),
            cases,
            self.class_labels.clone(),
        )?;
        d.high_risk_class = self.high_risk_class;
        Ok(d)
    }

    pub fn to_json(&self) -> String {
        let j = DatasetJson {
            coordinates: self.coordinate_names.clone(),
            classes: self.class_labels.clone(),
            cases: self.cases.clone(),
        };
        serde_json::to_string(&j).expect("dataset serializes")
    }

    pub fn from_json(text: &str) -> Result<Dataset> {
        let j: DatasetJson = serde_json::from_str(text)?;
        Dataset::from_parts(j.coordinates, j.cases, j.classes)
    }

    /// Write back as delimiter-separated text with an `id` column first and
    /// `class` last. Missing cells are written as their token, except
    /// `Empty`, which is written as an empty field.
    pub fn to_csv(&self, delimiter: u8) -> String {
        let mut w = csv::WriterBuilder::new()
            .delimiter(delimiter)
            .from_writer(Vec::new());
        let mut header = vec!["id".to_string()];
        header.extend(self.coordinate_names.iter().cloned());
        header.push("class".to_string());
        w.write_record(&header).expect("in-memory write");
        for case in &self.cases {
            let mut row = vec![case.id.clone()];
            row.extend(case.cells.iter().map(|c| match c {
                Cell::Value { v } => format!("{v}"),
                Cell::Missing { missing } if missing == EMPTY_TOKEN => String::new(),
                Cell::Missing { missing } => missing.clone(),
            }));
            row.push(case.class.clone());
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }
}

/// Per-coordinate min-max map onto [0, 1]. A constant coordinate maps to 0.5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisTransform {
    pub min: f64,
    pub max: f64,
}

impl AxisTransform {
    pub fn scale(&self) -> f64 {
        if self.max > self.min {
            1.0 / (self.max - self.min)
        } else {
            0.0
        }
    }

    pub fn offset(&self) -> f64 {
        self.min
    }

    pub fn forward(&self, raw: f64) -> f64 {
        if self.max > self.min {
            (raw - self.min) / (self.max - self.min)
        } else {
            0.5
        }
    }

    pub fn inverse(&self, normalized: f64) -> f64 {
        if self.max > self.min {
            self.min + normalized * (self.max - self.min)
        } else {
            self.min
        }
    }
}

/// A dataset mapped into the unit hypercube. Missing cells stay missing.
#[derive(Debug, Clone)]
pub struct NormalizedDataset<T> {
    pub base: Dataset,
    pub values: Vec<Vec<Option<T>>>,
    pub transform: Vec<AxisTransform>,
}

pub fn normalize<T: Scalar>(d: &Dataset) -> Result<NormalizedDataset<T>> {
    let transform = d
        .raw_ranges
        .iter()
        .zip(&d.coordinate_names)
        .map(|(r, name)| match r {
            Some((min, max)) => Ok(AxisTransform {
                min: *min,
                max: *max,
            }),
            None => Err(Error::EmptyCoordinate(name.clone())),
        })
        .collect::<Result<Vec<_>>>()?;
    let values = d
        .cases
        .iter()
        .map(|case| {
            case.cells
                .iter()
                .zip(&transform)
                .map(|(cell, t)| cell.value().map(|v| T::of(t.forward(v))))
                .collect()
        })
        .collect();
    Ok(NormalizedDataset {
        base: d.clone(),
        values,
        transform,
    })
}

impl<T: Scalar> NormalizedDataset<T> {
    pub fn dim(&self) -> usize {
        self.transform.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Recover the raw value of a normalized coordinate value.
    pub fn denormalize(&self, coordinate: usize, v: T) -> f64 {
        self.transform[coordinate].inverse(v.as_f64())
    }

    /// Normalize a raw point with this dataset's transform.
    pub fn normalize_point(&self, raw: &[f64]) -> Vec<T> {
        raw.iter()
            .zip(&self.transform)
            .map(|(v, t)| T::of(t.forward(*v)))
            .collect()
    }

    /// Complete cases among `indices`, as a labeled point set.
    pub fn points(&self, indices: &[usize]) -> crate::points::Points<T> {
        crate::points::Points::from_normalized(self, indices)
    }

    /// All complete cases.
    pub fn complete_points(&self) -> crate::points::Points<T> {
        let idx = self.base.complete_indices();
        self.points(&idx)
    }
}
