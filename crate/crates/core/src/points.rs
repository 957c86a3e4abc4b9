use crate::dataset::NormalizedDataset;
use crate::scalar::Scalar;

/// Complete normalized cases with class indices, stored row-major.
///
/// Hyperblock member lists index rows of the `Points` they were built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Points<T> {
    dim: usize,
    values: Vec<T>,
    pub labels: Vec<usize>,
    pub ids: Vec<String>,
    /// Row → case index in the source dataset.
    pub case_index: Vec<usize>,
    pub class_labels: Vec<String>,
    pub coordinate_names: Vec<String>,
    /// Class chosen when label counts tie.
    pub tie_class: Option<usize>,
}

impl<T: Scalar> Points<T> {
    pub fn new(
        dim: usize,
        rows: Vec<Vec<T>>,
        labels: Vec<usize>,
        class_labels: Vec<String>,
    ) -> Self {
        assert_eq!(rows.len(), labels.len());
        let n = rows.len();
        let mut values = Vec::with_capacity(n * dim);
        for r in rows {
            assert_eq!(r.len(), dim, "row width");
            values.extend(r);
        }
        Points {
            dim,
            values,
            labels,
            ids: (0..n).map(|i| i.to_string()).collect(),
            case_index: (0..n).collect(),
            class_labels,
            coordinate_names: (1..=dim).map(|i| format!("X{i}")).collect(),
            tie_class: None,
        }
    }

    pub(crate) fn from_normalized(data: &NormalizedDataset<T>, indices: &[usize]) -> Self {
        let labels_all = data.base.labels();
        let dim = data.dim();
        let mut values = Vec::new();
        let mut labels = Vec::new();
        let mut ids = Vec::new();
        let mut case_index = Vec::new();
        for &i in indices {
            let row = &data.values[i];
            if row.iter().any(Option::is_none) {
                continue;
            }
            values.extend(row.iter().map(|v| v.expect("complete")));
            labels.push(labels_all[i]);
            ids.push(data.base.cases[i].id.clone());
            case_index.push(i);
        }
        Points {
            dim,
            values,
            labels,
            ids,
            case_index,
            class_labels: data.base.class_labels.clone(),
            coordinate_names: data.base.coordinate_names.clone(),
            tie_class: data.base.high_risk_class,
        }
    }

    pub fn with_tie_class(mut self, tie: Option<usize>) -> Self {
        self.tie_class = tie;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.class_labels.len()
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.values.chunks_exact(self.dim.max(1))
    }

    /// Subset by row positions, keeping order.
    pub fn select(&self, rows: &[usize]) -> Points<T> {
        let mut values = Vec::with_capacity(rows.len() * self.dim);
        for &r in rows {
            values.extend_from_slice(self.row(r));
        }
        Points {
            dim: self.dim,
            values,
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            ids: rows.iter().map(|&r| self.ids[r].clone()).collect(),
            case_index: rows.iter().map(|&r| self.case_index[r]).collect(),
            class_labels: self.class_labels.clone(),
            coordinate_names: self.coordinate_names.clone(),
            tie_class: self.tie_class,
        }
    }

    /// Dominant class of a count vector, breaking ties with `tie_class`
    /// and then by lowest class index.
    pub fn dominant(&self, counts: &[usize]) -> usize {
        dominant_label(counts, self.tie_class)
    }
}

pub fn dominant_label(counts: &[usize], tie_class: Option<usize>) -> usize {
    let max = counts.iter().copied().max().unwrap_or(0);
    if let Some(t) = tie_class {
        if counts.get(t) == Some(&max) {
            return t;
        }
    }
    counts.iter().position(|&c| c == max).unwrap_or(0)
}
