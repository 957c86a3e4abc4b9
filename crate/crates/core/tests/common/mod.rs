#![allow(dead_code)]

use std::path::PathBuf;

use hyperview::{normalize, parse_table, Dataset, NormalizedDataset, ParseOptions, Points};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

pub fn wbc() -> Dataset {
    let text = std::fs::read_to_string(data_path("wbc.csv")).expect("wbc.csv");
    let opts = ParseOptions {
        high_risk_class: Some("M".into()),
        ..ParseOptions::default()
    };
    parse_table(&text, &opts).expect("parse wbc")
}

pub fn wbc_normalized() -> NormalizedDataset<f64> {
    normalize(&wbc()).expect("normalize")
}

/// Points from raw rows already in [0, 1].
pub fn points(rows: Vec<Vec<f64>>, labels: Vec<usize>, classes: usize) -> Points<f64> {
    let dim = rows.first().map_or(1, Vec::len);
    Points::new(
        dim,
        rows,
        labels,
        (0..classes).map(|c| format!("c{c}")).collect(),
    )
}
