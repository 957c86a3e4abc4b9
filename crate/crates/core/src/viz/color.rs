use serde::{Deserialize, Serialize};

/// How polylines are colored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coloring {
    /// One fixed color per class.
    #[default]
    ByClass,
    /// Per case, hues evenly spaced over the visible cases.
    Spread,
    /// Per case, hues stepped by the golden angle.
    GoldenAngle,
}

const CLASS_PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

pub fn class_color(class: usize) -> String {
    CLASS_PALETTE[class % CLASS_PALETTE.len()].to_string()
}

/// `#rrggbb` from hue in degrees, saturation and lightness in [0, 1].
pub fn hsl_to_hex(h: f64, s: f64, l: f64) -> String {
    let h = h.rem_euclid(360.0) / 60.0;
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let x = c * (1.0 - (h % 2.0 - 1.0).abs());
    let (r, g, b) = match h as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let byte = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    format!("#{:02x}{:02x}{:02x}", byte(r), byte(g), byte(b))
}

/// Case `i` of `n`, hues spread evenly round the wheel.
pub fn spread_color(i: usize, n: usize) -> String {
    hsl_to_hex(360.0 * i as f64 / n.max(1) as f64, 0.65, 0.45)
}

pub fn golden_angle_color(i: usize) -> String {
    hsl_to_hex(i as f64 * 137.507_764, 0.65, 0.45)
}
