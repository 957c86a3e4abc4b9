//! Parallel-coordinates scene geometry.
//!
//! A [`Scene`] is resolution independent: axes at x positions, and
//! primitives in drawing order. Vertical positions follow
//! `y = top + (1 - (v + shift)) * axis_height` for a normalized value `v`,
//! so y grows downward as in SVG.

mod color;
mod compile;
mod svg;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use color::{class_color, golden_angle_color, hsl_to_hex, spread_color, Coloring};
pub use compile::{
    compile_polylines, frequency_widths, heat_scene, missing_markers, nonoverlap_heat,
    quantile_bands, quartiles, side_by_side, FrequencyOptions, LanePlacement, SceneOptions,
};
pub use svg::render_svg;

/// Largest allowed |shift|, in axis units.
pub const MAX_SHIFT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Viewport {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub top: f64,
    pub axis_height: f64,
    pub margin: f64,
}

impl Layout {
    pub fn y(&self, v: f64, shift: f64) -> f64 {
        self.top + (1.0 - (v + shift)) * self.axis_height
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub coordinate: usize,
    pub name: String,
    pub x: f64,
    pub shift: f64,
    pub active: bool,
    #[serde(default)]
    pub pane: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pane {
    pub x0: f64,
    pub x1: f64,
    pub title: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Primitive {
    /// Vertex `j` sits on the pane's active axis `first_axis + j`. `values`
    /// holds the normalized value per vertex; `None` marks a vertex routed
    /// to a missing-value slot.
    Polyline {
        pane: usize,
        first_axis: usize,
        points: Vec<[f64; 2]>,
        values: Vec<Option<f64>>,
        width: f64,
        color: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        case_id: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        class: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        count: Option<usize>,
    },
    /// Rectangle centred on an axis between normalized values `v0..v1`.
    Band {
        axis: usize,
        v0: f64,
        v1: f64,
        y0: f64,
        y1: f64,
        half_width: f64,
        shade: f64,
        color: String,
    },
    /// One missing-value token slot on an axis lane.
    Marker {
        axis: usize,
        slot: usize,
        token: String,
        case_ids: Vec<String>,
        x: f64,
        y: f64,
    },
    Label {
        text: String,
        anchor: [f64; 2],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub viewport: Viewport,
    pub layout: Layout,
    pub axes: Vec<Axis>,
    #[serde(default)]
    pub panes: Vec<Pane>,
    pub primitives: Vec<Primitive>,
}

/// Result of a shift request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftOutcome {
    pub coordinate: usize,
    pub shift: f64,
    /// The request exceeded the allowed range and was cut back.
    pub clamped: bool,
}

/// Shifts live on a 1e-9 grid so that a shift followed by its inverse
/// lands on exactly the same value.
fn snap(v: f64) -> f64 {
    (v * 1e9).round() / 1e9
}

impl Scene {
    pub fn empty() -> Self {
        Scene {
            viewport: Viewport {
                x: 0.0,
                y: 0.0,
                width: 100.0,
                height: 100.0,
            },
            layout: Layout {
                top: 0.0,
                axis_height: 100.0,
                margin: 0.0,
            },
            axes: Vec::new(),
            panes: Vec::new(),
            primitives: Vec::new(),
        }
    }

    /// Scene from parts, with the viewport fitted.
    pub fn assemble(
        layout: Layout,
        axes: Vec<Axis>,
        panes: Vec<Pane>,
        primitives: Vec<Primitive>,
    ) -> Self {
        let mut scene = Scene {
            viewport: Viewport {
                x: 0.0,
                y: 0.0,
                width: 0.0,
                height: 0.0,
            },
            layout,
            axes,
            panes,
            primitives,
        };
        scene.fit_viewport();
        scene
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("scene serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Scene axis indices of the active axes of each pane, in order.
    fn pane_axes(&self) -> Vec<Vec<usize>> {
        let n = self.axes.iter().map(|a| a.pane + 1).max().unwrap_or(0);
        let mut out = vec![Vec::new(); n];
        for (i, a) in self.axes.iter().enumerate() {
            if a.active {
                out[a.pane].push(i);
            }
        }
        out
    }

    pub fn polyline_count(&self) -> usize {
        self.primitives
            .iter()
            .filter(|p| {
                matches!(
                    p,
                    Primitive::Polyline {
                        case_id: Some(_),
                        ..
                    }
                )
            })
            .count()
    }

    /// Vertices of the polyline for `case_id`, if drawn.
    pub fn case_points(&self, case_id: &str) -> Option<&[[f64; 2]]> {
        self.primitives.iter().find_map(|p| match p {
            Primitive::Polyline {
                case_id: Some(id),
                points,
                ..
            } if id == case_id => Some(points.as_slice()),
            _ => None,
        })
    }

    /// Recompute the viewport from axes, markers and labels so that every
    /// shifted axis fits.
    pub fn fit_viewport(&mut self) {
        let l = self.layout;
        let mut y0 = f64::INFINITY;
        let mut y1 = f64::NEG_INFINITY;
        let mut x1: f64 = 0.0;
        for a in &self.axes {
            y0 = y0.min(l.y(1.0, a.shift));
            y1 = y1.max(l.y(0.0, a.shift));
            x1 = x1.max(a.x);
        }
        for p in &self.panes {
            x1 = x1.max(p.x1);
        }
        for p in &self.primitives {
            match p {
                Primitive::Marker { y, .. } => {
                    y0 = y0.min(*y);
                    y1 = y1.max(*y);
                }
                Primitive::Label { anchor, .. } => {
                    y0 = y0.min(anchor[1]);
                    y1 = y1.max(anchor[1]);
                }
                _ => {}
            }
        }
        if !y0.is_finite() {
            y0 = l.top;
            y1 = l.top + l.axis_height;
        }
        self.viewport = Viewport {
            x: 0.0,
            y: y0 - l.margin,
            width: x1 + l.margin,
            height: (y1 - y0) + 2.0 * l.margin,
        };
    }

    fn set_shift(&mut self, coordinate: usize, wanted: f64) -> Result<ShiftOutcome> {
        let targets: Vec<usize> = (0..self.axes.len())
            .filter(|&i| self.axes[i].coordinate == coordinate && self.axes[i].active)
            .collect();
        if targets.is_empty() {
            return Err(Error::Scene(format!(
                "coordinate {coordinate} is not an active axis"
            )));
        }
        let clamped = wanted.abs() > MAX_SHIFT;
        let shift = snap(wanted.clamp(-MAX_SHIFT, MAX_SHIFT));
        let layout = self.layout;
        let pane_axes = self.pane_axes();
        // Position of the shifted axis among each pane's active axes.
        let pos: Vec<Option<usize>> = pane_axes
            .iter()
            .map(|axes| axes.iter().position(|a| targets.contains(a)))
            .collect();
        for &t in &targets {
            self.axes[t].shift = shift;
        }
        for p in &mut self.primitives {
            match p {
                Primitive::Polyline {
                    pane,
                    first_axis,
                    points,
                    values,
                    ..
                } => {
                    let Some(Some(j)) = pos.get(*pane) else {
                        continue;
                    };
                    if *j < *first_axis {
                        continue;
                    }
                    let k = j - *first_axis;
                    if let (Some(pt), Some(Some(v))) = (points.get_mut(k), values.get(k)) {
                        pt[1] = layout.y(*v, shift);
                    }
                }
                Primitive::Band {
                    axis,
                    v0,
                    v1,
                    y0,
                    y1,
                    ..
                } if targets.contains(axis) => {
                    *y0 = layout.y(*v1, shift);
                    *y1 = layout.y(*v0, shift);
                }
                _ => {}
            }
        }
        self.fit_viewport();
        Ok(ShiftOutcome {
            coordinate,
            shift,
            clamped,
        })
    }
}

/// Move an axis vertically by `delta` axis units. Only the vertices and
/// bands on that axis are recomputed. The total shift is clamped to
/// [-1, 1]; the outcome says when that happened.
pub fn apply_axis_shift(scene: &mut Scene, coordinate: usize, delta: f64) -> Result<ShiftOutcome> {
    let current = scene
        .axes
        .iter()
        .find(|a| a.coordinate == coordinate && a.active)
        .map(|a| a.shift)
        .ok_or_else(|| Error::Scene(format!("coordinate {coordinate} is not an active axis")))?;
    if delta == 0.0 {
        return Ok(ShiftOutcome {
            coordinate,
            shift: current,
            clamped: false,
        });
    }
    scene.set_shift(coordinate, current + delta)
}

/// Shift every axis so the case's polyline becomes horizontal at the y of
/// its first vertex.
pub fn straighten_case(scene: &mut Scene, case_id: &str) -> Result<Vec<ShiftOutcome>> {
    let pane_axes = scene.pane_axes();
    let (pane, values) = scene
        .primitives
        .iter()
        .find_map(|p| match p {
            Primitive::Polyline {
                case_id: Some(id),
                pane,
                first_axis: 0,
                values,
                ..
            } if id == case_id => Some((*pane, values.clone())),
            _ => None,
        })
        .ok_or_else(|| Error::Scene(format!("no polyline for case `{case_id}`")))?;
    if values.iter().any(Option::is_none) {
        return Err(Error::Scene(format!("case `{case_id}` has missing values")));
    }
    let axes = &pane_axes[pane];
    let base = values[0].expect("complete") + scene.axes[axes[0]].shift;
    let mut out = Vec::new();
    for (j, &a) in axes.iter().enumerate().skip(1) {
        let coordinate = scene.axes[a].coordinate;
        out.push(scene.set_shift(coordinate, base - values[j].expect("complete"))?);
    }
    Ok(out)
}

/// Shift per coordinate, for the axes of pane 0.
pub fn shifts(scene: &Scene) -> Vec<(usize, f64)> {
    scene
        .axes
        .iter()
        .filter(|a| a.pane == 0)
        .map(|a| (a.coordinate, a.shift))
        .collect()
}
