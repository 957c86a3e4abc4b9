use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::color::{class_color, golden_angle_color, spread_color, Coloring};
use super::{Axis, Layout, Pane, Primitive, Scene};
use crate::dataset::NormalizedDataset;
use crate::error::{Error, Result};
use crate::hyperblock::{nonoverlap_coordinates, HyperBlock};
use crate::points::Points;
use crate::scalar::Scalar;

/// Where missing-value slots sit relative to each axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LanePlacement {
    #[default]
    Below,
    Above,
}

/// View state that decides which polylines a scene holds and how they look.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneOptions {
    pub axis_height: f64,
    pub axis_gap: f64,
    pub margin: f64,
    pub line_width: f64,
    /// Coordinates shown, in display order. `None` shows all.
    pub active: Option<Vec<usize>>,
    /// Classes shown. `None` shows all.
    pub visible_classes: Option<Vec<usize>>,
    /// Restrict to these dataset rows.
    pub rows: Option<Vec<usize>>,
    pub hidden_cases: Vec<String>,
    pub coloring: Coloring,
    /// Draw the least frequent visible class last so it stays on top.
    pub minority_on_top: bool,
    /// Slot lane for missing values. `None` leaves incomplete cases out.
    pub missing: Option<LanePlacement>,
    /// Initial shift per coordinate; missing entries mean zero.
    pub shifts: Vec<f64>,
}

impl Default for SceneOptions {
    fn default() -> Self {
        SceneOptions {
            axis_height: 400.0,
            axis_gap: 100.0,
            margin: 40.0,
            line_width: 1.0,
            active: None,
            visible_classes: None,
            rows: None,
            hidden_cases: Vec::new(),
            coloring: Coloring::ByClass,
            minority_on_top: true,
            missing: Some(LanePlacement::Below),
            shifts: Vec::new(),
        }
    }
}

const LANE_STEP: f64 = 16.0;

impl SceneOptions {
    fn active(&self, dim: usize, names: &[String]) -> Result<Vec<usize>> {
        let active = self.active.clone().unwrap_or_else(|| (0..dim).collect());
        let mut seen = HashSet::new();
        for &c in &active {
            if c >= dim {
                return Err(Error::UnknownCoordinate(format!("#{c}")));
            }
            if !seen.insert(c) {
                return Err(Error::Scene(format!(
                    "coordinate {} listed twice",
                    names[c]
                )));
            }
        }
        Ok(active)
    }

    /// Active coordinates for a multi-axis plot: at least two.
    fn plot_axes(&self, dim: usize, names: &[String]) -> Result<Vec<usize>> {
        let active = self.active(dim, names)?;
        if active.len() < 2 {
            return Err(Error::Scene(format!(
                "{} active coordinates; at least 2 needed",
                active.len()
            )));
        }
        Ok(active)
    }

    fn layout(&self) -> Layout {
        Layout {
            top: self.margin,
            axis_height: self.axis_height,
            margin: self.margin,
        }
    }

    fn shift(&self, c: usize) -> f64 {
        self.shifts
            .get(c)
            .copied()
            .unwrap_or(0.0)
            .clamp(-super::MAX_SHIFT, super::MAX_SHIFT)
    }

    fn axes(&self, active: &[usize], names: &[String], x0: f64, pane: usize) -> Vec<Axis> {
        active
            .iter()
            .enumerate()
            .map(|(j, &c)| Axis {
                coordinate: c,
                name: names[c].clone(),
                x: x0 + j as f64 * self.axis_gap,
                shift: self.shift(c),
                active: true,
                pane,
            })
            .collect()
    }
}

/// Visible dataset rows in drawing order, with their class indices.
fn visible_rows<T: Scalar>(
    data: &NormalizedDataset<T>,
    opts: &SceneOptions,
    active: &[usize],
) -> (Vec<usize>, Vec<usize>) {
    let labels = data.base.labels();
    let hidden: HashSet<&str> = opts.hidden_cases.iter().map(String::as_str).collect();
    let candidates: Vec<usize> = match &opts.rows {
        Some(r) => r.iter().copied().filter(|&i| i < data.len()).collect(),
        None => (0..data.len()).collect(),
    };
    let rows: Vec<usize> = candidates
        .into_iter()
        .filter(|&i| {
            opts.visible_classes
                .as_ref()
                .is_none_or(|v| v.contains(&labels[i]))
                && !hidden.contains(data.base.cases[i].id.as_str())
                && (opts.missing.is_some() || active.iter().all(|&c| data.values[i][c].is_some()))
        })
        .collect();
    (rows, labels)
}

/// Class draw rank: majority first when the minority goes on top,
/// otherwise class order.
fn class_rank(
    rows: &[usize],
    labels: &[usize],
    n_classes: usize,
    minority_on_top: bool,
) -> Vec<usize> {
    let mut counts = vec![0usize; n_classes];
    for &r in rows {
        counts[labels[r]] += 1;
    }
    let mut order: Vec<usize> = (0..n_classes).collect();
    if minority_on_top {
        order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    }
    let mut rank = vec![0; n_classes];
    for (i, &c) in order.iter().enumerate() {
        rank[c] = i;
    }
    rank
}

/// Slot markers for missing cells, and the y of each (axis, token) slot.
fn lane_markers<T: Scalar>(
    data: &NormalizedDataset<T>,
    rows: &[usize],
    axes: &[Axis],
    layout: &Layout,
    placement: LanePlacement,
) -> (Vec<Primitive>, Vec<BTreeMap<String, f64>>) {
    let min_shift = axes.iter().map(|a| a.shift).fold(0.0, f64::min);
    let max_shift = axes.iter().map(|a| a.shift).fold(0.0, f64::max);
    let mut markers = Vec::new();
    let mut slots = vec![BTreeMap::new(); axes.len()];
    for (ai, axis) in axes.iter().enumerate() {
        // Tokens in order of first appearance.
        let mut tokens: Vec<(String, Vec<String>)> = Vec::new();
        for &r in rows {
            let case = &data.base.cases[r];
            if let Some(tok) = case.cells[axis.coordinate].missing_token() {
                match tokens.iter_mut().find(|(t, _)| t == tok) {
                    Some((_, ids)) => ids.push(case.id.clone()),
                    None => tokens.push((tok.to_string(), vec![case.id.clone()])),
                }
            }
        }
        for (slot, (token, case_ids)) in tokens.into_iter().enumerate() {
            let step = LANE_STEP * (slot + 1) as f64;
            let y = match placement {
                LanePlacement::Below => layout.y(0.0, min_shift) + step,
                LanePlacement::Above => layout.y(1.0, max_shift) - step,
            };
            slots[ai].insert(token.clone(), y);
            markers.push(Primitive::Marker {
                axis: ai,
                slot,
                token,
                case_ids,
                x: axis.x,
                y,
            });
        }
    }
    (markers, slots)
}

/// Missing-value markers for the cases `opts` makes visible. Empty when no
/// visible case has a missing cell.
pub fn missing_markers<T: Scalar>(
    data: &NormalizedDataset<T>,
    opts: &SceneOptions,
) -> Result<Vec<Primitive>> {
    let names = &data.base.coordinate_names;
    let active = opts.active(data.dim(), names)?;
    let (rows, _) = visible_rows(data, opts, &active);
    let axes = opts.axes(&active, names, opts.margin, 0);
    Ok(lane_markers(
        data,
        &rows,
        &axes,
        &opts.layout(),
        opts.missing.unwrap_or_default(),
    )
    .0)
}

/// One polyline per visible case over the active axes. Cases with missing
/// cells are routed through slot markers, or left out when `opts.missing`
/// is `None`. Drawing order is class rank, then case order.
pub fn compile_polylines<T: Scalar>(
    data: &NormalizedDataset<T>,
    opts: &SceneOptions,
) -> Result<Scene> {
    let names = &data.base.coordinate_names;
    let active = opts.plot_axes(data.dim(), names)?;
    let layout = opts.layout();
    let axes = opts.axes(&active, names, opts.margin, 0);
    let (mut rows, labels) = visible_rows(data, opts, &active);
    let n_visible = rows.len();
    let color_pos: std::collections::HashMap<usize, usize> = match opts.coloring {
        Coloring::ByClass => Default::default(),
        _ => rows.iter().enumerate().map(|(i, &r)| (r, i)).collect(),
    };
    let rank = class_rank(
        &rows,
        &labels,
        data.base.class_labels.len(),
        opts.minority_on_top,
    );
    rows.sort_by_key(|&r| rank[labels[r]]);

    let (markers, slots) = match opts.missing {
        Some(p) => lane_markers(data, &rows, &axes, &layout, p),
        None => (Vec::new(), vec![BTreeMap::new(); axes.len()]),
    };

    let polylines: Vec<Primitive> = rows
        .par_iter()
        .map(|&r| {
            let case = &data.base.cases[r];
            let mut points = Vec::with_capacity(axes.len());
            let mut values = Vec::with_capacity(axes.len());
            for (ai, a) in axes.iter().enumerate() {
                match data.values[r][a.coordinate] {
                    Some(v) => {
                        let v = v.as_f64();
                        points.push([a.x, layout.y(v, a.shift)]);
                        values.push(Some(v));
                    }
                    None => {
                        let tok = case.cells[a.coordinate].missing_token().unwrap_or("");
                        points.push([
                            a.x,
                            slots[ai]
                                .get(tok)
                                .copied()
                                .unwrap_or(layout.y(0.0, a.shift)),
                        ]);
                        values.push(None);
                    }
                }
            }
            let color = match opts.coloring {
                Coloring::ByClass => class_color(labels[r]),
                Coloring::Spread => spread_color(color_pos[&r], n_visible),
                Coloring::GoldenAngle => golden_angle_color(color_pos[&r]),
            };
            Primitive::Polyline {
                pane: 0,
                first_axis: 0,
                points,
                values,
                width: opts.line_width.max(1.0),
                color,
                case_id: Some(case.id.clone()),
                class: Some(case.class.clone()),
                count: None,
            }
        })
        .collect();

    let mut primitives = polylines;
    primitives.extend(markers);
    Ok(Scene::assemble(layout, axes, Vec::new(), primitives))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrequencyOptions {
    pub scene: SceneOptions,
    pub max_width: f64,
    /// Bins per axis for coordinates that are not integer valued.
    pub bins: usize,
}

impl Default for FrequencyOptions {
    fn default() -> Self {
        FrequencyOptions {
            scene: SceneOptions::default(),
            max_width: 12.0,
            bins: 10,
        }
    }
}

/// Aggregate line segments between adjacent axes. Cases are grouped by
/// their (bin, bin) pair on each axis pair; segment width grows with the
/// group size. Integer-valued coordinates bin by value; others use equal
/// bins on the normalized range. Only cases present on both axes count.
pub fn frequency_widths<T: Scalar>(
    data: &NormalizedDataset<T>,
    opts: &FrequencyOptions,
) -> Result<Scene> {
    let so = &opts.scene;
    let names = &data.base.coordinate_names;
    let active = so.plot_axes(data.dim(), names)?;
    let layout = so.layout();
    let axes = so.axes(&active, names, so.margin, 0);
    let no_missing = SceneOptions {
        missing: Some(LanePlacement::Below),
        ..so.clone()
    };
    let (rows, labels) = visible_rows(data, &no_missing, &active);
    let bins = opts.bins.max(1);
    let integer: Vec<bool> = active
        .iter()
        .map(|&c| data.base.is_integer_valued(c))
        .collect();
    let position = |j: usize, v: f64| -> f64 {
        if integer[j] {
            v
        } else {
            let b = ((v * bins as f64).floor() as usize).min(bins - 1);
            (b as f64 + 0.5) / bins as f64
        }
    };
    let classes: HashSet<usize> = rows.iter().map(|&r| labels[r]).collect();
    let color = if classes.len() == 1 {
        class_color(*classes.iter().next().expect("one class"))
    } else {
        "#555555".to_string()
    };
    // Integer keys keep the grouping exact and ordered.
    let key = |v: f64| (v * 1e9).round() as i64;

    // (from key, to key) -> (from, to, count), per axis pair.
    type Groups = BTreeMap<(i64, i64), (f64, f64, usize)>;
    let mut groups: Vec<Groups> = vec![BTreeMap::new(); axes.len().saturating_sub(1)];
    for &r in &rows {
        for j in 0..groups.len() {
            let (Some(a), Some(b)) = (data.values[r][active[j]], data.values[r][active[j + 1]])
            else {
                continue;
            };
            let (pa, pb) = (position(j, a.as_f64()), position(j + 1, b.as_f64()));
            groups[j].entry((key(pa), key(pb))).or_insert((pa, pb, 0)).2 += 1;
        }
    }
    let max_count = groups
        .iter()
        .flat_map(|g| g.values().map(|e| e.2))
        .max()
        .unwrap_or(1);
    let mut primitives = Vec::new();
    for (j, g) in groups.iter().enumerate() {
        for &(pa, pb, count) in g.values() {
            primitives.push(Primitive::Polyline {
                pane: 0,
                first_axis: j,
                points: vec![
                    [axes[j].x, layout.y(pa, axes[j].shift)],
                    [axes[j + 1].x, layout.y(pb, axes[j + 1].shift)],
                ],
                values: vec![Some(pa), Some(pb)],
                width: 1.0 + (opts.max_width - 1.0) * count as f64 / max_count as f64,
                color: color.clone(),
                case_id: None,
                class: (classes.len() == 1)
                    .then(|| data.base.class_labels[labels[rows[0]]].clone()),
                count: Some(count),
            });
        }
    }
    Ok(Scene::assemble(layout, axes, Vec::new(), primitives))
}

/// Minimum, quartiles and maximum with linear interpolation between order
/// statistics. `None` for an empty slice.
pub fn quartiles(values: &[f64]) -> Option<[f64; 5]> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let h = (v.len() - 1) as f64 * p;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        v[lo] + (h - lo as f64) * (v[hi] - v[lo])
    };
    Some([q(0.0), q(0.25), q(0.5), q(0.75), q(1.0)])
}

const QUARTILE_SHADE: [f64; 4] = [0.2, 0.45, 0.45, 0.2];

/// Quartile bands of a block's members on each of its active coordinates
/// shown in `pane`. Four bands per axis; the inner two are darker.
pub fn quantile_bands<T: Scalar>(
    scene: &Scene,
    pane: usize,
    block: &HyperBlock<T>,
    points: &Points<T>,
) -> Vec<Primitive> {
    let half_width = scene.layout.axis_height.min(8.0 * 4.0) / 4.0;
    let color = class_color(block.label);
    let mut out = Vec::new();
    for (ai, axis) in scene.axes.iter().enumerate() {
        if axis.pane != pane || !axis.active || !block.active.contains(&axis.coordinate) {
            continue;
        }
        let vals: Vec<f64> = block
            .members
            .iter()
            .map(|&m| points.row(m)[axis.coordinate].as_f64())
            .collect();
        let Some(q) = quartiles(&vals) else { continue };
        for k in 0..4 {
            out.push(Primitive::Band {
                axis: ai,
                v0: q[k],
                v1: q[k + 1],
                y0: scene.layout.y(q[k + 1], axis.shift),
                y1: scene.layout.y(q[k], axis.shift),
                half_width,
                shade: QUARTILE_SHADE[k],
                color: color.clone(),
            });
        }
    }
    out
}

/// One pane per block, ordered by class then size (largest first). Each
/// pane holds the block's member polylines and a bounds band per axis.
/// A block without members still gets a pane with its bounds. Pane 0 has
/// the same axis geometry as [`compile_polylines`].
pub fn side_by_side<T: Scalar>(
    blocks: &[HyperBlock<T>],
    points: &Points<T>,
    opts: &SceneOptions,
) -> Result<Scene> {
    let names = &points.coordinate_names;
    let active = opts.plot_axes(points.dim(), names)?;
    let layout = opts.layout();
    let mut order: Vec<usize> = (0..blocks.len()).collect();
    order.sort_by(|&a, &b| {
        blocks[a]
            .label
            .cmp(&blocks[b].label)
            .then(blocks[b].members.len().cmp(&blocks[a].members.len()))
            .then(a.cmp(&b))
    });
    let inner = active.len().saturating_sub(1) as f64 * opts.axis_gap;
    let pad = opts.margin;
    let pane_width = inner + 2.0 * pad;
    let mut axes = Vec::new();
    let mut panes = Vec::new();
    let mut primitives = Vec::new();
    for (p, &b) in order.iter().enumerate() {
        let block = &blocks[b];
        let x0 = p as f64 * (pane_width + opts.margin);
        let first_axis = axes.len();
        let pane_axes = opts.axes(&active, names, x0 + pad, p);
        for (j, axis) in pane_axes.iter().enumerate() {
            if let Some(iv) = block.interval(axis.coordinate) {
                let (lo, hi) = (iv.lo.as_f64(), iv.hi.as_f64());
                primitives.push(Primitive::Band {
                    axis: first_axis + j,
                    v0: lo,
                    v1: hi,
                    y0: layout.y(hi, axis.shift),
                    y1: layout.y(lo, axis.shift),
                    half_width: pad / 3.0,
                    shade: 0.15,
                    color: class_color(block.label),
                });
            }
        }
        for &m in &block.members {
            let row = points.row(m);
            let values: Vec<Option<f64>> = pane_axes
                .iter()
                .map(|a| Some(row[a.coordinate].as_f64()))
                .collect();
            primitives.push(Primitive::Polyline {
                pane: p,
                first_axis: 0,
                points: pane_axes
                    .iter()
                    .zip(&values)
                    .map(|(a, v)| [a.x, layout.y(v.expect("complete"), a.shift)])
                    .collect(),
                values,
                width: opts.line_width.max(1.0),
                color: class_color(points.labels[m]),
                case_id: Some(points.ids[m].clone()),
                class: Some(points.class_labels[points.labels[m]].clone()),
                count: None,
            });
        }
        primitives.push(Primitive::Label {
            text: format!(
                "{} ({})",
                points.class_labels.get(block.label).map_or("?", |s| s),
                block.members.len()
            ),
            anchor: [x0 + pad, layout.top - 12.0],
        });
        axes.extend(pane_axes);
        panes.push(Pane {
            x0,
            x1: x0 + pane_width,
            title: format!("block {b}"),
        });
    }
    Ok(Scene::assemble(layout, axes, panes, primitives))
}

/// Per coordinate, the fraction of block pairs whose intervals are disjoint
/// there. All zeros with fewer than two blocks.
pub fn nonoverlap_heat<T: Scalar>(blocks: &[HyperBlock<T>], dim: usize) -> Vec<f64> {
    let mut counts = vec![0usize; dim];
    let mut pairs = 0usize;
    for i in 0..blocks.len() {
        for j in i + 1..blocks.len() {
            pairs += 1;
            for c in nonoverlap_coordinates(&blocks[i], &blocks[j]) {
                if c < dim {
                    counts[c] += 1;
                }
            }
        }
    }
    counts
        .iter()
        .map(|&c| {
            if pairs == 0 {
                0.0
            } else {
                c as f64 / pairs as f64
            }
        })
        .collect()
}

/// Axes with a full-height band each, shaded by heat.
pub fn heat_scene(heat: &[f64], names: &[String], opts: &SceneOptions) -> Result<Scene> {
    let active = opts.active(heat.len(), names)?;
    let layout = opts.layout();
    let axes = opts.axes(&active, names, opts.margin, 0);
    let mut primitives = Vec::new();
    for (ai, axis) in axes.iter().enumerate() {
        let h = heat[axis.coordinate];
        primitives.push(Primitive::Band {
            axis: ai,
            v0: 0.0,
            v1: 1.0,
            y0: layout.y(1.0, axis.shift),
            y1: layout.y(0.0, axis.shift),
            half_width: opts.axis_gap / 4.0,
            shade: h,
            color: "#d62728".to_string(),
        });
        primitives.push(Primitive::Label {
            text: format!("{h:.2}"),
            anchor: [axis.x, layout.y(0.0, axis.shift) + LANE_STEP],
        });
    }
    Ok(Scene::assemble(layout, axes, Vec::new(), primitives))
}
