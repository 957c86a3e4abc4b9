//! Pipeline stages shared by the command line and the HTTP API, so both
//! produce the same JSON for the same inputs.

use serde::{Deserialize, Serialize};

use hyperview::classifier::{learn, PredictionJson};
use hyperview::dataset::ColumnRef;
use hyperview::evaluation::{cross_validate, EvaluationReport};
use hyperview::linguistic::{class_profiles, describe, profile, Style, ThirdsProfile};
use hyperview::mhyper::{merge_dominant, merge_pure};
use hyperview::rules::{apply_threshold_rule, threshold_rule_search, ThresholdRuleJson};
use hyperview::viz::{
    compile_polylines, frequency_widths, heat_scene, nonoverlap_heat, side_by_side, Coloring,
    FrequencyOptions, LanePlacement, Scene, SceneOptions,
};
use hyperview::{
    normalize, parse_table, Dataset, Distance, Error, HBSet, HyperModel, MergeConfig, ModelConfig,
    NormalizedDataset, ParseOptions, Points, Result, SplitSpec, ThresholdRule,
};

/// How to read a table.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoadOptions {
    /// Class column name or 0-based index; the last column by default.
    pub class_column: Option<String>,
    pub id_column: Option<String>,
    /// Extra cell values to treat as missing.
    pub missing_tokens: Vec<String>,
    /// Class that wins label ties.
    pub high_risk_class: Option<String>,
}

impl LoadOptions {
    fn parse_options(&self) -> ParseOptions {
        let column = |s: &str| s.parse::<ColumnRef>().expect("infallible");
        ParseOptions {
            class_column: self.class_column.as_deref().map_or(ColumnRef::Last, column),
            id_column: self.id_column.as_deref().map(column),
            missing_tokens: (!self.missing_tokens.is_empty()).then(|| self.missing_tokens.clone()),
            high_risk_class: self.high_risk_class.clone(),
            ..ParseOptions::default()
        }
    }
}

pub fn load(text: &str, opts: &LoadOptions) -> Result<NormalizedDataset<f64>> {
    normalize(&parse_table(text, &opts.parse_options())?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCount {
    pub class: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadSummary {
    pub cases: usize,
    pub complete: usize,
    pub coordinates: Vec<String>,
    pub classes: Vec<ClassCount>,
    pub missing_cells: usize,
    pub missing_tokens: Vec<String>,
}

pub fn summary(d: &Dataset) -> LoadSummary {
    let labels = d.labels();
    LoadSummary {
        cases: d.len(),
        complete: d.complete_indices().len(),
        coordinates: d.coordinate_names.clone(),
        classes: d
            .class_labels
            .iter()
            .enumerate()
            .map(|(c, l)| ClassCount {
                class: l.clone(),
                count: labels.iter().filter(|&&x| x == c).count(),
            })
            .collect(),
        missing_cells: d
            .cases
            .iter()
            .map(|c| c.cells.iter().filter(|x| x.value().is_none()).count())
            .sum(),
        missing_tokens: d.missing_tokens(),
    }
}

fn default_half_length() -> f64 {
    0.2
}

/// Block construction settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlockParams {
    pub half_length: f64,
    /// 0 keeps the pure blocks.
    pub impurity_threshold: f64,
    /// Shuffle the processing order with this seed; dataset order when
    /// absent.
    pub order_seed: Option<u64>,
}

impl Default for BlockParams {
    fn default() -> Self {
        BlockParams {
            half_length: default_half_length(),
            impurity_threshold: 0.0,
            order_seed: None,
        }
    }
}

impl BlockParams {
    pub fn merge_config(&self) -> MergeConfig {
        MergeConfig {
            impurity_threshold: self.impurity_threshold,
            order_seed: self.order_seed.unwrap_or(0),
            deterministic_order: self.order_seed.is_none(),
            seed_half_length: self.half_length,
        }
    }
}

pub fn build_blocks(points: &Points<f64>, params: &BlockParams) -> Result<HBSet<f64>> {
    let cfg = params.merge_config();
    let pure = merge_pure(points, &cfg)?;
    if cfg.impurity_threshold > 0.0 {
        merge_dominant(&pure, points, &cfg)
    } else {
        Ok(pure)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawInterval {
    pub coordinate: String,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSummary {
    pub index: usize,
    pub id: usize,
    pub label: String,
    pub size: usize,
    pub counts: Vec<ClassCount>,
    pub impurity: f64,
    /// Bounds in raw units.
    pub bounds: Vec<RawInterval>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSetSummary {
    pub count: usize,
    pub pure: usize,
    pub singletons: usize,
    pub blocks: Vec<BlockSummary>,
}

pub fn blocks_summary(
    set: &HBSet<f64>,
    points: &Points<f64>,
    data: &NormalizedDataset<f64>,
) -> BlockSetSummary {
    let blocks = set
        .blocks
        .iter()
        .enumerate()
        .map(|(i, b)| BlockSummary {
            index: i,
            id: set.ids.get(i).copied().unwrap_or(i),
            label: points.class_labels[b.label].clone(),
            size: b.len(),
            counts: points
                .class_labels
                .iter()
                .zip(&b.counts)
                .map(|(l, &n)| ClassCount {
                    class: l.clone(),
                    count: n,
                })
                .collect(),
            impurity: b.impurity().unwrap_or(0.0),
            bounds: b
                .active
                .iter()
                .zip(&b.bounds)
                .map(|(&c, iv)| RawInterval {
                    coordinate: points.coordinate_names[c].clone(),
                    lo: data.denormalize(c, iv.lo),
                    hi: data.denormalize(c, iv.hi),
                })
                .collect(),
        })
        .collect::<Vec<_>>();
    BlockSetSummary {
        count: blocks.len(),
        pure: set.blocks.iter().filter(|b| b.is_pure()).count(),
        singletons: set.blocks.iter().filter(|b| b.len() == 1).count(),
        blocks,
    }
}

fn default_k() -> Vec<usize> {
    vec![3]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnParams {
    pub k: Vec<usize>,
    pub variant: Distance,
    pub hb_fraction: f64,
    pub seed: u64,
    pub blocks: BlockParams,
    pub refusal_radius: Option<f64>,
}

impl Default for LearnParams {
    fn default() -> Self {
        LearnParams {
            k: default_k(),
            variant: Distance::N1,
            hb_fraction: 1.0,
            seed: 7,
            blocks: BlockParams::default(),
            refusal_radius: None,
        }
    }
}

impl LearnParams {
    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            k_candidates: self.k.clone(),
            variant: self.variant,
            refusal_radius: self.refusal_radius,
            ..ModelConfig::default()
        }
    }

    pub fn split(&self, folds: usize) -> SplitSpec {
        SplitSpec {
            fold_count: folds,
            seed: self.seed,
            hb_fraction: self.hb_fraction,
        }
    }
}

pub fn learn_model(data: &NormalizedDataset<f64>, params: &LearnParams) -> Result<HyperModel<f64>> {
    learn(
        &data.complete_points(),
        &params.split(1),
        &params.blocks.merge_config(),
        &params.model_config(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub k: usize,
    pub variant: Distance,
    pub blocks: usize,
    pub tie_class: String,
    pub k_accuracy: Vec<(usize, f64)>,
}

pub fn model_summary(model: &HyperModel<f64>) -> ModelSummary {
    ModelSummary {
        k: model.k,
        variant: model.config.variant,
        blocks: model.blocks.len(),
        tie_class: model.class_labels()[model.tie_class].clone(),
        k_accuracy: model
            .selection
            .as_ref()
            .map(|s| s.per_k.clone())
            .unwrap_or_default(),
    }
}

/// A point given as raw values in coordinate order, or by coordinate name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    List(Vec<f64>),
    Named(serde_json::Map<String, serde_json::Value>),
}

/// A failure tied to a location in the input.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for FieldError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for FieldError {}

/// Raw values in coordinate order. `field` names the input for errors.
pub fn raw_point(
    data: &Dataset,
    spec: &PointSpec,
    field: &str,
) -> std::result::Result<Vec<f64>, FieldError> {
    let err = |field: String, message: String| FieldError { field, message };
    match spec {
        PointSpec::List(v) if v.len() == data.dim() => Ok(v.clone()),
        PointSpec::List(v) => Err(err(
            field.into(),
            format!("expected {} values, found {}", data.dim(), v.len()),
        )),
        PointSpec::Named(map) => {
            let mut out = vec![None; data.dim()];
            for (name, value) in map {
                let c = hyperview::dtree::resolve_coordinate(name, &data.coordinate_names)
                    .map_err(|e| err(format!("{field}.{name}"), e.to_string()))?;
                let v = value
                    .as_f64()
                    .ok_or_else(|| err(format!("{field}.{name}"), "expected a number".into()))?;
                out[c] = Some(v);
            }
            out.iter()
                .enumerate()
                .map(|(c, v)| {
                    v.ok_or_else(|| {
                        err(
                            format!("{field}.{}", data.coordinate_names[c]),
                            "missing value".into(),
                        )
                    })
                })
                .collect()
        }
    }
}

/// Parse `5,1,1` or `X1=5,X6=1,...` from the command line.
pub fn parse_point_arg(data: &Dataset, arg: &str) -> std::result::Result<Vec<f64>, FieldError> {
    let spec = if arg.contains('=') {
        let mut map = serde_json::Map::new();
        for part in arg.split(',') {
            let (k, v) = part.split_once('=').ok_or_else(|| FieldError {
                field: "point".into(),
                message: format!("expected name=value, found `{part}`"),
            })?;
            let v: f64 = v.trim().parse().map_err(|_| FieldError {
                field: format!("point.{}", k.trim()),
                message: format!("bad number `{}`", v.trim()),
            })?;
            map.insert(k.trim().to_string(), serde_json::json!(v));
        }
        PointSpec::Named(map)
    } else {
        PointSpec::List(
            arg.split(',')
                .map(|v| {
                    v.trim().parse().map_err(|_| FieldError {
                        field: "point".into(),
                        message: format!("bad number `{}`", v.trim()),
                    })
                })
                .collect::<std::result::Result<_, _>>()?,
        )
    };
    raw_point(data, &spec, "point")
}

pub fn classify(
    model: &HyperModel<f64>,
    data: &NormalizedDataset<f64>,
    raw: &[f64],
) -> PredictionJson {
    model
        .classify(&data.normalize_point(raw))
        .to_json(model.class_labels())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossvalParams {
    pub folds: usize,
    pub learn: LearnParams,
}

impl Default for CrossvalParams {
    fn default() -> Self {
        CrossvalParams {
            folds: 10,
            learn: LearnParams::default(),
        }
    }
}

pub fn crossval(data: &NormalizedDataset<f64>, p: &CrossvalParams) -> Result<EvaluationReport> {
    cross_validate(
        data,
        &p.learn.split(p.folds),
        &p.learn.blocks.merge_config(),
        &p.learn.model_config(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RulesOutput {
    pub rule: ThresholdRuleJson,
    pub display: String,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
    /// Correct count after each greedy step; empty for an applied rule.
    pub history: Vec<usize>,
    pub line: String,
}

fn rules_output(
    data: &Dataset,
    rule: &ThresholdRule,
    correct: usize,
    total: usize,
    history: Vec<usize>,
) -> RulesOutput {
    let display = rule.display(data);
    let accuracy = correct as f64 / total.max(1) as f64;
    RulesOutput {
        rule: rule.to_json(&data.coordinate_names, &data.class_labels),
        line: format!("{display} ({correct}/{total} = {:.2}%)", 100.0 * accuracy),
        display,
        correct,
        total,
        accuracy,
        history,
    }
}

/// Greedy search, optionally restricted to named coordinates.
pub fn rules_search(
    data: &Dataset,
    max_dims: usize,
    dims: Option<&[String]>,
) -> Result<RulesOutput> {
    let allowed = dims
        .map(|names| {
            names
                .iter()
                .map(|n| hyperview::dtree::resolve_coordinate(n, &data.coordinate_names))
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    let s = threshold_rule_search(data, max_dims, allowed.as_deref())?;
    Ok(rules_output(data, &s.rule, s.correct, s.total, s.history))
}

/// Score a rule given as text, e.g. `X6 < 3 → B`.
pub fn rules_apply(data: &Dataset, text: &str) -> Result<RulesOutput> {
    let rule = ThresholdRule::parse(text, data)?;
    let app = apply_threshold_rule(&rule, data);
    Ok(rules_output(
        data,
        &rule,
        app.correct,
        app.total,
        Vec::new(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedProfile {
    pub name: String,
    pub profile: ThirdsProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Description {
    pub text: String,
    pub profiles: Vec<NamedProfile>,
}

fn description(profiles: Vec<(String, ThirdsProfile)>, style: Style) -> Description {
    Description {
        text: describe(&profiles, style),
        profiles: profiles
            .into_iter()
            .map(|(name, profile)| NamedProfile { name, profile })
            .collect(),
    }
}

/// Per-class description over the complete cases.
pub fn describe_classes(data: &NormalizedDataset<f64>, style: Style, cutoff: f64) -> Description {
    description(class_profiles(&data.complete_points(), cutoff), style)
}

/// Per-block description, blocks numbered from 1.
pub fn describe_blocks(
    set: &HBSet<f64>,
    points: &Points<f64>,
    style: Style,
    cutoff: f64,
) -> Description {
    let profiles = set
        .blocks
        .iter()
        .enumerate()
        .map(|(i, b)| {
            (
                format!("block {} ({})", i + 1, points.class_labels[b.label]),
                profile(points, &b.members, cutoff),
            )
        })
        .collect();
    description(profiles, style)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViewKind {
    #[default]
    Polylines,
    #[serde(alias = "side-by-side")]
    Sidebyside,
    Heat,
    Frequency,
}

impl std::str::FromStr for ViewKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "polylines" => Ok(ViewKind::Polylines),
            "sidebyside" | "side-by-side" => Ok(ViewKind::Sidebyside),
            "heat" => Ok(ViewKind::Heat),
            "frequency" => Ok(ViewKind::Frequency),
            _ => Err(Error::Config(format!(
                "unknown view `{s}` (polylines, sidebyside, heat, frequency)"
            ))),
        }
    }
}

/// Display state kept per session, and set by flags on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ViewState {
    /// Coordinates shown, by name, in display order.
    pub active: Option<Vec<String>>,
    /// Classes shown, by label.
    pub visible_classes: Option<Vec<String>>,
    pub hidden_cases: Vec<String>,
    pub coloring: Coloring,
    pub minority_on_top: bool,
    /// `None` leaves incomplete cases out.
    pub missing: Option<LanePlacement>,
    /// Shift per coordinate index.
    pub shifts: Vec<f64>,
    pub bins: usize,
    pub max_width: f64,
}

impl Default for ViewState {
    fn default() -> Self {
        let s = SceneOptions::default();
        let f = FrequencyOptions::default();
        ViewState {
            active: None,
            visible_classes: None,
            hidden_cases: Vec::new(),
            coloring: s.coloring,
            minority_on_top: s.minority_on_top,
            missing: s.missing,
            shifts: Vec::new(),
            bins: f.bins,
            max_width: f.max_width,
        }
    }
}

impl ViewState {
    pub fn scene_options(&self, data: &Dataset) -> Result<SceneOptions> {
        let active = self
            .active
            .as_ref()
            .map(|names| {
                names
                    .iter()
                    .map(|n| hyperview::dtree::resolve_coordinate(n, &data.coordinate_names))
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        let visible_classes = self
            .visible_classes
            .as_ref()
            .map(|l| {
                l.iter()
                    .map(|c| data.class_index(c))
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        Ok(SceneOptions {
            active,
            visible_classes,
            hidden_cases: self.hidden_cases.clone(),
            coloring: self.coloring,
            minority_on_top: self.minority_on_top,
            missing: self.missing,
            shifts: self.shifts.clone(),
            ..SceneOptions::default()
        })
    }
}

/// Compile a view. Side-by-side and heat views need blocks.
pub fn render(
    data: &NormalizedDataset<f64>,
    blocks: Option<&HBSet<f64>>,
    view: ViewKind,
    state: &ViewState,
) -> Result<Scene> {
    let opts = state.scene_options(&data.base)?;
    let need_blocks = || blocks.ok_or_else(|| Error::Config("this view needs hyperblocks".into()));
    match view {
        ViewKind::Polylines => compile_polylines(data, &opts),
        ViewKind::Frequency => frequency_widths(
            data,
            &FrequencyOptions {
                scene: opts,
                bins: state.bins,
                max_width: state.max_width,
            },
        ),
        ViewKind::Sidebyside => {
            side_by_side(&need_blocks()?.blocks, &data.complete_points(), &opts)
        }
        ViewKind::Heat => {
            let heat = nonoverlap_heat(&need_blocks()?.blocks, data.dim());
            heat_scene(&heat, &data.base.coordinate_names, &opts)
        }
    }
}
