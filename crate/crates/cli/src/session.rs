//! Exploration sessions: a dataset, a log of state-changing commands, and
//! the state derived by replaying that log.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::path::PathBuf;
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

use hyperview::hyperblock::seed_hb;
use hyperview::mhyper::merge_dominant;
use hyperview::viz::{apply_axis_shift, compile_polylines, shifts, straighten_case, ShiftOutcome};
use hyperview::{HBSet, HyperModel, NormalizedDataset, Points, Scene};

use crate::ops::{self, BlockParams, LearnParams, LoadOptions, ViewState};

/// A failed request: HTTP status, the offending input field, and a message.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: u16,
    pub field: Option<String>,
    pub message: String,
}

impl ApiError {
    pub fn bad(field: impl Into<String>, message: impl ToString) -> Self {
        ApiError {
            status: 400,
            field: Some(field.into()),
            message: message.to_string(),
        }
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        ApiError {
            status: 404,
            field: None,
            message: message.into(),
        }
    }

    pub fn conflict(message: impl Into<String>) -> Self {
        ApiError {
            status: 409,
            field: Some("revision".into()),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.field {
            Some(field) => write!(f, "{field}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ApiError {}

impl From<ops::FieldError> for ApiError {
    fn from(e: ops::FieldError) -> Self {
        ApiError::bad(e.field, e.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockMode {
    /// Maximal pure blocks over every complete case.
    #[default]
    Pure,
    /// Pure blocks followed by dominant merging.
    Dominant,
    /// One block grown around a single case.
    Seed,
}

/// A coordinate by name or by 0-based index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoordinateRef {
    Index(usize),
    Name(String),
}

fn default_half_length() -> f64 {
    BlockParams::default().half_length
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperblocksCmd {
    #[serde(default)]
    pub mode: BlockMode,
    #[serde(default = "default_half_length")]
    pub half_length: f64,
    #[serde(default)]
    pub impurity_threshold: f64,
    #[serde(default)]
    pub order_seed: Option<u64>,
    /// Seed case for `mode: seed`.
    #[serde(default)]
    pub case_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MergeCmd {
    pub impurity_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisShiftCmd {
    pub coordinate: CoordinateRef,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StraightenCmd {
    pub case_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsetsCmd {
    pub case_ids: Vec<String>,
    pub visible: bool,
}

/// Display toggles; absent fields keep their current value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ViewCmd {
    pub active: Option<Vec<String>>,
    pub visible_classes: Option<Vec<String>>,
    pub coloring: Option<hyperview::viz::Coloring>,
    pub minority_on_top: Option<bool>,
}

/// A state-changing command. The log of these is the session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Command {
    Hyperblocks(HyperblocksCmd),
    Merge(MergeCmd),
    Learn(LearnParams),
    AxisShift(AxisShiftCmd),
    Straighten(StraightenCmd),
    Subsets(SubsetsCmd),
    View(ViewCmd),
}

/// What a command produced, beyond the new state.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Effect {
    None,
    Blocks(ops::BlockSetSummary),
    Model(ops::ModelSummary),
    Shift(ShiftOutcome),
    Shifts(Vec<ShiftOutcome>),
}

/// State derived from the dataset and the command log.
#[derive(Debug, Clone)]
pub struct State {
    pub data: Arc<NormalizedDataset<f64>>,
    pub points: Arc<Points<f64>>,
    pub blocks: Option<Arc<HBSet<f64>>>,
    pub model: Option<Arc<HyperModel<f64>>>,
    pub view: ViewState,
    /// Polylines scene for `view`, kept current so shifts stay incremental.
    pub scene: Option<Arc<Scene>>,
}

impl State {
    pub fn new(data: NormalizedDataset<f64>) -> Self {
        let points = data.complete_points();
        let mut s = State {
            data: Arc::new(data),
            points: Arc::new(points),
            blocks: None,
            model: None,
            view: ViewState::default(),
            scene: None,
        };
        s.recompile();
        s
    }

    fn recompile(&mut self) {
        // An unrenderable view (e.g. a single active axis) leaves no cache.
        self.scene = ops::render(&self.data, None, ops::ViewKind::Polylines, &self.view)
            .ok()
            .map(Arc::new);
    }

    fn coordinate(&self, c: &CoordinateRef) -> Result<usize, ApiError> {
        let names = &self.data.base.coordinate_names;
        match c {
            CoordinateRef::Index(i) if *i < names.len() => Ok(*i),
            CoordinateRef::Index(i) => {
                Err(ApiError::bad("coordinate", format!("no coordinate {i}")))
            }
            CoordinateRef::Name(n) => hyperview::dtree::resolve_coordinate(n, names)
                .map_err(|e| ApiError::bad("coordinate", e)),
        }
    }

    fn scene_mut(&mut self) -> Result<&mut Scene, ApiError> {
        if self.scene.is_none() {
            let opts = self
                .view
                .scene_options(&self.data.base)
                .map_err(|e| ApiError::bad("view", e))?;
            let scene =
                compile_polylines(&self.data, &opts).map_err(|e| ApiError::bad("view", e))?;
            self.scene = Some(Arc::new(scene));
        }
        Ok(Arc::make_mut(self.scene.as_mut().expect("compiled")))
    }

    fn record_shifts(&mut self) {
        let Some(scene) = &self.scene else { return };
        let dim = self.data.dim();
        self.view.shifts.resize(dim, 0.0);
        for (c, s) in shifts(scene) {
            self.view.shifts[c] = s;
        }
    }

    /// Apply one command in place.
    pub fn apply(&mut self, cmd: &Command) -> Result<Effect, ApiError> {
        match cmd {
            Command::Hyperblocks(HyperblocksCmd {
                mode,
                half_length,
                impurity_threshold,
                order_seed,
                case_id,
            }) => {
                let params = &BlockParams {
                    half_length: *half_length,
                    impurity_threshold: *impurity_threshold,
                    order_seed: *order_seed,
                };
                let set = match mode {
                    BlockMode::Seed => {
                        let id = case_id
                            .as_deref()
                            .ok_or_else(|| ApiError::bad("case_id", "seed mode needs a case_id"))?;
                        let row =
                            self.points
                                .ids
                                .iter()
                                .position(|x| x == id)
                                .ok_or_else(|| {
                                    ApiError::bad("case_id", format!("no complete case `{id}`"))
                                })?;
                        if !(0.0..=0.5).contains(&params.half_length) {
                            return Err(ApiError::bad("half_length", "not in [0, 0.5]"));
                        }
                        HBSet::from_blocks(vec![seed_hb(&self.points, row, params.half_length)])
                    }
                    BlockMode::Pure => ops::build_blocks(
                        &self.points,
                        &BlockParams {
                            impurity_threshold: 0.0,
                            ..params.clone()
                        },
                    )
                    .map_err(|e| ApiError::bad("half_length", e))?,
                    BlockMode::Dominant => {
                        if params.impurity_threshold <= 0.0 {
                            return Err(ApiError::bad(
                                "impurity_threshold",
                                "dominant mode needs a positive threshold",
                            ));
                        }
                        ops::build_blocks(&self.points, params)
                            .map_err(|e| ApiError::bad("impurity_threshold", e))?
                    }
                };
                let summary = ops::blocks_summary(&set, &self.points, &self.data);
                self.blocks = Some(Arc::new(set));
                Ok(Effect::Blocks(summary))
            }
            Command::Merge(MergeCmd { impurity_threshold }) => {
                let current = self
                    .blocks
                    .as_ref()
                    .ok_or_else(|| ApiError::bad("blocks", "no hyperblocks to merge"))?;
                let cfg = BlockParams {
                    impurity_threshold: *impurity_threshold,
                    ..BlockParams::default()
                }
                .merge_config();
                let set = merge_dominant(current, &self.points, &cfg)
                    .map_err(|e| ApiError::bad("impurity_threshold", e))?;
                let summary = ops::blocks_summary(&set, &self.points, &self.data);
                self.blocks = Some(Arc::new(set));
                Ok(Effect::Blocks(summary))
            }
            Command::Learn(params) => {
                let model =
                    ops::learn_model(&self.data, params).map_err(|e| ApiError::bad("params", e))?;
                let summary = ops::model_summary(&model);
                self.model = Some(Arc::new(model));
                Ok(Effect::Model(summary))
            }
            Command::AxisShift(AxisShiftCmd { coordinate, delta }) => {
                if !delta.is_finite() {
                    return Err(ApiError::bad("delta", "not a finite number"));
                }
                let c = self.coordinate(coordinate)?;
                let out = apply_axis_shift(self.scene_mut()?, c, *delta)
                    .map_err(|e| ApiError::bad("coordinate", e))?;
                self.record_shifts();
                Ok(Effect::Shift(out))
            }
            Command::Straighten(StraightenCmd { case_id }) => {
                let out = straighten_case(self.scene_mut()?, case_id)
                    .map_err(|e| ApiError::bad("case_id", e))?;
                self.record_shifts();
                Ok(Effect::Shifts(out))
            }
            Command::Subsets(SubsetsCmd { case_ids, visible }) => {
                let known: std::collections::HashSet<&str> =
                    self.data.base.cases.iter().map(|c| c.id.as_str()).collect();
                if let Some(bad) = case_ids.iter().position(|id| !known.contains(id.as_str())) {
                    return Err(ApiError::bad(
                        format!("case_ids[{bad}]"),
                        format!("no case `{}`", case_ids[bad]),
                    ));
                }
                let hidden = &mut self.view.hidden_cases;
                if *visible {
                    hidden.retain(|h| !case_ids.contains(h));
                } else {
                    for id in case_ids {
                        if !hidden.contains(id) {
                            hidden.push(id.clone());
                        }
                    }
                }
                self.recompile();
                Ok(Effect::None)
            }
            Command::View(ViewCmd {
                active,
                visible_classes,
                coloring,
                minority_on_top,
            }) => {
                let mut view = self.view.clone();
                if let Some(a) = active {
                    view.active = Some(a.clone());
                }
                if let Some(v) = visible_classes {
                    view.visible_classes = Some(v.clone());
                }
                if let Some(c) = coloring {
                    view.coloring = *c;
                }
                if let Some(m) = minority_on_top {
                    view.minority_on_top = *m;
                }
                let scene = ops::render(&self.data, None, ops::ViewKind::Polylines, &view)
                    .map_err(|e| ApiError::bad("active", e))?;
                self.view = view;
                self.scene = Some(Arc::new(scene));
                Ok(Effect::None)
            }
        }
    }

    /// Hash of everything the log determines.
    pub fn hash(&self) -> u64 {
        let blocks = self.blocks.as_ref().map(|b| {
            b.blocks
                .iter()
                .map(|hb| hb.to_json(&self.points))
                .collect::<Vec<_>>()
        });
        let model = self.model.as_ref().map(|m| m.to_json());
        let scene = self.scene.as_ref().map(|s| s.to_json());
        let text =
            serde_json::to_string(&(blocks, model, &self.view, scene)).expect("state serializes");
        let mut h = DefaultHasher::new();
        text.hash(&mut h);
        h.finish()
    }
}

/// The wire form of a session: enough to rebuild it by replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub id: String,
    pub revision: u64,
    pub csv: String,
    pub options: LoadOptions,
    pub log: Vec<Command>,
}

/// A committed session state. Readers hold an `Arc` to one of these and
/// never block writers.
#[derive(Debug, Clone)]
pub struct Committed {
    pub revision: u64,
    pub log: Vec<Command>,
    pub state: State,
}

pub struct Session {
    pub id: String,
    csv: String,
    options: LoadOptions,
    base: State,
    committed: RwLock<Arc<Committed>>,
    /// Serializes mutations.
    write: Mutex<()>,
}

impl Session {
    pub fn new(id: String, csv: String, options: LoadOptions) -> Result<Self, ApiError> {
        let data = ops::load(&csv, &options).map_err(|e| ApiError::bad("csv", e))?;
        let base = State::new(data);
        Ok(Session {
            id,
            csv,
            options,
            committed: RwLock::new(Arc::new(Committed {
                revision: 0,
                log: Vec::new(),
                state: base.clone(),
            })),
            base,
            write: Mutex::new(()),
        })
    }

    /// Latest committed state.
    pub fn current(&self) -> Arc<Committed> {
        self.committed.read().clone()
    }

    fn check(&self, expected: Option<u64>, current: u64) -> Result<(), ApiError> {
        match expected {
            Some(r) if r != current => Err(ApiError::conflict(format!(
                "revision {r} is stale; current is {current}"
            ))),
            _ => Ok(()),
        }
    }

    /// Apply a command on top of the committed state. `expected` is the
    /// revision the client last saw, if it sent one.
    pub fn execute(
        &self,
        cmd: Command,
        expected: Option<u64>,
    ) -> Result<(Arc<Committed>, Effect), ApiError> {
        let _guard = self.write.lock();
        let cur = self.current();
        self.check(expected, cur.revision)?;
        let mut state = cur.state.clone();
        let effect = state.apply(&cmd)?;
        let mut log = cur.log.clone();
        log.push(cmd);
        let next = Arc::new(Committed {
            revision: cur.revision + 1,
            log,
            state,
        });
        *self.committed.write() = next.clone();
        Ok((next, effect))
    }

    /// Drop the last command and rebuild by replay.
    pub fn undo(&self, expected: Option<u64>) -> Result<Arc<Committed>, ApiError> {
        let _guard = self.write.lock();
        let cur = self.current();
        self.check(expected, cur.revision)?;
        if cur.log.is_empty() {
            return Err(ApiError::bad("log", "nothing to undo"));
        }
        let log = cur.log[..cur.log.len() - 1].to_vec();
        let state = self.replay(&log)?;
        let next = Arc::new(Committed {
            revision: cur.revision + 1,
            log,
            state,
        });
        *self.committed.write() = next.clone();
        Ok(next)
    }

    /// State obtained by applying `log` to the freshly loaded dataset.
    pub fn replay(&self, log: &[Command]) -> Result<State, ApiError> {
        let mut state = self.base.clone();
        for cmd in log {
            state.apply(cmd)?;
        }
        Ok(state)
    }

    pub fn snapshot(&self) -> Snapshot {
        let cur = self.current();
        Snapshot {
            id: self.id.clone(),
            revision: cur.revision,
            csv: self.csv.clone(),
            options: self.options.clone(),
            log: cur.log.clone(),
        }
    }

    pub fn restore(snap: Snapshot) -> Result<Self, ApiError> {
        let s = Session::new(snap.id, snap.csv, snap.options)?;
        let state = s.replay(&snap.log)?;
        *s.committed.write() = Arc::new(Committed {
            revision: snap.revision,
            log: snap.log,
            state,
        });
        Ok(s)
    }
}

/// All live sessions, with optional snapshot persistence.
#[derive(Default)]
pub struct Store {
    sessions: RwLock<HashMap<String, Arc<Session>>>,
    snapshot_dir: Option<PathBuf>,
}

impl Store {
    pub fn new(snapshot_dir: Option<PathBuf>) -> Self {
        Store {
            sessions: RwLock::new(HashMap::new()),
            snapshot_dir,
        }
    }

    /// Store seeded from the snapshots in its directory.
    pub fn restore(dir: PathBuf) -> anyhow::Result<Self> {
        std::fs::create_dir_all(&dir)?;
        let store = Store::new(Some(dir.clone()));
        let mut paths: Vec<_> = std::fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        for p in paths {
            let snap: Snapshot = serde_json::from_str(&std::fs::read_to_string(&p)?)?;
            let s = Session::restore(snap)?;
            store.sessions.write().insert(s.id.clone(), Arc::new(s));
        }
        Ok(store)
    }

    pub fn create(&self, csv: String, options: LoadOptions) -> Result<Arc<Session>, ApiError> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let s = Arc::new(Session::new(id.clone(), csv, options)?);
        self.sessions.write().insert(id, s.clone());
        self.persist(&s);
        Ok(s)
    }

    pub fn get(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        self.sessions
            .read()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("no session `{id}`")))
    }

    /// Write the session's snapshot when persistence is on. Failures are
    /// reported on stderr and do not fail the request.
    pub fn persist(&self, s: &Session) {
        let Some(dir) = &self.snapshot_dir else {
            return;
        };
        let path = dir.join(format!("{}.json", s.id));
        let text = serde_json::to_string(&s.snapshot()).expect("snapshot serializes");
        if let Err(e) = std::fs::write(&path, text) {
            eprintln!("snapshot {}: {e}", path.display());
        }
    }
}
