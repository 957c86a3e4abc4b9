//! The `hyperview` command line.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use hyperview::classifier::ModelBundle;
use hyperview::linguistic::Style;
use hyperview::viz::{render_svg, Coloring, LanePlacement};
use hyperview::{Distance, HyperModel, NormalizedDataset};

use crate::ops::{
    self, BlockParams, CrossvalParams, LearnParams, LoadOptions, ViewKind, ViewState,
};
use crate::session::Store;

#[derive(Debug, Parser)]
#[command(
    name = "hyperview",
    version,
    about = "Hyperblock classifiers and parallel-coordinates scenes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Parse a table and summarize it.
    Load {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        json: bool,
    },
    /// Build hyperblocks.
    #[command(subcommand)]
    Hb(HbCmd),
    /// Learn a model on every complete case.
    Learn {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        learn: LearnArgs,
        /// Write the model bundle here.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Classify one point given in raw units.
    Classify {
        #[command(flatten)]
        data: DataArgs,
        /// Model bundle from `learn --model`; learned on the spot when absent.
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        learn: LearnArgs,
        /// `5,1,1,...` in coordinate order, or `X1=5,X2=1,...`.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Stratified k-fold cross-validation.
    Crossval {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[command(flatten)]
        learn: LearnArgs,
        /// Exit nonzero when the mean accuracy (in percent) is below this.
        #[arg(long, value_name = "MIN_PERCENT")]
        assert: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Greedy threshold rules for two-class data.
    Rules {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 1)]
        max_dims: usize,
        /// Restrict the search to these coordinates.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<String>>,
        /// Score a given rule instead, e.g. "X6 < 3 -> B".
        #[arg(long)]
        apply: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Describe classes or blocks by where their values concentrate.
    Describe {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_enum, default_value_t = StyleArg::Structured)]
        style: StyleArg,
        #[arg(long, default_value_t = 0.5)]
        cutoff: f64,
        /// Describe the pure blocks instead of the classes.
        #[arg(long)]
        blocks: bool,
        #[command(flatten)]
        block: BlockArgs,
        #[arg(long)]
        json: bool,
    },
    /// Compile a scene and write it as SVG and/or JSON.
    Render {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_enum, default_value_t = ViewArg::Polylines)]
        view: ViewArg,
        #[arg(long, value_name = "PATH")]
        svg: Option<PathBuf>,
        /// Scene JSON output; stdout when neither output is given.
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
        /// Coordinates to show, in order.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<String>>,
        /// Classes to show.
        #[arg(long, value_delimiter = ',')]
        classes: Option<Vec<String>>,
        #[arg(long, value_enum, default_value_t = ColoringArg::ByClass)]
        coloring: ColoringArg,
        /// Which class is drawn last, on top.
        #[arg(long, value_enum, default_value_t = ClassOrder::MinorityOnTop)]
        class_order: ClassOrder,
        /// Lane for missing-value tokens.
        #[arg(long, value_enum, default_value_t = EcvArg::Below)]
        ecv: EcvArg,
        /// Bins per axis for the frequency view on non-integer data.
        #[arg(long, default_value_t = 10)]
        bins: usize,
        #[command(flatten)]
        block: BlockArgs,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, env = "HYPERVIEW_PORT", default_value_t = 8080)]
        port: u16,
        /// Persist session snapshots here and restore them on start.
        #[arg(long)]
        snapshot_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum HbCmd {
    /// Maximal pure blocks from seed boxes.
    Gen {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        block: BlockArgs,
        /// Write the merge trace as JSON lines.
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Pure blocks followed by dominant merging.
    Merge {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        block: BlockArgs,
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Delimited table with a header row.
    pub path: PathBuf,
    /// Class column by name or index; the last column by default.
    #[arg(long)]
    pub class_column: Option<String>,
    #[arg(long)]
    pub id_column: Option<String>,
    /// Extra value to read as missing (repeatable).
    #[arg(long = "missing-token", allow_hyphen_values = true)]
    pub missing_tokens: Vec<String>,
    /// Class that wins label ties.
    #[arg(long)]
    pub high_risk: Option<String>,
}

impl DataArgs {
    fn options(&self) -> LoadOptions {
        LoadOptions {
            class_column: self.class_column.clone(),
            id_column: self.id_column.clone(),
            missing_tokens: self.missing_tokens.clone(),
            high_risk_class: self.high_risk.clone(),
        }
    }

    fn load(&self) -> anyhow::Result<NormalizedDataset<f64>> {
        let text = std::fs::read_to_string(&self.path)
            .with_context(|| format!("reading {}", self.path.display()))?;
        Ok(ops::load(&text, &self.options())?)
    }
}

#[derive(Debug, Args)]
pub struct BlockArgs {
    /// Half side length of the seed boxes, in normalized units.
    #[arg(long, default_value_t = 0.2)]
    pub half_length: f64,
    /// Dominant merging threshold; 0 keeps pure blocks.
    #[arg(long, default_value_t = 0.0)]
    pub impurity: f64,
    /// Shuffle the processing order with this seed.
    #[arg(long)]
    pub order_seed: Option<u64>,
}

impl BlockArgs {
    fn params(&self) -> BlockParams {
        BlockParams {
            half_length: self.half_length,
            impurity_threshold: self.impurity,
            order_seed: self.order_seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    /// Candidate k values; chosen on the held-back part when several.
    #[arg(long, value_delimiter = ',', default_values_t = [3])]
    pub k: Vec<usize>,
    #[arg(long, default_value = "N1", value_parser = parse_distance)]
    pub variant: Distance,
    /// Share of the training data used for blocks; the rest picks k.
    #[arg(long, default_value_t = 1.0)]
    pub hb_fraction: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[command(flatten)]
    pub block: BlockArgs,
}

fn parse_distance(s: &str) -> Result<Distance, String> {
    s.parse().map_err(|e: hyperview::Error| e.to_string())
}

impl LearnArgs {
    fn params(&self) -> LearnParams {
        LearnParams {
            k: self.k.clone(),
            variant: self.variant,
            hb_fraction: self.hb_fraction,
            seed: self.seed,
            blocks: self.block.params(),
            refusal_radius: None,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StyleArg {
    Structured,
    Sentence,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ViewArg {
    Polylines,
    #[value(alias = "side-by-side")]
    Sidebyside,
    Heat,
    Frequency,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ColoringArg {
    ByClass,
    Spread,
    GoldenAngle,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ClassOrder {
    MinorityOnTop,
    MajorityOnTop,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EcvArg {
    Below,
    Above,
    /// Leave incomplete cases out.
    Off,
}

fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_model(path: &Path, data: &NormalizedDataset<f64>) -> anyhow::Result<HyperModel<f64>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let bundle: ModelBundle =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(HyperModel::from_bundle(&bundle, data.complete_points())?)
}

fn blocks_text(s: &ops::BlockSetSummary) -> String {
    let mut out = format!(
        "{} blocks ({} pure, {} single-case)\n",
        s.count, s.pure, s.singletons
    );
    for b in &s.blocks {
        let counts: Vec<String> = b
            .counts
            .iter()
            .map(|c| format!("{}={}", c.class, c.count))
            .collect();
        out += &format!(
            "{:>4}  {:<6} {:>5}  impurity {:.3}  {}\n",
            b.index + 1,
            b.label,
            b.size,
            b.impurity,
            counts.join(" ")
        );
    }
    out
}

fn hb(
    data: &DataArgs,
    block: &BlockArgs,
    trace: Option<&Path>,
    json: bool,
    out: &mut dyn Write,
) -> anyhow::Result<i32> {
    let d = data.load()?;
    let points = d.complete_points();
    let set = ops::build_blocks(&points, &block.params())?;
    if let Some(p) = trace {
        write_file(p, &set.trace_jsonl())?;
    }
    let s = ops::blocks_summary(&set, &points, &d);
    if json {
        writeln!(out, "{}", serde_json::to_string(&s)?)?;
    } else {
        write!(out, "{}", blocks_text(&s))?;
    }
    Ok(0)
}

fn execute(cmd: Cmd, out: &mut dyn Write) -> anyhow::Result<i32> {
    match cmd {
        Cmd::Load { data, json } => {
            let d = data.load()?;
            let s = ops::summary(&d.base);
            if json {
                writeln!(out, "{}", serde_json::to_string(&s)?)?;
            } else {
                let classes: Vec<String> = s
                    .classes
                    .iter()
                    .map(|c| format!("{} {}", c.class, c.count))
                    .collect();
                writeln!(
                    out,
                    "{} cases ({} complete), {} coordinates, classes: {}",
                    s.cases,
                    s.complete,
                    s.coordinates.len(),
                    classes.join(", ")
                )?;
                if s.missing_cells > 0 {
                    writeln!(
                        out,
                        "{} missing cells, tokens: {:?}",
                        s.missing_cells, s.missing_tokens
                    )?;
                }
            }
            Ok(0)
        }
        Cmd::Hb(HbCmd::Gen {
            data,
            block,
            trace,
            json,
        }) => {
            if block.impurity != 0.0 {
                bail!("`hb gen` builds pure blocks; use `hb merge --impurity`");
            }
            hb(&data, &block, trace.as_deref(), json, out)
        }
        Cmd::Hb(HbCmd::Merge {
            data,
            block,
            trace,
            json,
        }) => hb(&data, &block, trace.as_deref(), json, out),
        Cmd::Learn {
            data,
            learn,
            model,
            json,
        } => {
            let d = data.load()?;
            let m = ops::learn_model(&d, &learn.params())?;
            if let Some(p) = model {
                write_file(&p, &m.to_json())?;
            }
            let s = ops::model_summary(&m);
            if json {
                writeln!(out, "{}", serde_json::to_string(&s)?)?;
            } else {
                writeln!(out, "{} blocks, k = {}, {}", s.blocks, s.k, s.variant)?;
                for (k, acc) in &s.k_accuracy {
                    writeln!(out, "  k = {k}: {:.2}%", 100.0 * acc)?;
                }
            }
            Ok(0)
        }
        Cmd::Classify {
            data,
            model,
            learn,
            point,
        } => {
            let d = data.load()?;
            let m = match model {
                Some(p) => load_model(&p, &d)?,
                None => ops::learn_model(&d, &learn.params())?,
            };
            let raw = ops::parse_point_arg(&d.base, &point)?;
            writeln!(
                out,
                "{}",
                serde_json::to_string(&ops::classify(&m, &d, &raw))?
            )?;
            Ok(0)
        }
        Cmd::Crossval {
            data,
            folds,
            learn,
            assert,
            json,
        } => {
            let d = data.load()?;
            let report = ops::crossval(
                &d,
                &CrossvalParams {
                    folds,
                    learn: learn.params(),
                },
            )?;
            if json {
                writeln!(out, "{}", report.to_json())?;
            } else {
                write!(out, "{}", report.table())?;
            }
            let mean = 100.0 * report.summary.mean;
            match assert {
                Some(min) if mean < min => {
                    eprintln!("mean accuracy {mean:.2}% is below {min}%");
                    Ok(1)
                }
                _ => Ok(0),
            }
        }
        Cmd::Rules {
            data,
            max_dims,
            dims,
            apply,
            json,
        } => {
            let d = data.load()?;
            let r = match apply {
                Some(text) => ops::rules_apply(&d.base, &text)?,
                None => ops::rules_search(&d.base, max_dims, dims.as_deref())?,
            };
            if json {
                writeln!(out, "{}", serde_json::to_string(&r)?)?;
            } else {
                writeln!(out, "{}", r.line)?;
            }
            Ok(0)
        }
        Cmd::Describe {
            data,
            style,
            cutoff,
            blocks,
            block,
            json,
        } => {
            let d = data.load()?;
            let style = match style {
                StyleArg::Structured => Style::Structured,
                StyleArg::Sentence => Style::Sentence,
            };
            let desc = if blocks {
                let points = d.complete_points();
                let set = ops::build_blocks(&points, &block.params())?;
                ops::describe_blocks(&set, &points, style, cutoff)
            } else {
                ops::describe_classes(&d, style, cutoff)
            };
            if json {
                writeln!(out, "{}", serde_json::to_string(&desc)?)?;
            } else {
                write!(out, "{}", desc.text)?;
            }
            Ok(0)
        }
        Cmd::Render {
            data,
            view,
            svg,
            json,
            dims,
            classes,
            coloring,
            class_order,
            ecv,
            bins,
            block,
        } => {
            let d = data.load()?;
            let state = ViewState {
                active: dims,
                visible_classes: classes,
                coloring: match coloring {
                    ColoringArg::ByClass => Coloring::ByClass,
                    ColoringArg::Spread => Coloring::Spread,
                    ColoringArg::GoldenAngle => Coloring::GoldenAngle,
                },
                minority_on_top: matches!(class_order, ClassOrder::MinorityOnTop),
                missing: match ecv {
                    EcvArg::Below => Some(LanePlacement::Below),
                    EcvArg::Above => Some(LanePlacement::Above),
                    EcvArg::Off => None,
                },
                bins,
                ..ViewState::default()
            };
            let view = match view {
                ViewArg::Polylines => ViewKind::Polylines,
                ViewArg::Sidebyside => ViewKind::Sidebyside,
                ViewArg::Heat => ViewKind::Heat,
                ViewArg::Frequency => ViewKind::Frequency,
            };
            let blocks = match view {
                ViewKind::Sidebyside | ViewKind::Heat => {
                    Some(ops::build_blocks(&d.complete_points(), &block.params())?)
                }
                _ => None,
            };
            let scene = ops::render(&d, blocks.as_ref(), view, &state)?;
            if let Some(p) = &svg {
                write_file(p, &render_svg(&scene))?;
            }
            if let Some(p) = &json {
                write_file(p, &scene.to_json())?;
            }
            if svg.is_none() && json.is_none() {
                writeln!(out, "{}", scene.to_json())?;
            }
            Ok(0)
        }
        Cmd::Serve { port, snapshot_dir } => {
            let store = match snapshot_dir {
                Some(dir) => Store::restore(dir)?,
                None => Store::new(None),
            };
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(crate::api::serve(Arc::new(store), port))?;
            Ok(0)
        }
    }
}

/// Run with `args` (program name first). Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                eprint!("{text}");
            }
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
