//! Hyperblock classifiers over normalized tabular data, with
//! parallel-coordinates scene geometry for inspecting them.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the common choices.

pub mod classifier;
pub mod dataset;
pub mod dtree;
pub mod error;
pub mod evaluation;
pub mod hyperblock;
pub mod linguistic;
pub mod mhyper;
pub mod points;
pub mod rules;
pub mod scalar;
pub mod split;
pub mod viz;

pub use classifier::{HyperModel, ModelConfig, Prediction, Rule};
pub use dataset::{normalize, parse_table, Case, Cell, Dataset, NormalizedDataset, ParseOptions};
pub use error::{Error, Result};
pub use hyperblock::{Distance, HyperBlock, Interval};
pub use mhyper::{HBSet, MergeConfig};
pub use points::Points;
pub use rules::ThresholdRule;
pub use scalar::Scalar;
pub use split::SplitSpec;
pub use viz::{Primitive, Scene, SceneOptions};

pub type Block = HyperBlock<f64>;
pub type Block32 = HyperBlock<f32>;
pub type BlockSet = HBSet<f64>;
pub type BlockSet32 = HBSet<f32>;
pub type Model = HyperModel<f64>;
pub type Model32 = HyperModel<f32>;
