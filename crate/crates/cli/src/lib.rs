//! Command line and HTTP surfaces over the `hyperview` pipeline.

pub mod api;
pub mod cli;
pub mod ops;
pub mod session;
