//! File formats, batch pipeline and command line for `minevis-core`.
//!
//! * [`io`]: PNG images and the per-image prediction JSON (`mask_rle` masks).
//! * [`config`]: the TOML run configuration.
//! * [`pipeline`]: `run`, the end-to-end batch with its manifest.
//! * [`report`]: directory evaluation and CSV export.
//! * [`render`]: class-coloured overlays.
//! * [`cli`]: the `minevis` command.

pub mod cli;
pub mod config;
mod error;
pub mod io;
pub mod pipeline;
pub mod render;
pub mod report;

pub use error::{AppError, Result};
