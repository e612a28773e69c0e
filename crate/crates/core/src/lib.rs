//! Allocation-only algorithms for instance segmentation of low-light mine imagery.
//!
//! The crate is `no_std` (it needs `alloc`). Everything that touches the filesystem,
//! PNG/JSON encoding or the command line lives in the `minevis` companion crate.
//!
//! Module map:
//!
//! * [`raster`]: images, binary masks, class labels and instances.
//! * [`rle`]: the `value:count` run-length mask encoding used on the wire.
//! * [`enhance`]: Retinex-style decompose / adjust / recombine enhancement.
//! * [`degrade`] and [`filter`]: synthetic low-light pairs and dataset cleaning.
//! * [`losses`] and [`gradcheck`]: detection and mask losses with analytic gradients.
//! * [`fusion`]: ORB alignment, mask intersection, closing and grid rules.
//! * [`eval`]: instance matching, F1 and mIoU.
//! * [`mock`]: a seeded ground-truth perturber that stands in for neural segmenters.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;

pub mod degrade;
pub mod enhance;
pub mod eval;
pub mod filter;
pub mod fusion;
pub mod gradcheck;
pub mod losses;
pub mod mock;
pub mod morphology;
pub mod raster;
pub mod rle;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
pub use raster::{BBox, BinaryMask, ClassId, Instance, InstanceSet, RasterImage};
