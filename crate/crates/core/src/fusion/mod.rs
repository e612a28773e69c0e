//! Dual-prediction mask fusion.
//!
//! Masks from two segmenters are aligned with ORB features detected on renderings of
//! each prediction set, warped into a common frame, intersected, closed
//! morphologically, and finally relabelled by the bottom-row grid rule.

mod fuse;
mod imageops;
mod matching;
mod orb;
mod pattern;
mod transform;

use alloc::collections::BTreeSet;

pub use fuse::{
    apply_grid_rules, bottom_row_fraction, fuse_pair, fuse_sets, intersect_aligned, pair_instances, render_set,
    warp_mask, AlignmentOutcome, FusionReport, InstancePair,
};
pub use imageops::{gaussian_blur, resize_bilinear, warp_image};
pub use matching::{match_features, FeatureMatch};
pub use orb::{detect_orb, Descriptor, OrbFeature};
pub use pattern::{BRIEF_PATTERN, PATTERN_SEED};
pub use transform::{estimate_transform, ransac_similarity, PlanarTransform, RansacFit, TransformKind};

use crate::error::{Error, Result};
use crate::raster::ClassId;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct FusionConfig {
    pub max_features: usize,
    /// FAST intensity delta on the `[0, 1]` scale.
    pub fast_threshold: f64,
    pub pyramid_levels: usize,
    pub pyramid_scale: f64,
    /// Lowe ratio for the nearest / second-nearest Hamming distance.
    pub match_ratio: f64,
    pub ransac_iters: usize,
    pub ransac_inlier_px: f64,
    /// Estimates with a lower inlier fraction are rejected.
    pub min_inlier_ratio: f64,
    /// Estimates supported by fewer correspondences are rejected.
    pub min_inliers: usize,
    pub min_scale: f64,
    pub max_scale: f64,
    /// Seeds RANSAC sampling.
    pub seed: u64,
    /// When false the transform is always the identity (ablation).
    pub align: bool,
    /// Gaussian sigma applied to mask renderings before feature detection.
    pub render_blur_sigma: f64,
    pub pair_iou_min: f64,
    pub keep_unmatched: bool,
    /// Side of the square structuring element used for closing; odd.
    pub struct_elem: usize,
    /// Intersect A warped into B's frame with B warped into A's frame instead of
    /// intersecting warped A with B.
    pub symmetric_paper_mode: bool,
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub grid_row_fraction: f64,
    pub grid_rule_classes: BTreeSet<ClassId>,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            max_features: 500,
            fast_threshold: 0.08,
            pyramid_levels: 4,
            pyramid_scale: 1.2,
            match_ratio: 0.75,
            ransac_iters: 1000,
            ransac_inlier_px: 3.0,
            min_inlier_ratio: 0.3,
            min_inliers: 8,
            min_scale: 0.5,
            max_scale: 2.0,
            seed: 0,
            align: true,
            render_blur_sigma: 1.0,
            pair_iou_min: 0.5,
            keep_unmatched: false,
            struct_elem: 5,
            symmetric_paper_mode: false,
            grid_rows: 4,
            grid_cols: 4,
            grid_row_fraction: 0.3,
            grid_rule_classes: [ClassId::Wall, ClassId::Roof, ClassId::Road].into_iter().collect(),
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.max_features == 0 {
            return bad("max_features must be >= 1");
        }
        if !(self.fast_threshold > 0.0 && self.fast_threshold < 1.0) {
            return bad("fast_threshold must be in (0, 1)");
        }
        if self.pyramid_levels == 0 || !(self.pyramid_scale > 1.0) {
            return bad("pyramid needs >= 1 level and a scale > 1");
        }
        if !(self.match_ratio > 0.0 && self.match_ratio <= 1.0) {
            return bad("match_ratio must be in (0, 1]");
        }
        if self.ransac_iters == 0 || !(self.ransac_inlier_px > 0.0) {
            return bad("RANSAC needs iterations and a positive inlier threshold");
        }
        if !(0.0..=1.0).contains(&self.min_inlier_ratio) {
            return bad("min_inlier_ratio must be in [0, 1]");
        }
        if !(self.min_scale > 0.0 && self.min_scale <= 1.0 && self.max_scale >= 1.0) {
            return bad("scale bounds must bracket 1");
        }
        if !(0.0..=1.0).contains(&self.pair_iou_min) {
            return bad("pair_iou_min must be in [0, 1]");
        }
        if self.struct_elem == 0 || self.struct_elem.is_multiple_of(2) {
            return bad("struct_elem must be odd");
        }
        if self.grid_rows == 0 || self.grid_cols == 0 {
            return bad("grid must have at least one row and column");
        }
        if !(self.grid_row_fraction > 0.0 && self.grid_row_fraction <= 1.0) {
            return bad("grid_row_fraction must be in (0, 1]");
        }
        Ok(())
    }
}
