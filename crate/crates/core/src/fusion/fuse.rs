use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::imageops::blur_buffer;
use super::matching::match_features;
use super::orb::detect_orb;
use super::transform::{estimate_transform, PlanarTransform};
use super::FusionConfig;
use crate::error::{Error, Result};
use crate::morphology::close;
use crate::raster::{BinaryMask, ClassId, Instance, InstanceSet, RasterImage};

/// Inverse-mapped nearest-neighbour resampling: output pixel `p` takes the input value at
/// `t⁻¹(p)`. Pixels whose preimage falls outside the mask are unset.
pub fn warp_mask(mask: &BinaryMask, t: &PlanarTransform) -> BinaryMask {
    let (w, h) = mask.dims();
    if *t == PlanarTransform::identity() {
        return mask.clone();
    }
    let inv = t.inverse();
    BinaryMask::from_fn(w, h, |x, y| {
        let (sx, sy) = inv.apply(x as f64, y as f64);
        mask.get_signed(libm::floor(sx + 0.5) as i64, libm::floor(sy + 0.5) as i64)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InstancePair {
    pub a: usize,
    pub b: usize,
    pub iou: f64,
}

/// Greedy one-to-one pairing by descending IoU among instances of equal class. Ties go to
/// the lower `(a, b)` index pair.
pub fn pair_instances(set_a: &InstanceSet, set_b: &InstanceSet, cfg: &FusionConfig) -> Result<Vec<InstancePair>> {
    set_a.check_same_dims(set_b)?;
    let mut candidates = Vec::new();
    for (i, a) in set_a.instances().iter().enumerate() {
        for (j, b) in set_b.instances().iter().enumerate() {
            if a.class() != b.class() {
                continue;
            }
            let (inter, union) = a.mask().overlap_counts(b.mask())?;
            let iou = if union == 0 { 0.0 } else { inter as f64 / union as f64 };
            if inter > 0 && iou >= cfg.pair_iou_min {
                candidates.push(InstancePair { a: i, b: j, iou });
            }
        }
    }
    candidates.sort_by(|x, y| y.iou.total_cmp(&x.iou).then(x.a.cmp(&y.a)).then(x.b.cmp(&y.b)));
    let mut used_a = alloc::vec![false; set_a.len()];
    let mut used_b = alloc::vec![false; set_b.len()];
    let mut out = Vec::new();
    for p in candidates {
        if !used_a[p.a] && !used_b[p.b] {
            used_a[p.a] = true;
            used_b[p.b] = true;
            out.push(p);
        }
    }
    Ok(out)
}

/// The pre-closing fused mask in B's frame.
pub fn intersect_aligned(
    mask_a: &BinaryMask,
    mask_b: &BinaryMask,
    t: &PlanarTransform,
    cfg: &FusionConfig,
) -> Result<BinaryMask> {
    let warped_a = warp_mask(mask_a, t);
    if cfg.symmetric_paper_mode {
        warped_a.intersection(&warp_mask(mask_b, &t.inverse()))
    } else {
        warped_a.intersection(mask_b)
    }
}

/// Intersection of the aligned masks followed by a closing with a `struct_elem` square.
pub fn fuse_pair(
    mask_a: &BinaryMask,
    mask_b: &BinaryMask,
    t: &PlanarTransform,
    cfg: &FusionConfig,
) -> Result<BinaryMask> {
    Ok(close(&intersect_aligned(mask_a, mask_b, t, cfg)?, cfg.struct_elem))
}

/// Fraction of the mask's pixels that lie in the bottom grid row.
pub fn bottom_row_fraction(mask: &BinaryMask, cfg: &FusionConfig) -> f64 {
    let count = mask.count();
    if count == 0 {
        return 0.0;
    }
    let rows = cfg.grid_rows;
    let start = (rows - 1) * mask.height() / rows;
    let inside = mask.set_pixels().filter(|&(_, y)| y >= start).count();
    inside as f64 / count as f64
}

/// Relabels as road every instance of a rule class with at least `grid_row_fraction` of its
/// pixels in the bottom grid row.
pub fn apply_grid_rules(set: &InstanceSet, cfg: &FusionConfig) -> InstanceSet {
    let mut out = set.empty_like();
    for inst in set.instances() {
        let relabel = cfg.grid_rule_classes.contains(&inst.class())
            && bottom_row_fraction(inst.mask(), cfg) >= cfg.grid_row_fraction;
        let inst = if relabel {
            inst.clone().with_class(ClassId::Road)
        } else {
            inst.clone()
        };
        out.push(inst).expect("same dimensions");
    }
    out
}

fn class_intensity(class: ClassId) -> f64 {
    0.3 + 0.7 * (class.index() + 1) as f64 / ClassId::ALL.len() as f64
}

/// Grey-level rendering of a prediction set: each class painted at its own intensity
/// (maximum where instances overlap), then Gaussian-blurred.
pub fn render_set(set: &InstanceSet, sigma: f64) -> RasterImage {
    let (w, h) = set.dims();
    let mut values = alloc::vec![0.0; w * h];
    for inst in set.instances() {
        let v = class_intensity(inst.class());
        for (x, y) in inst.mask().set_pixels() {
            let px = &mut values[y * w + x];
            *px = f64::max(*px, v);
        }
    }
    RasterImage::from_vec_clamped(w, h, 1, blur_buffer(&values, w, h, sigma))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "status", rename_all = "snake_case"))]
pub enum AlignmentOutcome {
    /// Alignment switched off in the configuration.
    Disabled,
    Aligned {
        transform: PlanarTransform,
        matches: usize,
    },
    /// Estimation failed and the identity was used instead.
    Fallback {
        reason: String,
    },
}

impl AlignmentOutcome {
    pub fn transform(&self) -> PlanarTransform {
        match self {
            AlignmentOutcome::Aligned { transform, .. } => *transform,
            _ => PlanarTransform::identity(),
        }
    }

    pub fn is_fallback(&self) -> bool {
        matches!(self, AlignmentOutcome::Fallback { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FusionReport {
    pub image_id: String,
    pub alignment: AlignmentOutcome,
    pub pairs: Vec<InstancePair>,
    pub unmatched_a: Vec<usize>,
    pub unmatched_b: Vec<usize>,
    /// Fused masks that came out empty.
    pub dropped_empty: usize,
    /// Instances relabelled by the grid rule.
    pub reclassified: usize,
}

fn estimate_alignment(set_a: &InstanceSet, set_b: &InstanceSet, cfg: &FusionConfig) -> AlignmentOutcome {
    if !cfg.align {
        return AlignmentOutcome::Disabled;
    }
    if set_a.is_empty() || set_b.is_empty() {
        return AlignmentOutcome::Fallback {
            reason: "empty prediction set".into(),
        };
    }
    let fa = detect_orb(&render_set(set_a, cfg.render_blur_sigma), cfg);
    let fb = detect_orb(&render_set(set_b, cfg.render_blur_sigma), cfg);
    let result =
        match_features(&fa, &fb, cfg).and_then(|m| estimate_transform(&m, &fa, &fb, cfg).map(|t| (t, m.len())));
    match result {
        Ok((transform, matches)) => AlignmentOutcome::Aligned { transform, matches },
        Err(e) => AlignmentOutcome::Fallback { reason: e.to_string() },
    }
}

/// Fuses two prediction sets for the same image. B's frame is the reference; the output
/// lives in it. `image` only has to agree in size with the predictions.
pub fn fuse_sets(
    set_a: &InstanceSet,
    set_b: &InstanceSet,
    image: &RasterImage,
    cfg: &FusionConfig,
) -> Result<(InstanceSet, FusionReport)> {
    set_a.check_same_dims(set_b)?;
    let (w, h) = set_b.dims();
    if image.dims() != (w, h) {
        return Err(Error::dims((w, h), image.dims()));
    }
    let alignment = estimate_alignment(set_a, set_b, cfg);
    let t = alignment.transform();
    let warped_a = InstanceSet::from_instances(
        set_a.image_id.clone(),
        w,
        h,
        set_a
            .instances()
            .iter()
            .filter_map(|inst| {
                let m = warp_mask(inst.mask(), &t);
                (!m.is_empty()).then(|| Instance::new(inst.class(), m, inst.score()).expect("nonempty"))
            })
            .collect(),
    )?;
    // warping can empty a mask, so keep a map back to A's indices
    let a_index: Vec<usize> = set_a
        .instances()
        .iter()
        .enumerate()
        .filter(|(_, inst)| !warp_mask(inst.mask(), &t).is_empty())
        .map(|(i, _)| i)
        .collect();

    let mut pairs = pair_instances(&warped_a, set_b, cfg)?;
    pairs.sort_by_key(|p| p.b);
    let mut fused = set_b.empty_like();
    let mut dropped_empty = 0;
    for p in &pairs {
        let a = &set_a.instances()[a_index[p.a]];
        let b = &set_b.instances()[p.b];
        let mask = fuse_pair(a.mask(), b.mask(), &t, cfg)?;
        if mask.is_empty() {
            dropped_empty += 1;
            continue;
        }
        fused.push(Instance::new(b.class(), mask, a.score().min(b.score()))?)?;
    }
    let mut used_a = alloc::vec![false; set_a.len()];
    let mut used_b = alloc::vec![false; set_b.len()];
    for p in &pairs {
        used_a[a_index[p.a]] = true;
        used_b[p.b] = true;
    }
    let unmatched_b: Vec<usize> = (0..set_b.len()).filter(|&j| !used_b[j]).collect();
    let unmatched_a: Vec<usize> = (0..set_a.len()).filter(|&i| !used_a[i]).collect();
    if cfg.keep_unmatched {
        for &j in &unmatched_b {
            fused.push(set_b.instances()[j].clone())?;
        }
        for (k, &i) in a_index.iter().enumerate() {
            if !used_a[i] {
                fused.push(warped_a.instances()[k].clone())?;
            }
        }
    }
    let before: Vec<ClassId> = fused.instances().iter().map(|i| i.class()).collect();
    let out = apply_grid_rules(&fused, cfg);
    let reclassified = before
        .iter()
        .zip(out.instances())
        .filter(|(c, i)| **c != i.class())
        .count();
    for p in &mut pairs {
        p.a = a_index[p.a];
    }
    let report = FusionReport {
        image_id: set_b.image_id.clone(),
        alignment,
        pairs,
        unmatched_a,
        unmatched_b,
        dropped_empty,
        reclassified,
    };
    Ok((out, report))
}
