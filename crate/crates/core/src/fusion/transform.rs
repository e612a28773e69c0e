//! Similarity transforms and their robust estimation from point correspondences.

use alloc::vec::Vec;

use super::matching::FeatureMatch;
use super::orb::OrbFeature;
use super::FusionConfig;
use crate::error::{Error, Result};
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum TransformKind {
    Identity,
    Similarity,
}

/// `p' = scale * R(rotation) * p + (tx, ty)`, mapping frame A into frame B.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlanarTransform {
    pub kind: TransformKind,
    pub scale: f64,
    /// Radians, counter-clockwise in image coordinates (y down).
    pub rotation: f64,
    pub tx: f64,
    pub ty: f64,
}

impl Default for PlanarTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl PlanarTransform {
    pub const fn identity() -> Self {
        Self {
            kind: TransformKind::Identity,
            scale: 1.0,
            rotation: 0.0,
            tx: 0.0,
            ty: 0.0,
        }
    }

    pub fn similarity(scale: f64, rotation: f64, tx: f64, ty: f64) -> Self {
        Self {
            kind: TransformKind::Similarity,
            scale,
            rotation,
            tx,
            ty,
        }
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        Self::similarity(1.0, 0.0, tx, ty)
    }

    /// From the linear parameters `a = s cos θ`, `b = s sin θ`.
    fn from_linear(a: f64, b: f64, tx: f64, ty: f64) -> Self {
        Self::similarity(libm::hypot(a, b), libm::atan2(b, a), tx, ty)
    }

    fn linear(&self) -> (f64, f64) {
        (
            self.scale * libm::cos(self.rotation),
            self.scale * libm::sin(self.rotation),
        )
    }

    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        if self.kind == TransformKind::Identity {
            return (x, y);
        }
        let (a, b) = self.linear();
        (a * x - b * y + self.tx, b * x + a * y + self.ty)
    }

    pub fn inverse(&self) -> Self {
        if self.kind == TransformKind::Identity {
            return *self;
        }
        let inv_s = 1.0 / self.scale;
        let rot = -self.rotation;
        let (c, s) = (libm::cos(rot), libm::sin(rot));
        let tx = -inv_s * (c * self.tx - s * self.ty);
        let ty = -inv_s * (s * self.tx + c * self.ty);
        Self::similarity(inv_s, rot, tx, ty)
    }

    /// Mean distance between where `self` and `other` send the four corners of a
    /// `width x height` frame.
    pub fn corner_error(&self, other: &PlanarTransform, width: usize, height: usize) -> f64 {
        let (w, h) = ((width.max(1) - 1) as f64, (height.max(1) - 1) as f64);
        [(0.0, 0.0), (w, 0.0), (0.0, h), (w, h)]
            .iter()
            .map(|&(x, y)| {
                let (ax, ay) = self.apply(x, y);
                let (bx, by) = other.apply(x, y);
                libm::hypot(ax - bx, ay - by)
            })
            .sum::<f64>()
            / 4.0
    }
}

/// Least-squares similarity over the selected correspondences.
fn fit_least_squares(
    src: &[(f64, f64)],
    dst: &[(f64, f64)],
    select: impl Fn(usize) -> bool,
) -> Option<PlanarTransform> {
    let idx: Vec<usize> = (0..src.len()).filter(|&i| select(i)).collect();
    if idx.len() < 2 {
        return None;
    }
    let n = idx.len() as f64;
    let (mut msx, mut msy, mut mdx, mut mdy) = (0.0, 0.0, 0.0, 0.0);
    for &i in &idx {
        msx += src[i].0;
        msy += src[i].1;
        mdx += dst[i].0;
        mdy += dst[i].1;
    }
    let (msx, msy, mdx, mdy) = (msx / n, msy / n, mdx / n, mdy / n);
    let (mut num_a, mut num_b, mut den) = (0.0, 0.0, 0.0);
    for &i in &idx {
        let (x, y) = (src[i].0 - msx, src[i].1 - msy);
        let (u, v) = (dst[i].0 - mdx, dst[i].1 - mdy);
        num_a += u * x + v * y;
        num_b += v * x - u * y;
        den += x * x + y * y;
    }
    if den < 1e-12 {
        return None;
    }
    let (a, b) = (num_a / den, num_b / den);
    Some(PlanarTransform::from_linear(
        a,
        b,
        mdx - (a * msx - b * msy),
        mdy - (b * msx + a * msy),
    ))
}

fn two_point_hypothesis(p: (f64, f64), q: (f64, f64), pd: (f64, f64), qd: (f64, f64)) -> Option<PlanarTransform> {
    let (sx, sy) = (q.0 - p.0, q.1 - p.1);
    let (dx, dy) = (qd.0 - pd.0, qd.1 - pd.1);
    let norm = sx * sx + sy * sy;
    if norm < 1e-9 {
        return None;
    }
    // complex division (dx + i dy) / (sx + i sy)
    let a = (dx * sx + dy * sy) / norm;
    let b = (dy * sx - dx * sy) / norm;
    Some(PlanarTransform::from_linear(
        a,
        b,
        pd.0 - (a * p.0 - b * p.1),
        pd.1 - (b * p.0 + a * p.1),
    ))
}

fn inlier_mask(t: &PlanarTransform, src: &[(f64, f64)], dst: &[(f64, f64)], threshold: f64) -> Vec<bool> {
    let thr2 = threshold * threshold;
    src.iter()
        .zip(dst)
        .map(|(&(x, y), &(u, v))| {
            let (px, py) = t.apply(x, y);
            (px - u) * (px - u) + (py - v) * (py - v) <= thr2
        })
        .collect()
}

/// Result of [`ransac_similarity`].
#[derive(Debug, Clone, PartialEq)]
pub struct RansacFit {
    pub transform: PlanarTransform,
    pub inliers: Vec<bool>,
}

impl RansacFit {
    pub fn inlier_count(&self) -> usize {
        self.inliers.iter().filter(|&&b| b).count()
    }
}

/// RANSAC over two-point similarity hypotheses followed by a least-squares refit on the
/// inliers. Sampling is driven by `cfg.seed`.
pub fn ransac_similarity(src: &[(f64, f64)], dst: &[(f64, f64)], cfg: &FusionConfig) -> Result<RansacFit> {
    assert_eq!(src.len(), dst.len(), "correspondence lists differ in length");
    let n = src.len();
    if n < 4 {
        return Err(Error::InsufficientMatches { found: n, required: 4 });
    }
    let mut rng = SeededRng::new(cfg.seed);
    let mut best: Option<(usize, PlanarTransform)> = None;
    for _ in 0..cfg.ransac_iters {
        let i = rng.below(n);
        let mut j = rng.below(n - 1);
        if j >= i {
            j += 1;
        }
        let Some(h) = two_point_hypothesis(src[i], src[j], dst[i], dst[j]) else {
            continue;
        };
        if h.scale < cfg.min_scale || h.scale > cfg.max_scale {
            continue;
        }
        let count = inlier_mask(&h, src, dst, cfg.ransac_inlier_px)
            .iter()
            .filter(|&&b| b)
            .count();
        if best.as_ref().is_none_or(|(c, _)| count > *c) {
            best = Some((count, h));
        }
    }
    let Some((_, hypothesis)) = best else {
        return Err(Error::AlignmentFailed("no valid two-point hypothesis".into()));
    };
    let mut transform = hypothesis;
    let mut inliers = inlier_mask(&transform, src, dst, cfg.ransac_inlier_px);
    for _ in 0..3 {
        let Some(refit) = fit_least_squares(src, dst, |i| inliers[i]) else {
            break;
        };
        let refit_inliers = inlier_mask(&refit, src, dst, cfg.ransac_inlier_px);
        if refit_inliers.iter().filter(|&&b| b).count() < inliers.iter().filter(|&&b| b).count() {
            break;
        }
        let stable = refit_inliers == inliers;
        transform = refit;
        inliers = refit_inliers;
        if stable {
            break;
        }
    }
    // polish on the tighter core of the consensus set
    let tight = inlier_mask(&transform, src, dst, cfg.ransac_inlier_px / 2.0);
    if 2 * tight.iter().filter(|&&b| b).count() >= inliers.iter().filter(|&&b| b).count() {
        if let Some(polished) = fit_least_squares(src, dst, |i| tight[i]) {
            transform = polished;
            inliers = inlier_mask(&transform, src, dst, cfg.ransac_inlier_px);
        }
    }
    let count = inliers.iter().filter(|&&b| b).count();
    let ratio = count as f64 / n as f64;
    if count < cfg.min_inliers.max(2) {
        return Err(Error::AlignmentFailed(alloc::format!(
            "{count} inliers, at least {} required",
            cfg.min_inliers
        )));
    }
    if ratio < cfg.min_inlier_ratio {
        return Err(Error::AlignmentFailed(alloc::format!(
            "inlier ratio {ratio:.3} below {}",
            cfg.min_inlier_ratio
        )));
    }
    if transform.scale < cfg.min_scale || transform.scale > cfg.max_scale {
        return Err(Error::AlignmentFailed(alloc::format!(
            "scale {:.3} outside [{}, {}]",
            transform.scale,
            cfg.min_scale,
            cfg.max_scale
        )));
    }
    Ok(RansacFit { transform, inliers })
}

/// Estimates the similarity mapping features of `a` onto their matches in `b`.
pub fn estimate_transform(
    matches: &[FeatureMatch],
    a: &[OrbFeature],
    b: &[OrbFeature],
    cfg: &FusionConfig,
) -> Result<PlanarTransform> {
    let src: Vec<(f64, f64)> = matches.iter().map(|m| (a[m.a].x, a[m.a].y)).collect();
    let dst: Vec<(f64, f64)> = matches.iter().map(|m| (b[m.b].x, b[m.b].y)).collect();
    ransac_similarity(&src, &dst, cfg).map(|fit| fit.transform)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn grid_points(rng: &mut SeededRng, n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|_| (rng.uniform_range(0.0, 200.0), rng.uniform_range(0.0, 200.0)))
            .collect()
    }

    #[test]
    fn pure_translation_is_recovered() {
        let mut rng = SeededRng::new(1);
        let src = grid_points(&mut rng, 30);
        let dst: Vec<_> = src.iter().map(|&(x, y)| (x + 10.0, y + 5.0)).collect();
        let t = ransac_similarity(&src, &dst, &FusionConfig::default())
            .unwrap()
            .transform;
        assert!((t.tx - 10.0).abs() < 1e-6 && (t.ty - 5.0).abs() < 1e-6);
        assert!((t.scale - 1.0).abs() < 1e-9 && t.rotation.abs() < 1e-9);
    }

    #[test]
    fn identity_correspondences() {
        let mut rng = SeededRng::new(2);
        let src = grid_points(&mut rng, 12);
        let t = ransac_similarity(&src, &src, &FusionConfig::default())
            .unwrap()
            .transform;
        assert!((t.scale - 1.0).abs() < 1e-9);
        assert!(t.rotation.abs() < 1e-9 && t.tx.abs() < 1e-9 && t.ty.abs() < 1e-9);
    }

    #[test]
    fn rotation_with_forty_percent_outliers() {
        let mut rng = SeededRng::new(3);
        let truth = PlanarTransform::similarity(1.05, 10.0 * PI / 180.0, 4.0, -7.0);
        let src = grid_points(&mut rng, 100);
        let dst: Vec<_> = src
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| {
                if i % 5 < 2 {
                    (rng.uniform_range(0.0, 200.0), rng.uniform_range(0.0, 200.0))
                } else {
                    let (u, v) = truth.apply(x, y);
                    (u + rng.uniform_range(-0.5, 0.5), v + rng.uniform_range(-0.5, 0.5))
                }
            })
            .collect();
        let fit = ransac_similarity(&src, &dst, &FusionConfig::default()).unwrap();
        assert!((fit.transform.rotation - truth.rotation).abs() < 0.5 * PI / 180.0);
        assert!(fit.inlier_count() >= 55);
    }

    #[test]
    fn too_few_matches() {
        let pts = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)];
        assert!(matches!(
            ransac_similarity(&pts, &pts, &FusionConfig::default()),
            Err(Error::InsufficientMatches { found: 3, .. })
        ));
    }

    #[test]
    fn garbage_correspondences_fail() {
        let mut rng = SeededRng::new(4);
        let src = grid_points(&mut rng, 60);
        let dst = grid_points(&mut rng, 60);
        assert!(matches!(
            ransac_similarity(&src, &dst, &FusionConfig::default()),
            Err(Error::AlignmentFailed(_))
        ));
    }

    #[test]
    fn inverse_round_trip() {
        let t = PlanarTransform::similarity(1.3, 0.4, 12.0, -3.0);
        let (x, y) = t.apply(17.0, 42.0);
        let (bx, by) = t.inverse().apply(x, y);
        assert!((bx - 17.0).abs() < 1e-9 && (by - 42.0).abs() < 1e-9);
    }
}
