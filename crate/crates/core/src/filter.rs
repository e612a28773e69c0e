//! Automatic rejection of unusable frames: too dark, blurred, or repeated.
//!
//! Darkness and blur are judged on the max-over-channels luminance. Duplicates use a
//! 64-bit average hash compared by Hamming distance against every hash seen so far,
//! so only the duplicate verdict depends on the order images are submitted in.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::raster::RasterImage;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct FilterConfig {
    /// Images whose mean luminance is below this are too dark.
    pub dark_threshold: f64,
    /// Images whose Laplacian variance is below this are blurred.
    pub blur_threshold: f64,
    /// Hashes within this many differing bits are duplicates.
    pub dup_hash_distance: u32,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            dark_threshold: 0.04,
            blur_threshold: 1e-4,
            dup_hash_distance: 5,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dark_threshold >= 0.0 && self.blur_threshold >= 0.0) {
            return Err(Error::InvalidConfig("filter thresholds must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum RejectReason {
    TooDark,
    Blurred,
    Duplicate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FilterVerdict {
    pub keep: bool,
    pub reasons: Vec<RejectReason>,
}

impl FilterVerdict {
    fn from_reasons(reasons: Vec<RejectReason>) -> Self {
        Self {
            keep: reasons.is_empty(),
            reasons,
        }
    }
}

/// Average hashes of previously submitted images. Single writer.
#[derive(Debug, Clone, Default)]
pub struct SeenHashes {
    hashes: Vec<u64>,
}

impl SeenHashes {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.hashes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hashes.is_empty()
    }

    pub fn insert(&mut self, hash: u64) {
        self.hashes.push(hash);
    }

    /// Smallest Hamming distance to any stored hash.
    pub fn nearest_distance(&self, hash: u64) -> Option<u32> {
        self.hashes.iter().map(|h| (h ^ hash).count_ones()).min()
    }
}

pub fn mean_luminance(image: &RasterImage) -> f64 {
    image.max_channel().mean()
}

/// Population variance of the 4-neighbour Laplacian over interior pixels
/// (`[0 1 0; 1 -4 1; 0 1 0]`). Images smaller than 3x3 report 0.
pub fn laplacian_variance(image: &RasterImage) -> f64 {
    let lum = image.max_channel();
    let (w, h) = lum.dims();
    if w < 3 || h < 3 {
        return 0.0;
    }
    let v = |x: usize, y: usize| lum.get(x, y, 0);
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    let mut n = 0.0;
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let l = v(x - 1, y) + v(x + 1, y) + v(x, y - 1) + v(x, y + 1) - 4.0 * v(x, y);
            sum += l;
            sum2 += l * l;
            n += 1.0;
        }
    }
    let mean = sum / n;
    (sum2 / n - mean * mean).max(0.0)
}

/// 64-bit average hash: the luminance is averaged over an 8x8 grid of cells and bit
/// `row * 8 + col` is set when that cell is brighter than the mean of all 64 cells.
/// Cells that cover no whole pixel (images under 8 px) sample the nearest pixel.
pub fn average_hash(image: &RasterImage) -> u64 {
    let lum = image.max_channel();
    let (w, h) = lum.dims();
    if w == 0 || h == 0 {
        return 0;
    }
    let mut cells = [0.0f64; 64];
    for (row, chunk) in cells.chunks_exact_mut(8).enumerate() {
        let y0 = row * h / 8;
        let y1 = ((row + 1) * h / 8).max(y0 + 1).min(h);
        for (col, cell) in chunk.iter_mut().enumerate() {
            let x0 = col * w / 8;
            let x1 = ((col + 1) * w / 8).max(x0 + 1).min(w);
            let mut s = 0.0;
            for y in y0.min(h - 1)..y1 {
                for x in x0.min(w - 1)..x1 {
                    s += lum.get(x, y, 0);
                }
            }
            *cell = s / ((y1 - y0.min(h - 1)) * (x1 - x0.min(w - 1))) as f64;
        }
    }
    let mean = cells.iter().sum::<f64>() / 64.0;
    cells
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, &c)| if c > mean { acc | (1 << i) } else { acc })
}

/// Judges one image and records its hash in `seen`.
pub fn filter_image(image: &RasterImage, cfg: &FilterConfig, seen: &mut SeenHashes) -> FilterVerdict {
    let mut reasons = Vec::new();
    if mean_luminance(image) < cfg.dark_threshold {
        reasons.push(RejectReason::TooDark);
    }
    if laplacian_variance(image) < cfg.blur_threshold {
        reasons.push(RejectReason::Blurred);
    }
    let hash = average_hash(image);
    if seen.nearest_distance(hash).is_some_and(|d| d <= cfg.dup_hash_distance) {
        reasons.push(RejectReason::Duplicate);
    }
    seen.insert(hash);
    FilterVerdict::from_reasons(reasons)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn textured(seed: u64) -> RasterImage {
        let mut rng = SeededRng::new(seed);
        RasterImage::from_fn(32, 32, 3, |_, _, _| rng.uniform())
    }

    #[test]
    fn black_is_too_dark() {
        let v = filter_image(
            &RasterImage::filled(16, 16, 1, 0.0),
            &FilterConfig::default(),
            &mut SeenHashes::new(),
        );
        assert!(!v.keep);
        assert!(v.reasons.contains(&RejectReason::TooDark));
    }

    #[test]
    fn flat_gray_is_blurred() {
        let v = filter_image(
            &RasterImage::filled(16, 16, 3, 0.5),
            &FilterConfig::default(),
            &mut SeenHashes::new(),
        );
        assert_eq!(v.reasons, [RejectReason::Blurred]);
        assert!(!v.keep);
    }

    #[test]
    fn second_copy_is_duplicate() {
        let cfg = FilterConfig::default();
        let mut seen = SeenHashes::new();
        let img = textured(1);
        let first = filter_image(&img, &cfg, &mut seen);
        assert!(first.keep, "{first:?}");
        let second = filter_image(&img, &cfg, &mut seen);
        assert_eq!(second.reasons, [RejectReason::Duplicate]);
    }

    #[test]
    fn distinct_textures_are_not_duplicates() {
        let cfg = FilterConfig::default();
        let mut seen = SeenHashes::new();
        assert!(filter_image(&textured(1), &cfg, &mut seen).keep);
        assert!(filter_image(&textured(2), &cfg, &mut seen).keep);
    }

    #[test]
    fn laplacian_of_checkerboard() {
        // alternating 0/1: response is -4 on ones and +4 on zeros, so variance is 16
        let img = RasterImage::from_fn(10, 10, 1, |x, y, _| ((x + y) % 2) as f64);
        assert!((laplacian_variance(&img) - 16.0).abs() < 1e-12);
    }

    #[test]
    fn hash_tracks_layout() {
        let left = RasterImage::from_fn(64, 64, 1, |x, _, _| if x < 32 { 1.0 } else { 0.0 });
        let h = average_hash(&left);
        // the four left columns of every row are set
        assert_eq!(h, 0x0f0f_0f0f_0f0f_0f0f);
        let tiny = RasterImage::from_fn(3, 2, 1, |x, _, _| x as f64 / 2.0);
        let _ = average_hash(&tiny);
    }
}
