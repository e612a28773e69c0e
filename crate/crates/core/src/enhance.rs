//! Retinex-style low-light enhancement: decompose, adjust, recombine.
//!
//! The illumination estimate is the max-over-channels map smoothed with an
//! edge-replicated box filter and then raised pointwise to at least the raw
//! max-channel value. Keeping illumination above every channel bounds reflectance by 1
//! without clamping, so `reflectance * illumination` reproduces the input.
//! Adjustment is a gamma curve `L' = L^(1/gamma)`, optionally with gamma solved by
//! bisection for a target mean.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::raster::{clamp_unit, RasterImage};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct EnhanceConfig {
    /// Lower clamp for illumination.
    pub eps_floor: f64,
    pub smoothing_radius: usize,
    pub gamma: f64,
    /// When set, gamma is solved in `[1, 10]` so the adjusted illumination has this mean.
    pub target_mean: Option<f64>,
    /// 3x3 median filter on reflectance before recombination.
    pub restore_reflectance: bool,
}

impl Default for EnhanceConfig {
    fn default() -> Self {
        Self {
            eps_floor: 1e-3,
            smoothing_radius: 15,
            gamma: 2.2,
            target_mean: None,
            restore_reflectance: false,
        }
    }
}

impl EnhanceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidConfig(alloc::format!(
                "gamma must be > 0, got {}",
                self.gamma
            )));
        }
        if self.smoothing_radius < 1 {
            return Err(Error::InvalidConfig("smoothing_radius must be >= 1".into()));
        }
        if !(self.eps_floor > 0.0 && self.eps_floor < 1.0) {
            return Err(Error::InvalidConfig("eps_floor must be in (0, 1)".into()));
        }
        if let Some(t) = self.target_mean {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::InvalidConfig(alloc::format!(
                    "target_mean must be in (0, 1], got {t}"
                )));
            }
        }
        Ok(())
    }
}

/// Reflectance (input channels) and single-channel illumination.
#[derive(Debug, Clone, PartialEq)]
pub struct IlluminationPair {
    pub reflectance: RasterImage,
    pub illumination: RasterImage,
}

impl IlluminationPair {
    /// Pixelwise product, clamped.
    pub fn recombine(&self) -> RasterImage {
        recombine(&self.reflectance, &self.illumination)
    }
}

/// Mean box filter of radius `radius` on a single-channel buffer, edge-replicate padding.
pub fn box_filter(values: &[f64], width: usize, height: usize, radius: usize) -> Vec<f64> {
    let mut tmp = vec![0.0; values.len()];
    let mut out = vec![0.0; values.len()];
    let window = (2 * radius + 1) as f64;
    let clamp_idx = |i: i64, n: usize| i.clamp(0, n as i64 - 1) as usize;
    for y in 0..height {
        let row = &values[y * width..(y + 1) * width];
        let mut sum: f64 = (-(radius as i64)..=radius as i64)
            .map(|dx| row[clamp_idx(dx, width)])
            .sum();
        for x in 0..width {
            tmp[y * width + x] = sum / window;
            let leaving = row[clamp_idx(x as i64 - radius as i64, width)];
            let entering = row[clamp_idx(x as i64 + radius as i64 + 1, width)];
            sum += entering - leaving;
        }
    }
    for x in 0..width {
        let at = |y: i64| tmp[clamp_idx(y, height) * width + x];
        let mut sum: f64 = (-(radius as i64)..=radius as i64).map(at).sum();
        for y in 0..height {
            out[y * width + x] = sum / window;
            sum += at(y as i64 + radius as i64 + 1) - at(y as i64 - radius as i64);
        }
    }
    out
}

pub fn decompose(image: &RasterImage, cfg: &EnhanceConfig) -> IlluminationPair {
    let (w, h) = image.dims();
    let c = image.channels();
    let luminance = image.max_channel();
    let smoothed = if w == 0 || h == 0 {
        Vec::new()
    } else {
        box_filter(luminance.data(), w, h, cfg.smoothing_radius.max(1))
    };
    let illum: Vec<f64> = smoothed
        .iter()
        .zip(luminance.data())
        .map(|(&s, &m)| s.max(m).clamp(cfg.eps_floor, 1.0))
        .collect();
    let mut refl = Vec::with_capacity(image.data().len());
    for (px, &l) in image.data().chunks_exact(c).zip(&illum) {
        refl.extend(px.iter().map(|&v| clamp_unit(v / l)));
    }
    IlluminationPair {
        reflectance: RasterImage::from_vec_clamped(w, h, c, refl),
        illumination: RasterImage::from_vec_clamped(w, h, 1, illum),
    }
}

fn gamma_mean(illum: &[f64], gamma: f64) -> f64 {
    if illum.is_empty() {
        return 0.0;
    }
    let e = 1.0 / gamma;
    illum.iter().map(|&v| libm::pow(v, e)).sum::<f64>() / illum.len() as f64
}

/// Gamma in `[1, 10]` whose curve gives `illum` the requested mean, or the bracket end
/// nearest to it when the target is out of reach.
pub fn solve_gamma(illum: &RasterImage, target_mean: f64) -> f64 {
    const LO: f64 = 1.0;
    const HI: f64 = 10.0;
    let data = illum.data();
    // mean(L^(1/g)) is nondecreasing in g for L in (0, 1]
    if gamma_mean(data, LO) >= target_mean {
        return LO;
    }
    if gamma_mean(data, HI) <= target_mean {
        return HI;
    }
    let (mut lo, mut hi) = (LO, HI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let m = gamma_mean(data, mid);
        if (m - target_mean).abs() <= 1e-9 {
            return mid;
        }
        if m < target_mean {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// The gamma actually applied: solved when `target_mean` is set, else `cfg.gamma`.
pub fn effective_gamma(illum: &RasterImage, cfg: &EnhanceConfig) -> f64 {
    match cfg.target_mean {
        Some(t) => solve_gamma(illum, t),
        None => cfg.gamma,
    }
}

pub fn adjust_illumination(illum: &RasterImage, cfg: &EnhanceConfig) -> RasterImage {
    let gamma = effective_gamma(illum, cfg);
    if gamma == 1.0 {
        return illum.clone();
    }
    let e = 1.0 / gamma;
    illum.map(|v| libm::pow(v, e))
}

/// `reflectance * illumination` with the single illumination channel broadcast.
pub fn recombine(reflectance: &RasterImage, illumination: &RasterImage) -> RasterImage {
    let c = reflectance.channels();
    let data = reflectance
        .data()
        .chunks_exact(c)
        .zip(illumination.data())
        .flat_map(|(px, &l)| px.iter().map(move |&r| r * l))
        .collect();
    RasterImage::from_vec_clamped(reflectance.width(), reflectance.height(), c, data)
}

/// 3x3 median per channel with edge replication.
pub fn median3x3(image: &RasterImage) -> RasterImage {
    let (w, h) = image.dims();
    let c = image.channels();
    RasterImage::from_fn(w, h, c, |x, y, ch| {
        let mut window = [0.0f64; 9];
        let mut k = 0;
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                let nx = (x as i64 + dx).clamp(0, w as i64 - 1) as usize;
                let ny = (y as i64 + dy).clamp(0, h as i64 - 1) as usize;
                window[k] = image.get(nx, ny, ch);
                k += 1;
            }
        }
        window.sort_by(f64::total_cmp);
        window[4]
    })
}

pub fn enhance(image: &RasterImage, cfg: &EnhanceConfig) -> RasterImage {
    let pair = decompose(image, cfg);
    let adjusted = adjust_illumination(&pair.illumination, cfg);
    let reflectance = if cfg.restore_reflectance {
        median3x3(&pair.reflectance)
    } else {
        pair.reflectance
    };
    recombine(&reflectance, &adjusted)
}

/// Mean absolute difference between 4-connected neighbours of a single-channel image.
pub fn mean_neighbor_difference(image: &RasterImage) -> f64 {
    let (w, h) = image.dims();
    let mut total = 0.0;
    let mut pairs = 0usize;
    for y in 0..h {
        for x in 0..w {
            let v = image.get(x, y, 0);
            if x + 1 < w {
                total += (v - image.get(x + 1, y, 0)).abs();
                pairs += 1;
            }
            if y + 1 < h {
                total += (v - image.get(x, y + 1, 0)).abs();
                pairs += 1;
            }
        }
    }
    if pairs == 0 {
        0.0
    } else {
        total / pairs as f64
    }
}
