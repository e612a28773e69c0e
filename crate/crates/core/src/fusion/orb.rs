//! Oriented FAST keypoints with steered BRIEF descriptors over an image pyramid.

use alloc::vec;
use alloc::vec::Vec;

use super::imageops::{blur_buffer, resize_buffer};
use super::pattern::BRIEF_PATTERN;
use super::FusionConfig;
use crate::raster::RasterImage;

/// Keypoints closer than this to the level border are discarded; a rotated pattern point
/// reaches at most `13 * sqrt(2)` pixels from the centre.
const EDGE: usize = 19;
const CENTROID_RADIUS: i64 = 15;
const HARRIS_BLOCK: i64 = 7;
const HARRIS_K: f64 = 0.04;
const DESCRIPTOR_BLUR: f64 = 2.0;

/// Bresenham circle of radius 3, clockwise from 12 o'clock.
const CIRCLE: [(i64, i64); 16] = [
    (0, -3),
    (1, -3),
    (2, -2),
    (3, -1),
    (3, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 3),
    (-1, 3),
    (-2, 2),
    (-3, 1),
    (-3, 0),
    (-3, -1),
    (-2, -2),
    (-1, -3),
];

/// A 256-bit binary descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Descriptor(pub [u64; 4]);

impl Descriptor {
    pub const BITS: usize = 256;

    pub fn hamming(&self, other: &Descriptor) -> u32 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a ^ b).count_ones()).sum()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set_bit(&mut self, i: usize, value: bool) {
        if value {
            self.0[i / 64] |= 1 << (i % 64);
        } else {
            self.0[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn flip_bit(&mut self, i: usize) {
        self.0[i / 64] ^= 1 << (i % 64);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbFeature {
    /// Position in level-0 pixel coordinates.
    pub x: f64,
    pub y: f64,
    /// Orientation in radians.
    pub angle: f64,
    /// Harris response on the detection level.
    pub response: f64,
    pub level: usize,
    pub descriptor: Descriptor,
}

struct Level {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
    /// Level-0 pixels per level pixel, per axis.
    scale_x: f64,
    scale_y: f64,
}

impl Level {
    #[inline]
    fn at(&self, x: i64, y: i64) -> f64 {
        self.pixels[y as usize * self.width + x as usize]
    }
}

fn build_pyramid(image: &RasterImage, cfg: &FusionConfig) -> Vec<Level> {
    let (w, h) = image.dims();
    let base = image.max_channel().into_data();
    let mut levels = Vec::new();
    for l in 0..cfg.pyramid_levels {
        let f = libm::pow(cfg.pyramid_scale, l as f64);
        let lw = libm::round(w as f64 / f) as usize;
        let lh = libm::round(h as f64 / f) as usize;
        if lw < 2 * EDGE + 1 || lh < 2 * EDGE + 1 {
            break;
        }
        let pixels = if l == 0 {
            base.clone()
        } else {
            resize_buffer(&base, w, h, lw, lh)
        };
        levels.push(Level {
            width: lw,
            height: lh,
            pixels,
            scale_x: w as f64 / lw as f64,
            scale_y: h as f64 / lh as f64,
        });
    }
    levels
}

/// Largest threshold for which the pixel is still a FAST-9 corner: the best, over all arcs
/// of nine contiguous circle pixels, of the smallest difference along the arc.
fn fast_score(level: &Level, x: i64, y: i64) -> f64 {
    let p = level.at(x, y);
    let mut ring = [0.0; 16];
    for (k, &(dx, dy)) in CIRCLE.iter().enumerate() {
        ring[k] = level.at(x + dx, y + dy) - p;
    }
    let mut best = 0.0f64;
    for start in 0..16 {
        let mut bright = f64::INFINITY;
        let mut dark = f64::INFINITY;
        for i in 0..9 {
            let d = ring[(start + i) % 16];
            bright = bright.min(d);
            dark = dark.min(-d);
        }
        best = best.max(bright).max(dark);
    }
    best
}

fn harris_response(level: &Level, x: i64, y: i64) -> f64 {
    let r = HARRIS_BLOCK / 2;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for yy in y - r..=y + r {
        for xx in x - r..=x + r {
            let gx = (level.at(xx + 1, yy - 1) + 2.0 * level.at(xx + 1, yy) + level.at(xx + 1, yy + 1))
                - (level.at(xx - 1, yy - 1) + 2.0 * level.at(xx - 1, yy) + level.at(xx - 1, yy + 1));
            let gy = (level.at(xx - 1, yy + 1) + 2.0 * level.at(xx, yy + 1) + level.at(xx + 1, yy + 1))
                - (level.at(xx - 1, yy - 1) + 2.0 * level.at(xx, yy - 1) + level.at(xx + 1, yy - 1));
            sxx += gx * gx;
            syy += gy * gy;
            sxy += gx * gy;
        }
    }
    sxx * syy - sxy * sxy - HARRIS_K * (sxx + syy) * (sxx + syy)
}

/// Orientation of the intensity centroid within a disc.
fn centroid_angle(level: &Level, x: i64, y: i64) -> f64 {
    let (mut m10, mut m01) = (0.0, 0.0);
    let r2 = CENTROID_RADIUS * CENTROID_RADIUS;
    for dy in -CENTROID_RADIUS..=CENTROID_RADIUS {
        for dx in -CENTROID_RADIUS..=CENTROID_RADIUS {
            if dx * dx + dy * dy > r2 {
                continue;
            }
            let (sx, sy) = (x + dx, y + dy);
            if sx < 0 || sy < 0 || sx >= level.width as i64 || sy >= level.height as i64 {
                continue;
            }
            let v = level.at(sx, sy);
            m10 += dx as f64 * v;
            m01 += dy as f64 * v;
        }
    }
    libm::atan2(m01, m10)
}

fn describe(smoothed: &Level, x: i64, y: i64, angle: f64) -> Descriptor {
    let (s, c) = (libm::sin(angle), libm::cos(angle));
    let rot = |px: i8, py: i8| {
        let (px, py) = (px as f64, py as f64);
        (
            x + libm::round(c * px - s * py) as i64,
            y + libm::round(s * px + c * py) as i64,
        )
    };
    let mut d = Descriptor::default();
    for (i, p) in BRIEF_PATTERN.iter().enumerate() {
        let (ax, ay) = rot(p[0], p[1]);
        let (bx, by) = rot(p[2], p[3]);
        d.set_bit(i, smoothed.at(ax, ay) < smoothed.at(bx, by));
    }
    d
}

fn level_quotas(total: usize, levels: usize, scale: f64) -> Vec<usize> {
    let f = 1.0 / (scale * scale);
    let denom: f64 = (0..levels).map(|l| libm::pow(f, l as f64)).sum();
    let mut quotas: Vec<usize> = (0..levels)
        .map(|l| libm::floor(total as f64 * libm::pow(f, l as f64) / denom) as usize)
        .collect();
    let assigned: usize = quotas.iter().sum();
    if let Some(q) = quotas.first_mut() {
        *q += total - assigned;
    }
    quotas
}

fn detect_level(level: &Level, cfg: &FusionConfig, quota: usize, index: usize) -> Vec<OrbFeature> {
    let (w, h) = (level.width as i64, level.height as i64);
    let lo = EDGE as i64;
    let mut scores = vec![0.0; level.width * level.height];
    for y in lo..h - lo {
        for x in lo..w - lo {
            let s = fast_score(level, x, y);
            if s > cfg.fast_threshold {
                scores[(y * w + x) as usize] = s;
            }
        }
    }
    let mut candidates = Vec::new();
    for y in lo..h - lo {
        for x in lo..w - lo {
            let i = (y * w + x) as usize;
            let s = scores[i];
            if s == 0.0 {
                continue;
            }
            let mut keep = true;
            'nms: for dy in -1..=1i64 {
                for dx in -1..=1i64 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let j = ((y + dy) * w + x + dx) as usize;
                    if scores[j] > s || (scores[j] == s && j < i) {
                        keep = false;
                        break 'nms;
                    }
                }
            }
            if keep {
                candidates.push((harris_response(level, x, y), y, x));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    candidates.truncate(quota);
    if candidates.is_empty() {
        return Vec::new();
    }
    let smoothed = Level {
        width: level.width,
        height: level.height,
        pixels: blur_buffer(&level.pixels, level.width, level.height, DESCRIPTOR_BLUR),
        scale_x: level.scale_x,
        scale_y: level.scale_y,
    };
    candidates
        .into_iter()
        .map(|(response, y, x)| {
            let angle = centroid_angle(level, x, y);
            OrbFeature {
                x: (x as f64 + 0.5) * level.scale_x - 0.5,
                y: (y as f64 + 0.5) * level.scale_y - 0.5,
                angle,
                response,
                level: index,
                descriptor: describe(&smoothed, x, y, angle),
            }
        })
        .collect()
}

/// Detects up to `cfg.max_features` ORB features, ranked by Harris response within each
/// pyramid level. Multi-channel images are reduced to their max channel. Positions are
/// reported in the coordinates of `image`.
pub fn detect_orb(image: &RasterImage, cfg: &FusionConfig) -> Vec<OrbFeature> {
    let levels = build_pyramid(image, cfg);
    if levels.is_empty() {
        return Vec::new();
    }
    let quotas = level_quotas(cfg.max_features, levels.len(), cfg.pyramid_scale);
    levels
        .iter()
        .zip(quotas)
        .enumerate()
        .flat_map(|(i, (level, q))| detect_level(level, cfg, q, i))
        .collect()
}
