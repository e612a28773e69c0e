use alloc::vec;
use alloc::vec::Vec;

use super::transform::PlanarTransform;
use crate::raster::RasterImage;

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = libm::ceil(3.0 * sigma).max(1.0) as i64;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| libm::exp(-((i * i) as f64) / (2.0 * sigma * sigma)))
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable Gaussian blur on a single-channel buffer with edge replication.
pub(crate) fn blur_buffer(values: &[f64], width: usize, height: usize, sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 || width == 0 || height == 0 {
        return values.to_vec();
    }
    let k = gaussian_kernel(sigma);
    let r = (k.len() / 2) as i64;
    let mut tmp = vec![0.0; values.len()];
    for y in 0..height {
        for x in 0..width {
            let mut s = 0.0;
            for (j, w) in k.iter().enumerate() {
                let sx = (x as i64 + j as i64 - r).clamp(0, width as i64 - 1) as usize;
                s += w * values[y * width + sx];
            }
            tmp[y * width + x] = s;
        }
    }
    let mut out = vec![0.0; values.len()];
    for y in 0..height {
        for x in 0..width {
            let mut s = 0.0;
            for (j, w) in k.iter().enumerate() {
                let sy = (y as i64 + j as i64 - r).clamp(0, height as i64 - 1) as usize;
                s += w * tmp[sy * width + x];
            }
            out[y * width + x] = s;
        }
    }
    out
}

/// Gaussian blur of every channel.
pub fn gaussian_blur(image: &RasterImage, sigma: f64) -> RasterImage {
    let (w, h) = image.dims();
    let c = image.channels();
    let mut out = vec![0.0; image.data().len()];
    for ch in 0..c {
        let plane: Vec<f64> = image.data().iter().skip(ch).step_by(c).copied().collect();
        for (i, v) in blur_buffer(&plane, w, h, sigma).into_iter().enumerate() {
            out[i * c + ch] = v;
        }
    }
    RasterImage::from_vec_clamped(w, h, c, out)
}

/// Bilinear sample of a single-channel buffer; `None` outside the pixel grid.
#[inline]
pub(crate) fn sample_bilinear(values: &[f64], width: usize, height: usize, x: f64, y: f64) -> Option<f64> {
    if !(x >= 0.0 && y >= 0.0 && x <= (width - 1) as f64 && y <= (height - 1) as f64) {
        return None;
    }
    let x0 = libm::floor(x) as usize;
    let y0 = libm::floor(y) as usize;
    let x1 = (x0 + 1).min(width - 1);
    let y1 = (y0 + 1).min(height - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let v = |xx: usize, yy: usize| values[yy * width + xx];
    Some((1.0 - fy) * ((1.0 - fx) * v(x0, y0) + fx * v(x1, y0)) + fy * ((1.0 - fx) * v(x0, y1) + fx * v(x1, y1)))
}

/// Resizes a single-channel buffer with bilinear interpolation (pixel-center aligned).
pub(crate) fn resize_buffer(values: &[f64], width: usize, height: usize, new_w: usize, new_h: usize) -> Vec<f64> {
    let sx = width as f64 / new_w as f64;
    let sy = height as f64 / new_h as f64;
    let mut out = Vec::with_capacity(new_w * new_h);
    for y in 0..new_h {
        for x in 0..new_w {
            let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (width - 1) as f64);
            let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (height - 1) as f64);
            out.push(sample_bilinear(values, width, height, fx, fy).unwrap_or(0.0));
        }
    }
    out
}

pub fn resize_bilinear(image: &RasterImage, new_w: usize, new_h: usize) -> RasterImage {
    let lum = image.max_channel();
    let (w, h) = lum.dims();
    RasterImage::from_vec_clamped(new_w, new_h, 1, resize_buffer(lum.data(), w, h, new_w, new_h))
}

/// Resamples `image` so that content at `p` moves to `t.apply(p)`; uncovered pixels get `fill`.
pub fn warp_image(image: &RasterImage, t: &PlanarTransform, fill: f64) -> RasterImage {
    let (w, h) = image.dims();
    let c = image.channels();
    let inv = t.inverse();
    let planes: Vec<Vec<f64>> = (0..c)
        .map(|ch| image.data().iter().skip(ch).step_by(c).copied().collect())
        .collect();
    RasterImage::from_fn(w, h, c, |x, y, ch| {
        let (sx, sy) = inv.apply(x as f64, y as f64);
        sample_bilinear(&planes[ch], w, h, sx, sy).unwrap_or(fill)
    })
}
