//! Class-coloured mask overlays.

use minevis_core::{ClassId, InstanceSet, RasterImage};

/// Overlay colour of each class, as 8-bit RGB.
pub fn palette(class: ClassId) -> [u8; 3] {
    match class {
        ClassId::Road => [128, 64, 128],
        ClassId::Wall => [70, 130, 180],
        ClassId::Roof => [0, 170, 170],
        ClassId::People => [220, 20, 60],
        ClassId::Equipment => [255, 200, 0],
        ClassId::Corridor => [60, 180, 75],
        ClassId::Surrounding => [150, 150, 150],
    }
}

pub const OVERLAY_ALPHA: f64 = 0.5;

/// Blends each instance's class colour over `image` at [`OVERLAY_ALPHA`], in instance
/// order, and marks mask boundaries at full opacity. The result is always RGB.
pub fn render_overlay(image: &RasterImage, set: &InstanceSet) -> RasterImage {
    let (w, h) = image.dims();
    let c = image.channels();
    let mut rgb: Vec<f64> = (0..w * h)
        .flat_map(|i| {
            let px = &image.data()[i * c..(i + 1) * c];
            if c == 3 {
                [px[0], px[1], px[2]]
            } else {
                [px[0]; 3]
            }
        })
        .collect();
    for inst in set.instances() {
        let colour = palette(inst.class()).map(|v| v as f64 / 255.0);
        let mask = inst.mask();
        if mask.dims() != (w, h) {
            continue;
        }
        for (x, y) in mask.set_pixels() {
            let (xi, yi) = (x as i64, y as i64);
            let boundary = [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .any(|&(dx, dy)| !mask.get_signed(xi + dx, yi + dy));
            let alpha = if boundary { 1.0 } else { OVERLAY_ALPHA };
            let px = &mut rgb[(y * w + x) * 3..(y * w + x) * 3 + 3];
            for k in 0..3 {
                px[k] = (1.0 - alpha) * px[k] + alpha * colour[k];
            }
        }
    }
    RasterImage::from_vec_clamped(w, h, 3, rgb)
}
