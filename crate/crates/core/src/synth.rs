//! Seeded synthetic fixtures: textured images for alignment, mine-like scenes with
//! ground-truth instances, grid-rule cases and random masks.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::fusion::gaussian_blur;
use crate::raster::{BBox, BinaryMask, ClassId, Instance, InstanceSet, RasterImage};
use crate::rng::{derive_seed, SeededRng};

/// Even-odd fill of a polygon, sampled at pixel centres.
pub fn fill_polygon(width: usize, height: usize, vertices: &[(f64, f64)]) -> BinaryMask {
    let n = vertices.len();
    BinaryMask::from_fn(width, height, |x, y| {
        let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
        let mut inside = false;
        for i in 0..n {
            let (xi, yi) = vertices[i];
            let (xj, yj) = vertices[(i + n - 1) % n];
            if (yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi {
                inside = !inside;
            }
        }
        inside
    })
}

/// Star polygon with `points` spikes.
pub fn star_vertices(cx: f64, cy: f64, outer: f64, inner: f64, points: usize, phase: f64) -> Vec<(f64, f64)> {
    (0..2 * points)
        .map(|k| {
            let r = if k % 2 == 0 { outer } else { inner };
            let a = phase + PI * k as f64 / points as f64;
            (cx + r * libm::cos(a), cy + r * libm::sin(a))
        })
        .collect()
}

/// Greyscale image of overlapping flat rectangles and stars on a smooth gradient, lightly
/// blurred. Rich in corners at every scale.
pub fn textured_fixture(seed: u64, width: usize, height: usize) -> RasterImage {
    let mut rng = SeededRng::new(seed);
    let (gx, gy) = (rng.uniform_range(-0.2, 0.2), rng.uniform_range(-0.2, 0.2));
    let mut values: Vec<f64> = (0..width * height)
        .map(|i| {
            let (x, y) = ((i % width) as f64 / width as f64, (i / width) as f64 / height as f64);
            0.45 + gx * (x - 0.5) + gy * (y - 0.5)
        })
        .collect();
    let shapes = width * height / 900;
    for _ in 0..shapes {
        let v = rng.uniform();
        let cx = rng.uniform_range(0.0, width as f64);
        let cy = rng.uniform_range(0.0, height as f64);
        let r = rng.uniform_range(4.0, 16.0);
        let mask = if rng.bernoulli(0.5) {
            let hw = r * rng.uniform_range(0.5, 1.5);
            fill_polygon(
                width,
                height,
                &[
                    (cx - hw, cy - r),
                    (cx + hw, cy - r),
                    (cx + hw, cy + r),
                    (cx - hw, cy + r),
                ],
            )
        } else {
            let points = 3 + rng.below(4);
            let phase = rng.uniform_range(0.0, PI);
            fill_polygon(width, height, &star_vertices(cx, cy, r, r * 0.5, points, phase))
        };
        for (x, y) in mask.set_pixels() {
            values[y * width + x] = v;
        }
    }
    gaussian_blur(&RasterImage::from_vec_clamped(width, height, 1, values), 0.7)
}

/// Random mask made of a few rectangles with speckle noise.
pub fn random_blob_mask(rng: &mut SeededRng, width: usize, height: usize) -> BinaryMask {
    let mut m = BinaryMask::new(width, height);
    for _ in 0..1 + rng.below(4) {
        let x0 = rng.below(width);
        let y0 = rng.below(height);
        let x1 = (x0 + 1 + rng.below(width / 2 + 1)).min(width);
        let y1 = (y0 + 1 + rng.below(height / 2 + 1)).min(height);
        m.union_in_place(&BinaryMask::rect(width, height, BBox::new(x0, y0, x1, y1)))
            .expect("same dims");
    }
    for _ in 0..width * height / 20 {
        let (x, y) = (rng.below(width), rng.below(height));
        let v = m.get(x, y);
        m.set(x, y, !v);
    }
    m
}

pub const SCENE_WIDTH: usize = 160;
pub const SCENE_HEIGHT: usize = 120;

fn class_tone(class: ClassId) -> [f64; 3] {
    match class {
        ClassId::Road => [0.13, 0.12, 0.10],
        ClassId::Wall => [0.17, 0.16, 0.15],
        ClassId::Roof => [0.11, 0.11, 0.12],
        ClassId::People => [0.30, 0.26, 0.14],
        ClassId::Equipment => [0.24, 0.20, 0.08],
        ClassId::Corridor => [0.03, 0.03, 0.04],
        ClassId::Surrounding => [0.15, 0.15, 0.15],
    }
}

fn jitter(rng: &mut SeededRng, v: f64, amount: f64) -> f64 {
    v + rng.uniform_range(-amount, amount)
}

fn scene_instances(rng: &mut SeededRng, w: usize, h: usize) -> Vec<(ClassId, BinaryMask)> {
    let (wf, hf) = (w as f64, h as f64);
    let mut out = Vec::new();

    let road_top = hf * 0.8 + rng.uniform_range(0.0, 4.0);
    out.push((
        ClassId::Road,
        fill_polygon(
            w,
            h,
            &[
                (jitter(rng, wf * 0.25, 6.0), road_top),
                (jitter(rng, wf * 0.75, 6.0), road_top),
                (wf - 1.0, hf),
                (1.0, hf),
            ],
        ),
    ));

    let mut roof = vec![(wf * 0.12, 0.0), (wf * 0.88, 0.0)];
    let teeth = 5 + rng.below(4);
    for k in 0..=teeth {
        let x = wf * 0.88 - (wf * 0.76) * k as f64 / teeth as f64;
        let y = if k % 2 == 0 {
            rng.uniform_range(14.0, 20.0)
        } else {
            rng.uniform_range(8.0, 12.0)
        };
        roof.push((x, y));
    }
    out.push((ClassId::Roof, fill_polygon(w, h, &roof)));

    for side in [0.0, 1.0] {
        let x_in = rng.uniform_range(16.0, 24.0);
        let (top, bottom) = (rng.uniform_range(24.0, 30.0), rng.uniform_range(70.0, 80.0));
        let quad = if side == 0.0 {
            [(0.0, top - 6.0), (x_in, top), (x_in - 4.0, bottom), (0.0, bottom + 6.0)]
        } else {
            [
                (wf - x_in, top),
                (wf, top - 6.0),
                (wf, bottom + 6.0),
                (wf - x_in + 4.0, bottom),
            ]
        };
        out.push((ClassId::Wall, fill_polygon(w, h, &quad)));
    }

    if rng.bernoulli(0.6) {
        let cx = rng.uniform_range(wf * 0.4, wf * 0.6);
        let cy = rng.uniform_range(38.0, 46.0);
        let (rx, ry) = (rng.uniform_range(10.0, 16.0), rng.uniform_range(8.0, 12.0));
        let oct: Vec<(f64, f64)> = (0..8)
            .map(|k| {
                let a = PI * k as f64 / 4.0 + PI / 8.0;
                (cx + rx * libm::cos(a), cy + ry * libm::sin(a))
            })
            .collect();
        out.push((ClassId::Corridor, fill_polygon(w, h, &oct)));
    }

    let mut centres: Vec<(f64, f64, f64)> = Vec::new();
    let mut place = |rng: &mut SeededRng, r: f64| -> (f64, f64) {
        loop {
            let c = (rng.uniform_range(34.0, wf - 34.0), rng.uniform_range(34.0, 84.0));
            if centres
                .iter()
                .all(|&(x, y, rr)| libm::hypot(x - c.0, y - c.1) > r + rr + 3.0)
            {
                centres.push((c.0, c.1, r));
                return c;
            }
        }
    };
    for _ in 0..1 + rng.below(2) {
        let r = rng.uniform_range(11.0, 15.0);
        let (cx, cy) = place(rng, r);
        let phase = rng.uniform_range(0.0, PI);
        out.push((
            ClassId::Equipment,
            fill_polygon(w, h, &star_vertices(cx, cy, r, r * 0.6, 4, phase)),
        ));
    }
    for _ in 0..1 + rng.below(3) {
        let r = rng.uniform_range(8.0, 11.0);
        let (cx, cy) = place(rng, r);
        let phase = rng.uniform_range(0.0, PI);
        out.push((
            ClassId::People,
            fill_polygon(w, h, &star_vertices(cx, cy, r, r * 0.55, 5, phase)),
        ));
    }
    out
}

/// A dark, noisy mine-like scene with its ground-truth instances.
pub fn mine_scene(seed: u64, image_id: &str) -> (RasterImage, InstanceSet) {
    let (w, h) = (SCENE_WIDTH, SCENE_HEIGHT);
    let mut rng = SeededRng::new(derive_seed(seed, image_id));
    let instances = scene_instances(&mut rng, w, h);
    let mut pixels = vec![[0.05, 0.05, 0.06]; w * h];
    for (class, mask) in &instances {
        let tone = class_tone(*class);
        for (x, y) in mask.set_pixels() {
            pixels[y * w + x] = tone;
        }
    }
    let data: Vec<f64> = pixels
        .iter()
        .flat_map(|p| {
            let grain = 1.0 + 0.15 * rng.normal();
            p.map(|v| v * grain)
        })
        .collect();
    let image = RasterImage::from_vec_clamped(w, h, 3, data);
    let set = InstanceSet::from_instances(
        image_id,
        w,
        h,
        instances
            .into_iter()
            .filter(|(_, m)| !m.is_empty())
            .map(|(c, m)| Instance::new(c, m, 1.0).expect("nonempty"))
            .collect(),
    )
    .expect("scene dimensions");
    (image, set)
}

/// `count` scenes named `scene_00`, `scene_01`, ...
pub fn scene_corpus(seed: u64, count: usize) -> Vec<(RasterImage, InstanceSet)> {
    (0..count).map(|i| mine_scene(seed, &format!("scene_{i:02}"))).collect()
}

/// A 64x64 grid-rule case with the class each instance must carry after the rule runs at
/// the default configuration (4 rows, threshold 0.3, rule classes wall / roof / road).
#[derive(Debug, Clone, PartialEq)]
pub struct GridRuleCase {
    pub name: &'static str,
    pub set: InstanceSet,
    pub expected: Vec<ClassId>,
}

/// Hand-built cases on a 64x64 grid, whose bottom row covers `y >= 48`.
pub fn grid_rule_cases() -> Vec<GridRuleCase> {
    let r = |x0, y0, x1, y1| BinaryMask::rect(64, 64, BBox::new(x0, y0, x1, y1));
    let case = |name, items: Vec<(ClassId, BinaryMask, ClassId)>| {
        let expected = items.iter().map(|t| t.2).collect();
        let set = InstanceSet::from_instances(
            name,
            64,
            64,
            items
                .into_iter()
                .map(|(c, m, _)| Instance::new(c, m, 1.0).expect("nonempty"))
                .collect(),
        )
        .expect("64x64");
        GridRuleCase { name, set, expected }
    };
    vec![
        case(
            "bottom_row_structures",
            vec![
                (ClassId::Wall, r(4, 50, 20, 62), ClassId::Road),
                (ClassId::Roof, r(24, 48, 40, 64), ClassId::Road),
                (ClassId::Road, r(44, 52, 60, 60), ClassId::Road),
            ],
        ),
        case(
            "excluded_classes",
            vec![
                (ClassId::People, r(4, 50, 14, 62), ClassId::People),
                (ClassId::Equipment, r(20, 40, 36, 60), ClassId::Equipment),
                (ClassId::Corridor, r(40, 48, 60, 64), ClassId::Corridor),
            ],
        ),
        case(
            "partial_overlap",
            vec![
                // 40 rows, 10 of them in the bottom row: 25%
                (ClassId::Roof, r(44, 18, 54, 58), ClassId::Roof),
                // 20 rows, 8 in the bottom row: 40%
                (ClassId::Wall, r(4, 36, 12, 56), ClassId::Road),
                (ClassId::Wall, r(20, 0, 40, 30), ClassId::Wall),
                // 16 rows, 4 in the bottom row: 25%
                (ClassId::Road, r(30, 36, 40, 52), ClassId::Road),
            ],
        ),
    ]
}
