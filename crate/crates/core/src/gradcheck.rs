//! Central finite-difference verification of every analytic loss gradient.
//!
//! Each case draws seeded random problems with probabilities in `[0.05, 0.95]` (away from
//! the clamps), perturbs one coordinate at a time by `±step` and compares
//! `(f(x + h) - f(x - h)) / 2h` against the analytic gradient.

use alloc::vec;
use alloc::vec::Vec;

use crate::losses::{
    enhanced_mask_loss, fast_rcnn_loss, focal_loss, total_loss, weighted_dice_loss, DetectionPrediction,
    DiceDenominator, LossConfig, SoftMaskPrediction,
};
use crate::raster::ClassId;
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckConfig {
    pub points: usize,
    pub step: f64,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self {
            points: 100,
            step: 1e-5,
            tolerance: 1e-4,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckSummary {
    pub name: &'static str,
    pub points: usize,
    pub coordinates: usize,
    pub max_rel_error: f64,
    pub passed: bool,
}

/// `|a - n| / max(|a|, |n|, 1e-6)`: relative for ordinary magnitudes, absolute near zero.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Central differences of `f` at `x`.
pub fn central_difference(mut f: impl FnMut(&[f64]) -> f64, x: &[f64], step: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + step;
            let up = f(&probe);
            probe[i] = x[i] - step;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * step)
        })
        .collect()
}

fn max_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| relative_error(a, n))
        .fold(0.0, f64::max)
}

/// A random multi-class soft-mask problem.
pub fn random_mask_problem(rng: &mut SeededRng) -> SoftMaskPrediction {
    let w = 2 + rng.below(4);
    let h = 2 + rng.below(4);
    let n_classes = 1 + rng.below(3);
    let mut classes = Vec::with_capacity(n_classes);
    while classes.len() < n_classes {
        let c = ClassId::RAW[rng.below(ClassId::RAW.len())];
        if !classes.contains(&c) {
            classes.push(c);
        }
    }
    let n = w * h * n_classes;
    let probs = (0..n).map(|_| rng.uniform_range(0.05, 0.95)).collect();
    let targets = (0..n).map(|_| rng.bernoulli(0.4)).collect();
    SoftMaskPrediction::new(w, h, classes, probs, targets).expect("consistent shapes")
}

/// A random loss configuration inside the valid ranges.
pub fn random_loss_config(rng: &mut SeededRng, denominator: DiceDenominator) -> LossConfig {
    let mut cfg = LossConfig {
        alpha: rng.uniform_range(0.05, 0.95),
        gamma_f: rng.uniform_range(0.0, 3.0),
        lambda: rng.uniform_range(0.1, 2.0),
        dice_denominator: denominator,
        ..LossConfig::default()
    };
    for c in ClassId::RAW {
        cfg.class_weights.insert(c, rng.uniform_range(0.5, 2.0));
    }
    cfg
}

/// A random detection problem with residuals kept off the smooth-L1 kinks.
pub fn random_detection_problem(rng: &mut SeededRng) -> DetectionPrediction {
    let rois = 1 + rng.below(4);
    let k = 2 + rng.below(3);
    let logits = (0..rois)
        .map(|_| (0..k).map(|_| rng.uniform_range(-2.0, 2.0)).collect())
        .collect();
    let targets = (0..rois).map(|_| rng.below(k)).collect();
    let box_targets: Vec<[f64; 4]> = (0..rois)
        .map(|_| core::array::from_fn(|_| rng.uniform_range(-1.0, 1.0)))
        .collect();
    let box_params = box_targets
        .iter()
        .map(|t| {
            core::array::from_fn(|j| loop {
                let r = rng.uniform_range(-2.5, 2.5);
                if (r.abs() - 1.0).abs() > 1e-3 {
                    break t[j] + r;
                }
            })
        })
        .collect();
    DetectionPrediction::new(logits, targets, box_params, box_targets).expect("consistent shapes")
}

fn flatten_detection(det: &DetectionPrediction) -> Vec<f64> {
    let mut x: Vec<f64> = det.logits().iter().flatten().copied().collect();
    x.extend(det.box_params().iter().flatten());
    x
}

fn unflatten_detection(det: &DetectionPrediction, x: &[f64]) -> DetectionPrediction {
    let k = det.logits()[0].len();
    let rois = det.rois();
    let logits = x[..rois * k].chunks(k).map(|c| c.to_vec()).collect();
    let boxes = x[rois * k..].chunks(4).map(|c| [c[0], c[1], c[2], c[3]]).collect();
    det.with_params(logits, boxes).expect("same shapes")
}

fn flatten_detection_grad(g: &crate::losses::DetectionGradient) -> Vec<f64> {
    let mut x: Vec<f64> = g.logits.iter().flatten().copied().collect();
    x.extend(g.boxes.iter().flatten());
    x
}

type MaskLoss = fn(&SoftMaskPrediction, &LossConfig) -> crate::losses::LossOutput<Vec<f64>>;

fn check_mask_loss(
    name: &'static str,
    loss: MaskLoss,
    denominator: DiceDenominator,
    cfg: &GradCheckConfig,
    rng: &mut SeededRng,
) -> GradCheckSummary {
    let mut worst = 0.0f64;
    let mut coords = 0;
    for _ in 0..cfg.points {
        let pred = random_mask_problem(rng);
        let loss_cfg = random_loss_config(rng, denominator);
        let analytic = loss(&pred, &loss_cfg).grad;
        let numeric = central_difference(
            |x| loss(&pred.with_probs(x.to_vec()).expect("in range"), &loss_cfg).value,
            pred.probs(),
            cfg.step,
        );
        coords += analytic.len();
        worst = worst.max(max_error(&analytic, &numeric));
    }
    GradCheckSummary {
        name,
        points: cfg.points,
        coordinates: coords,
        max_rel_error: worst,
        passed: worst < cfg.tolerance,
    }
}

fn check_detection(cfg: &GradCheckConfig, rng: &mut SeededRng) -> GradCheckSummary {
    let mut worst = 0.0f64;
    let mut coords = 0;
    for _ in 0..cfg.points {
        let det = random_detection_problem(rng);
        let loss_cfg = random_loss_config(rng, DiceDenominator::Standard);
        let analytic = flatten_detection_grad(&fast_rcnn_loss(&det, &loss_cfg).grad);
        let numeric = central_difference(
            |x| fast_rcnn_loss(&unflatten_detection(&det, x), &loss_cfg).value,
            &flatten_detection(&det),
            cfg.step,
        );
        coords += analytic.len();
        worst = worst.max(max_error(&analytic, &numeric));
    }
    GradCheckSummary {
        name: "fast-rcnn",
        points: cfg.points,
        coordinates: coords,
        max_rel_error: worst,
        passed: worst < cfg.tolerance,
    }
}

fn check_total(cfg: &GradCheckConfig, rng: &mut SeededRng) -> GradCheckSummary {
    let mut worst = 0.0f64;
    let mut coords = 0;
    for _ in 0..cfg.points {
        let det = random_detection_problem(rng);
        let mask = random_mask_problem(rng);
        let loss_cfg = random_loss_config(rng, DiceDenominator::Standard);
        let out = total_loss(&det, &mask, &loss_cfg);
        let mut analytic = flatten_detection_grad(&out.grad.detection);
        analytic.extend(&out.grad.mask);
        let det_len = flatten_detection(&det).len();
        let mut x = flatten_detection(&det);
        x.extend(mask.probs());
        let numeric = central_difference(
            |x| {
                let d = unflatten_detection(&det, &x[..det_len]);
                let m = mask.with_probs(x[det_len..].to_vec()).expect("in range");
                total_loss(&d, &m, &loss_cfg).value
            },
            &x,
            cfg.step,
        );
        coords += analytic.len();
        worst = worst.max(max_error(&analytic, &numeric));
    }
    GradCheckSummary {
        name: "total",
        points: cfg.points,
        coordinates: coords,
        max_rel_error: worst,
        passed: worst < cfg.tolerance,
    }
}

/// Runs every loss through the finite-difference check.
pub fn run_suite(cfg: &GradCheckConfig) -> Vec<GradCheckSummary> {
    let mut rng = SeededRng::new(cfg.seed);
    let mut out = vec![
        check_mask_loss(
            "weighted-dice (union)",
            weighted_dice_loss,
            DiceDenominator::Union,
            cfg,
            &mut rng,
        ),
        check_mask_loss(
            "weighted-dice (standard)",
            weighted_dice_loss,
            DiceDenominator::Standard,
            cfg,
            &mut rng,
        ),
        check_mask_loss("focal", focal_loss, DiceDenominator::Standard, cfg, &mut rng),
        check_mask_loss(
            "enhanced-mask (union)",
            enhanced_mask_loss,
            DiceDenominator::Union,
            cfg,
            &mut rng,
        ),
        check_mask_loss(
            "enhanced-mask (standard)",
            enhanced_mask_loss,
            DiceDenominator::Standard,
            cfg,
            &mut rng,
        ),
    ];
    out.push(check_detection(cfg, &mut rng));
    out.push(check_total(cfg, &mut rng));
    out
}
