//! Detection and mask losses with analytic gradients.
//!
//! Nothing here trains a network. The functions take prediction tensors and return the
//! loss value together with its gradient, so they can be verified against finite
//! differences (see [`crate::gradcheck`]) and dropped into any training loop.
//!
//! * [`fast_rcnn_loss`]: softmax cross-entropy over ROIs plus a smooth-L1 box term on
//!   foreground ROIs, balanced by `lambda`.
//! * [`weighted_dice_loss`]: `1 - sum_c w_c 2 TP_c / sum_c w_c D_c` on soft counts, where
//!   `D_c` is `TP + FP + FN` ([`DiceDenominator::Union`]) or `2 TP + FP + FN`
//!   ([`DiceDenominator::Standard`]). The union form scores a perfect match as `-1`.
//! * [`focal_loss`]: target-conditioned binary focal loss averaged over pixels.
//! * [`enhanced_mask_loss`] and [`total_loss`]: sums of the above.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::raster::{ClassId, RasterImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DiceDenominator {
    /// `TP + FP + FN`; a perfect prediction scores a loss of `-1`.
    Union,
    /// `2 TP + FP + FN`; a perfect prediction scores 0.
    #[default]
    Standard,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct LossConfig {
    /// Focal weight of the positive class.
    pub alpha: f64,
    /// Focal focusing exponent.
    pub gamma_f: f64,
    /// Dice class weights; classes not listed weigh 1.
    pub class_weights: BTreeMap<ClassId, f64>,
    /// Box-term balance.
    pub lambda: f64,
    pub dice_denominator: DiceDenominator,
    /// Probabilities are clamped to `[eps, 1 - eps]` before any logarithm.
    pub prob_epsilon: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            alpha: 0.25,
            gamma_f: 2.0,
            class_weights: BTreeMap::new(),
            lambda: 1.0,
            dice_denominator: DiceDenominator::Standard,
            prob_epsilon: 1e-7,
        }
    }
}

impl LossConfig {
    pub fn weight(&self, class: ClassId) -> f64 {
        self.class_weights.get(&class).copied().unwrap_or(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidConfig("alpha must be in [0, 1]".into()));
        }
        if !(self.gamma_f >= 0.0 && self.gamma_f.is_finite()) {
            return Err(Error::InvalidConfig("gamma_f must be >= 0".into()));
        }
        if self.class_weights.values().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidConfig("class weights must be > 0".into()));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::InvalidConfig("lambda must be >= 0".into()));
        }
        if !(self.prob_epsilon > 0.0 && self.prob_epsilon < 0.5) {
            return Err(Error::InvalidConfig("prob_epsilon must be in (0, 0.5)".into()));
        }
        Ok(())
    }
}

/// Per-class soft masks. Values are stored class-major: entry `c * pixels + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftMaskPrediction {
    width: usize,
    height: usize,
    classes: Vec<ClassId>,
    probs: Vec<f64>,
    targets: Vec<bool>,
}

impl SoftMaskPrediction {
    pub fn new(
        width: usize,
        height: usize,
        classes: Vec<ClassId>,
        probs: Vec<f64>,
        targets: Vec<bool>,
    ) -> Result<Self> {
        let n = width * height * classes.len();
        if probs.len() != n || targets.len() != n {
            return Err(Error::InvalidImage(alloc::format!(
                "expected {n} probabilities and targets, got {} and {}",
                probs.len(),
                targets.len()
            )));
        }
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidImage("probabilities must lie in [0, 1]".into()));
        }
        Ok(Self {
            width,
            height,
            classes,
            probs,
            targets,
        })
    }

    /// One class, `probs` and `targets` row-major over `width x height`.
    pub fn single(width: usize, height: usize, class: ClassId, probs: Vec<f64>, targets: Vec<bool>) -> Result<Self> {
        Self::new(width, height, vec![class], probs, targets)
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn classes(&self) -> &[ClassId] {
        &self.classes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn targets(&self) -> &[bool] {
        &self.targets
    }

    /// Same targets, new probabilities (used by finite-difference checks).
    pub fn with_probs(&self, probs: Vec<f64>) -> Result<Self> {
        Self::new(
            self.width,
            self.height,
            self.classes.clone(),
            probs,
            self.targets.clone(),
        )
    }

    fn class_slices(&self) -> impl Iterator<Item = (ClassId, &[f64], &[bool])> {
        let n = self.pixels();
        self.classes
            .iter()
            .enumerate()
            .map(move |(c, &id)| (id, &self.probs[c * n..(c + 1) * n], &self.targets[c * n..(c + 1) * n]))
    }
}

/// Soft confusion counts of one class.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SoftCounts {
    pub tp: f64,
    pub fp: f64,
    pub fn_: f64,
}

/// `TP = sum p y`, `FP = sum p (1 - y)`, `FN = sum (1 - p) y` per class.
pub fn soft_counts(pred: &SoftMaskPrediction) -> Vec<SoftCounts> {
    pred.class_slices()
        .map(|(_, p, y)| {
            let mut c = SoftCounts::default();
            for (&p, &y) in p.iter().zip(y) {
                if y {
                    c.tp += p;
                    c.fn_ += 1.0 - p;
                } else {
                    c.fp += p;
                }
            }
            c
        })
        .collect()
}

/// Loss value and gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct LossOutput<G> {
    pub value: f64,
    pub grad: G,
}

pub fn weighted_dice_loss(pred: &SoftMaskPrediction, cfg: &LossConfig) -> LossOutput<Vec<f64>> {
    let counts = soft_counts(pred);
    let mut num = 0.0;
    let mut den = 0.0;
    for (&class, c) in pred.classes.iter().zip(&counts) {
        let w = cfg.weight(class);
        num += w * 2.0 * c.tp;
        den += w * match cfg.dice_denominator {
            DiceDenominator::Union => c.tp + c.fp + c.fn_,
            DiceDenominator::Standard => 2.0 * c.tp + c.fp + c.fn_,
        };
    }
    let mut grad = vec![0.0; pred.probs.len()];
    if den == 0.0 {
        // nothing predicted and nothing to find
        return LossOutput { value: 0.0, grad };
    }
    let n = pred.pixels();
    for (ci, (class, _, y)) in pred.class_slices().enumerate() {
        let w = cfg.weight(class);
        for (k, &y) in y.iter().enumerate() {
            let y = if y { 1.0 } else { 0.0 };
            let d_den = match cfg.dice_denominator {
                DiceDenominator::Union => 1.0 - y,
                DiceDenominator::Standard => 1.0,
            };
            grad[ci * n + k] = -w * (2.0 * y * den - num * d_den) / (den * den);
        }
    }
    LossOutput {
        value: 1.0 - num / den,
        grad,
    }
}

/// Focal term and its derivative for one pixel at probability `p` (already clamped).
fn focal_pixel(p: f64, target: bool, alpha: f64, gamma: f64) -> (f64, f64) {
    if target {
        let q = 1.0 - p;
        let qg = libm::pow(q, gamma);
        let ln_p = libm::log(p);
        let value = -alpha * qg * ln_p;
        let dq = if gamma == 0.0 {
            0.0
        } else {
            gamma * libm::pow(q, gamma - 1.0)
        };
        (value, alpha * (dq * ln_p - qg / p))
    } else {
        let pg = libm::pow(p, gamma);
        let ln_q = libm::log(1.0 - p);
        let value = -(1.0 - alpha) * pg * ln_q;
        let dp = if gamma == 0.0 {
            0.0
        } else {
            gamma * libm::pow(p, gamma - 1.0)
        };
        (value, -(1.0 - alpha) * (dp * ln_q - pg / (1.0 - p)))
    }
}

/// Mean over every class and pixel of the target-conditioned focal loss.
pub fn focal_loss(pred: &SoftMaskPrediction, cfg: &LossConfig) -> LossOutput<Vec<f64>> {
    let n = pred.probs.len();
    let mut grad = vec![0.0; n];
    if n == 0 {
        return LossOutput { value: 0.0, grad };
    }
    let eps = cfg.prob_epsilon;
    let scale = 1.0 / n as f64;
    let mut total = 0.0;
    for (k, (&p, &y)) in pred.probs.iter().zip(&pred.targets).enumerate() {
        let clamped = p.clamp(eps, 1.0 - eps);
        let (v, d) = focal_pixel(clamped, y, cfg.alpha, cfg.gamma_f);
        total += v;
        if clamped == p {
            grad[k] = d * scale;
        }
    }
    LossOutput {
        value: total * scale,
        grad,
    }
}

/// Weighted Dice plus focal; the gradient is the sum of both.
pub fn enhanced_mask_loss(pred: &SoftMaskPrediction, cfg: &LossConfig) -> LossOutput<Vec<f64>> {
    let dice = weighted_dice_loss(pred, cfg);
    let focal = focal_loss(pred, cfg);
    LossOutput {
        value: dice.value + focal.value,
        grad: dice.grad.iter().zip(&focal.grad).map(|(a, b)| a + b).collect(),
    }
}

/// Per-ROI classification logits and box regression, with targets.
///
/// Class index 0 is background: ROIs labelled 0 contribute no box term.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionPrediction {
    logits: Vec<Vec<f64>>,
    class_targets: Vec<usize>,
    box_params: Vec<[f64; 4]>,
    box_targets: Vec<[f64; 4]>,
    n_class: usize,
    n_box: usize,
}

impl DetectionPrediction {
    /// Normalizers default to the number of ROIs.
    pub fn new(
        logits: Vec<Vec<f64>>,
        class_targets: Vec<usize>,
        box_params: Vec<[f64; 4]>,
        box_targets: Vec<[f64; 4]>,
    ) -> Result<Self> {
        let rois = logits.len();
        if rois == 0 {
            return Err(Error::InvalidConfig("at least one ROI is required".into()));
        }
        let k = logits[0].len();
        if k < 2 || logits.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidConfig(
                "every ROI needs the same number (>= 2) of class logits".into(),
            ));
        }
        if class_targets.len() != rois || box_params.len() != rois || box_targets.len() != rois {
            return Err(Error::InvalidConfig(
                "targets and boxes must have one entry per ROI".into(),
            ));
        }
        if class_targets.iter().any(|&t| t >= k) {
            return Err(Error::InvalidConfig("class target out of range".into()));
        }
        Ok(Self {
            logits,
            class_targets,
            box_params,
            box_targets,
            n_class: rois,
            n_box: rois,
        })
    }

    /// From class probabilities; each row must sum to 1 within 1e-6.
    pub fn from_probs(
        probs: Vec<Vec<f64>>,
        class_targets: Vec<usize>,
        box_params: Vec<[f64; 4]>,
        box_targets: Vec<[f64; 4]>,
    ) -> Result<Self> {
        for row in &probs {
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-6 || row.iter().any(|p| !(*p > 0.0 && *p <= 1.0)) {
                return Err(Error::InvalidConfig(
                    "probability rows must be positive and sum to 1".into(),
                ));
            }
        }
        let logits = probs
            .into_iter()
            .map(|row| row.into_iter().map(libm::log).collect())
            .collect();
        Self::new(logits, class_targets, box_params, box_targets)
    }

    pub fn with_normalizers(mut self, n_class: usize, n_box: usize) -> Result<Self> {
        if n_class == 0 || n_box == 0 {
            return Err(Error::InvalidConfig("normalizers must be >= 1".into()));
        }
        self.n_class = n_class;
        self.n_box = n_box;
        Ok(self)
    }

    pub fn rois(&self) -> usize {
        self.logits.len()
    }

    pub fn logits(&self) -> &[Vec<f64>] {
        &self.logits
    }

    pub fn box_params(&self) -> &[[f64; 4]] {
        &self.box_params
    }

    pub fn class_targets(&self) -> &[usize] {
        &self.class_targets
    }

    pub fn box_targets(&self) -> &[[f64; 4]] {
        &self.box_targets
    }

    pub fn normalizers(&self) -> (usize, usize) {
        (self.n_class, self.n_box)
    }

    /// Same targets, replaced logits and boxes.
    pub fn with_params(&self, logits: Vec<Vec<f64>>, box_params: Vec<[f64; 4]>) -> Result<Self> {
        Self::new(logits, self.class_targets.clone(), box_params, self.box_targets.clone())?
            .with_normalizers(self.n_class, self.n_box)
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| libm::exp(z - max)).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Smooth L1 with unit transition point, and its derivative.
pub fn smooth_l1(x: f64) -> (f64, f64) {
    if x.abs() < 1.0 {
        (0.5 * x * x, x)
    } else {
        (x.abs() - 0.5, x.signum())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionGradient {
    pub logits: Vec<Vec<f64>>,
    pub boxes: Vec<[f64; 4]>,
}

/// Detection loss split into its two terms.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionLoss {
    pub value: f64,
    pub class_term: f64,
    pub box_term: f64,
    pub grad: DetectionGradient,
}

pub fn fast_rcnn_loss(pred: &DetectionPrediction, cfg: &LossConfig) -> DetectionLoss {
    let eps = cfg.prob_epsilon;
    let inv_class = 1.0 / pred.n_class as f64;
    let box_scale = cfg.lambda / pred.n_box as f64;
    let mut class_term = 0.0;
    let mut box_term = 0.0;
    let mut grad_logits = Vec::with_capacity(pred.rois());
    let mut grad_boxes = Vec::with_capacity(pred.rois());
    for i in 0..pred.rois() {
        let target = pred.class_targets[i];
        let probs = softmax(&pred.logits[i]);
        let p = probs[target];
        let clamped = p.clamp(eps, 1.0 - eps);
        class_term -= libm::log(clamped) * inv_class;
        let g = if clamped == p {
            probs
                .iter()
                .enumerate()
                .map(|(k, &pk)| (pk - if k == target { 1.0 } else { 0.0 }) * inv_class)
                .collect()
        } else {
            vec![0.0; probs.len()]
        };
        grad_logits.push(g);

        let mut gb = [0.0; 4];
        if target != 0 {
            for k in 0..4 {
                let (v, d) = smooth_l1(pred.box_params[i][k] - pred.box_targets[i][k]);
                box_term += v * box_scale;
                gb[k] = d * box_scale;
            }
        }
        grad_boxes.push(gb);
    }
    DetectionLoss {
        value: class_term + box_term,
        class_term,
        box_term,
        grad: DetectionGradient {
            logits: grad_logits,
            boxes: grad_boxes,
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TotalGradient {
    pub detection: DetectionGradient,
    pub mask: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TotalLoss {
    pub value: f64,
    pub detection: f64,
    pub mask: f64,
    pub grad: TotalGradient,
}

/// Detection loss plus enhanced mask loss.
pub fn total_loss(det: &DetectionPrediction, mask: &SoftMaskPrediction, cfg: &LossConfig) -> TotalLoss {
    let d = fast_rcnn_loss(det, cfg);
    let m = enhanced_mask_loss(mask, cfg);
    TotalLoss {
        value: d.value + m.value,
        detection: d.value,
        mask: m.value,
        grad: TotalGradient {
            detection: d.grad,
            mask: m.grad,
        },
    }
}

/// Mean squared difference over every pixel and channel.
pub fn mse_loss(a: &RasterImage, b: &RasterImage) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(Error::dims(a.dims(), b.dims()));
    }
    let n = a.data().len();
    if n == 0 {
        return Ok(0.0);
    }
    Ok(a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(v: &[u8]) -> Vec<bool> {
        v.iter().map(|&b| b == 1).collect()
    }

    fn binary(v: &[u8]) -> Vec<f64> {
        v.iter().map(|&b| f64::from(b)).collect()
    }

    fn cfg_with(denominator: DiceDenominator) -> LossConfig {
        LossConfig {
            dice_denominator: denominator,
            ..LossConfig::default()
        }
    }

    #[test]
    fn perfect_match_union_mode_is_minus_one() {
        let t = [1, 0, 1, 1];
        let pred = SoftMaskPrediction::single(2, 2, ClassId::People, binary(&t), bits(&t)).unwrap();
        assert_eq!(weighted_dice_loss(&pred, &cfg_with(DiceDenominator::Union)).value, -1.0);
        assert_eq!(
            weighted_dice_loss(&pred, &cfg_with(DiceDenominator::Standard)).value,
            0.0
        );
    }

    #[test]
    fn two_by_two_counts() {
        let pred = SoftMaskPrediction::single(2, 2, ClassId::Wall, binary(&[1, 1, 0, 0]), bits(&[1, 0, 1, 0])).unwrap();
        let c = soft_counts(&pred)[0];
        assert_eq!((c.tp, c.fp, c.fn_), (1.0, 1.0, 1.0));
        let union = weighted_dice_loss(&pred, &cfg_with(DiceDenominator::Union)).value;
        let standard = weighted_dice_loss(&pred, &cfg_with(DiceDenominator::Standard)).value;
        assert!((union - 1.0 / 3.0).abs() < 1e-15);
        assert!((standard - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empty_target_and_prediction_is_zero() {
        let pred = SoftMaskPrediction::single(3, 1, ClassId::Road, vec![0.0; 3], vec![false; 3]).unwrap();
        let out = weighted_dice_loss(&pred, &LossConfig::default());
        assert_eq!(out.value, 0.0);
        assert!(out.grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn focal_single_pixel() {
        let pred = SoftMaskPrediction::single(1, 1, ClassId::People, vec![0.9], vec![true]).unwrap();
        let v = focal_loss(&pred, &LossConfig::default()).value;
        // -0.25 * 0.1^2 * ln 0.9
        let expected = -0.25 * 0.01 * 0.9f64.ln();
        assert!((v - expected).abs() < 1e-15);
        assert!((v - 2.634e-4).abs() < 1e-7);
    }

    #[test]
    fn focal_confident_correct_is_near_zero() {
        let cfg = LossConfig::default();
        let pred = SoftMaskPrediction::single(1, 1, ClassId::People, vec![1.0 - cfg.prob_epsilon], vec![true]).unwrap();
        assert!(focal_loss(&pred, &cfg).value < 1e-20);
        let saturated = SoftMaskPrediction::single(1, 1, ClassId::People, vec![0.0], vec![true]).unwrap();
        assert!(focal_loss(&saturated, &cfg).value.is_finite());
    }

    #[test]
    fn enhanced_is_sum_of_parts() {
        let pred =
            SoftMaskPrediction::single(2, 2, ClassId::Wall, vec![0.9, 0.8, 0.2, 0.1], bits(&[1, 0, 1, 0])).unwrap();
        let cfg = LossConfig::default();
        let d = weighted_dice_loss(&pred, &cfg);
        let f = focal_loss(&pred, &cfg);
        let e = enhanced_mask_loss(&pred, &cfg);
        assert_eq!(e.value, d.value + f.value);
        for k in 0..4 {
            assert_eq!(e.grad[k], d.grad[k] + f.grad[k]);
        }
    }

    #[test]
    fn background_roi_has_no_box_term() {
        let det = DetectionPrediction::from_probs(
            vec![vec![0.8, 0.2]],
            vec![0],
            vec![[5.0, -3.0, 2.0, 9.0]],
            vec![[0.0; 4]],
        )
        .unwrap();
        let out = fast_rcnn_loss(&det, &LossConfig::default());
        assert_eq!(out.box_term, 0.0);
        assert!(out.grad.boxes[0].iter().all(|&g| g == 0.0));
    }

    #[test]
    fn perfect_detection_is_near_zero() {
        let eps = LossConfig::default().prob_epsilon;
        let det = DetectionPrediction::from_probs(vec![vec![eps, 1.0 - eps]], vec![1], vec![[0.3; 4]], vec![[0.3; 4]])
            .unwrap();
        assert!(fast_rcnn_loss(&det, &LossConfig::default()).value < 1e-6);
    }

    #[test]
    fn two_roi_scalar_example() {
        let cfg = LossConfig::default();
        let boxes = vec![[0.5, 0.0, 0.0, 0.0], [0.0; 4]];
        let det = DetectionPrediction::from_probs(
            vec![vec![0.7, 0.3], vec![0.4, 0.6]],
            vec![0, 1],
            boxes.clone(),
            vec![[0.0; 4]; 2],
        )
        .unwrap();
        // ROI 0 is background: only the cross-entropy terms remain
        let expected = (-(0.7f64.ln()) - 0.6f64.ln()) / 2.0;
        assert!((fast_rcnn_loss(&det, &cfg).value - expected).abs() < 1e-12);

        let fg = DetectionPrediction::from_probs(
            vec![vec![0.7, 0.3], vec![0.4, 0.6]],
            vec![1, 1],
            boxes,
            vec![[0.0; 4]; 2],
        )
        .unwrap();
        let expected = (-(0.3f64.ln()) - 0.6f64.ln()) / 2.0 + 0.5 * 0.25 / 2.0;
        assert!((fast_rcnn_loss(&fg, &cfg).value - expected).abs() < 1e-12);
    }

    #[test]
    fn invalid_detection_inputs() {
        assert!(DetectionPrediction::new(vec![], vec![], vec![], vec![]).is_err());
        assert!(DetectionPrediction::new(vec![vec![0.0]], vec![0], vec![[0.0; 4]], vec![[0.0; 4]]).is_err());
        assert!(DetectionPrediction::new(vec![vec![0.0, 1.0]], vec![2], vec![[0.0; 4]], vec![[0.0; 4]]).is_err());
        assert!(
            DetectionPrediction::from_probs(vec![vec![0.5, 0.6]], vec![0], vec![[0.0; 4]], vec![[0.0; 4]]).is_err()
        );
    }

    #[test]
    fn mse_cases() {
        let a = RasterImage::filled(3, 3, 1, 0.0);
        let b = RasterImage::filled(3, 3, 1, 1.0);
        assert_eq!(mse_loss(&a, &a).unwrap(), 0.0);
        assert_eq!(mse_loss(&a, &b).unwrap(), 1.0);
        assert!(mse_loss(&a, &RasterImage::filled(3, 2, 1, 0.0)).is_err());
        let grad = RasterImage::from_fn(4, 4, 1, |x, y, _| (x + 4 * y) as f64 / 15.0);
        let half = RasterImage::filled(4, 4, 1, 0.5);
        let direct: f64 = (0..16).map(|i| (i as f64 / 15.0 - 0.5).powi(2)).sum::<f64>() / 16.0;
        assert!((mse_loss(&grad, &half).unwrap() - direct).abs() < 1e-15);
    }

    #[test]
    fn class_weight_scaling_is_invariant() {
        let pred = SoftMaskPrediction::new(
            2,
            1,
            vec![ClassId::Wall, ClassId::People],
            vec![0.2, 0.7, 0.9, 0.4],
            bits(&[0, 1, 1, 0]),
        )
        .unwrap();
        let mut cfg = LossConfig::default();
        cfg.class_weights.insert(ClassId::Wall, 0.5);
        cfg.class_weights.insert(ClassId::People, 3.0);
        let base = weighted_dice_loss(&pred, &cfg).value;
        for w in cfg.class_weights.values_mut() {
            *w *= 7.5;
        }
        assert!((weighted_dice_loss(&pred, &cfg).value - base).abs() < 1e-14);
    }

    #[test]
    fn config_validation() {
        assert!(LossConfig::default().validate().is_ok());
        assert!(LossConfig {
            alpha: 1.5,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(LossConfig {
            gamma_f: -1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        let mut bad = LossConfig::default();
        bad.class_weights.insert(ClassId::Road, 0.0);
        assert!(bad.validate().is_err());
    }
}
