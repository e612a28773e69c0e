//! Instance matching, precision / recall / F1 and class-level mIoU.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Result;
use crate::raster::{BinaryMask, ClassId, InstanceSet};

/// `|a ∩ b| / |a ∪ b|`, 0 when both are empty.
pub fn instance_iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    let (inter, union) = a.overlap_counts(b)?;
    Ok(if union == 0 { 0.0 } else { inter as f64 / union as f64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[cfg_attr(feature = "serde", serde(rename = "fn"))]
    pub fn_: usize,
}

impl Counts {
    pub fn add(&mut self, other: Counts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    pub fn prf(&self) -> Prf {
        f1_score(self.tp, self.fp, self.fn_)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MatchedPair {
    pub pred: usize,
    pub gt: usize,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatchResult {
    pub pairs: Vec<MatchedPair>,
    pub per_class: BTreeMap<ClassId, Counts>,
}

impl MatchResult {
    pub fn total(&self) -> Counts {
        let mut c = Counts::default();
        self.per_class.values().for_each(|v| c.add(*v));
        c
    }
}

/// Greedy per-class matching: predictions in descending score order (ties by ascending
/// index) each take the unassigned ground-truth instance of their class with the highest
/// IoU (ties by ascending index), provided it reaches `iou_threshold`.
pub fn match_instances(pred: &InstanceSet, gt: &InstanceSet, iou_threshold: f64) -> Result<MatchResult> {
    pred.check_same_dims(gt)?;
    let classes: BTreeSet<ClassId> = pred
        .instances()
        .iter()
        .chain(gt.instances())
        .map(|i| i.class())
        .collect();
    let mut result = MatchResult::default();
    let mut taken = alloc::vec![false; gt.len()];
    for class in classes {
        let mut order: Vec<usize> = (0..pred.len())
            .filter(|&i| pred.instances()[i].class() == class)
            .collect();
        order.sort_by(|&a, &b| {
            pred.instances()[b]
                .score()
                .total_cmp(&pred.instances()[a].score())
                .then(a.cmp(&b))
        });
        let mut counts = Counts::default();
        for p in order {
            let mut best: Option<(usize, f64)> = None;
            for (g, inst) in gt.instances().iter().enumerate() {
                if taken[g] || inst.class() != class {
                    continue;
                }
                let iou = instance_iou(pred.instances()[p].mask(), inst.mask())?;
                if best.is_none_or(|(_, b)| iou > b) {
                    best = Some((g, iou));
                }
            }
            match best {
                Some((g, iou)) if iou >= iou_threshold && iou > 0.0 => {
                    taken[g] = true;
                    counts.tp += 1;
                    result.pairs.push(MatchedPair { pred: p, gt: g, iou });
                }
                _ => counts.fp += 1,
            }
        }
        counts.fn_ = gt
            .instances()
            .iter()
            .enumerate()
            .filter(|(g, inst)| inst.class() == class && !taken[*g])
            .count();
        result.per_class.insert(class, counts);
    }
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Precision, recall and their harmonic mean; every `0/0` is taken as 0.
pub fn f1_score(tp: usize, fp: usize, fn_: usize) -> Prf {
    let precision = ratio(tp as f64, (tp + fp) as f64);
    let recall = ratio(tp as f64, (tp + fn_) as f64);
    Prf {
        precision,
        recall,
        f1: ratio(2.0 * precision * recall, precision + recall),
    }
}

/// Pixel overlap between the class-level union masks of prediction and ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassArea {
    pub intersection: usize,
    pub union: usize,
    pub pred_pixels: usize,
    pub gt_pixels: usize,
}

impl ClassArea {
    pub fn add(&mut self, other: ClassArea) {
        self.intersection += other.intersection;
        self.union += other.union;
        self.pred_pixels += other.pred_pixels;
        self.gt_pixels += other.gt_pixels;
    }

    pub fn iou(&self) -> f64 {
        ratio(self.intersection as f64, self.union as f64)
    }

    pub fn pixel_f1(&self) -> f64 {
        let tp = self.intersection;
        f1_score(tp, self.pred_pixels - tp, self.gt_pixels - tp).f1
    }
}

pub fn class_area(pred: &InstanceSet, gt: &InstanceSet, class: ClassId) -> Result<ClassArea> {
    let a = pred.class_union(class);
    let b = gt.class_union(class);
    let (intersection, union) = a.overlap_counts(&b)?;
    Ok(ClassArea {
        intersection,
        union,
        pred_pixels: a.count(),
        gt_pixels: b.count(),
    })
}

/// Unweighted mean of class IoUs over the classes present in `gt` (restricted to `classes`
/// when given). 0 when no such class exists.
pub fn mean_iou(pred: &InstanceSet, gt: &InstanceSet, classes: Option<&[ClassId]>) -> Result<f64> {
    pred.check_same_dims(gt)?;
    let present: BTreeSet<ClassId> = gt
        .instances()
        .iter()
        .map(|i| i.class())
        .filter(|c| classes.is_none_or(|cs| cs.contains(c)))
        .collect();
    if present.is_empty() {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for &c in &present {
        sum += class_area(pred, gt, c)?.iou();
    }
    Ok(sum / present.len() as f64)
}

/// Relabels road, wall and roof as `surrounding`.
pub fn merge_surrounding(set: &InstanceSet) -> InstanceSet {
    set.map_classes(|c| if c.is_structural() { ClassId::Surrounding } else { c })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct EvalConfig {
    pub iou_threshold: f64,
    pub merge_surrounding: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            iou_threshold: 0.5,
            merge_surrounding: false,
        }
    }
}

/// Everything the corpus report needs from one image.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageEval {
    pub image_id: String,
    pub counts: BTreeMap<ClassId, Counts>,
    pub areas: BTreeMap<ClassId, ClassArea>,
}

pub fn evaluate_image(pred: &InstanceSet, gt: &InstanceSet, cfg: &EvalConfig) -> Result<ImageEval> {
    let (pred, gt) = if cfg.merge_surrounding {
        (merge_surrounding(pred), merge_surrounding(gt))
    } else {
        (pred.clone(), gt.clone())
    };
    let matched = match_instances(&pred, &gt, cfg.iou_threshold)?;
    let mut areas = BTreeMap::new();
    for &class in matched.per_class.keys() {
        areas.insert(class, class_area(&pred, &gt, class)?);
    }
    Ok(ImageEval {
        image_id: gt.image_id.clone(),
        counts: matched.per_class,
        areas,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassMetrics {
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub counts: Counts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Corpus-level IoU of the class union masks; `None` when the class never occurs in
    /// the ground truth.
    pub iou: Option<f64>,
    pub pixel_f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Aggregate {
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub counts: Counts,
    pub precision: f64,
    pub recall: f64,
    /// Micro-averaged over every class.
    pub f1: f64,
    pub miou: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ImageSummary {
    pub image_id: String,
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub counts: Counts,
    pub f1: f64,
    pub miou: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub config: EvalConfig,
    pub images: usize,
    pub per_class: BTreeMap<ClassId, ClassMetrics>,
    pub aggregate: Aggregate,
    pub per_image: Vec<ImageSummary>,
    /// Image ids that had no counterpart and were skipped.
    pub missing: Vec<String>,
}

fn miou_of(areas: &BTreeMap<ClassId, ClassArea>) -> f64 {
    let present: Vec<f64> = areas.values().filter(|a| a.gt_pixels > 0).map(ClassArea::iou).collect();
    ratio(present.iter().sum(), present.len() as f64)
}

impl EvalReport {
    /// Folds per-image results in ascending `image_id` order.
    pub fn from_images(mut images: Vec<ImageEval>, missing: Vec<String>, cfg: &EvalConfig) -> Self {
        images.sort_by(|a, b| a.image_id.cmp(&b.image_id));
        let mut counts: BTreeMap<ClassId, Counts> = BTreeMap::new();
        let mut areas: BTreeMap<ClassId, ClassArea> = BTreeMap::new();
        let mut per_image = Vec::with_capacity(images.len());
        for img in &images {
            let mut total = Counts::default();
            for (&c, &v) in &img.counts {
                counts.entry(c).or_default().add(v);
                total.add(v);
            }
            for (&c, &a) in &img.areas {
                areas.entry(c).or_default().add(a);
            }
            per_image.push(ImageSummary {
                image_id: img.image_id.clone(),
                counts: total,
                f1: total.prf().f1,
                miou: miou_of(&img.areas),
            });
        }
        let mut total = Counts::default();
        let per_class = counts
            .iter()
            .map(|(&c, &v)| {
                total.add(v);
                let prf = v.prf();
                let area = areas.get(&c).copied().unwrap_or_default();
                let metrics = ClassMetrics {
                    counts: v,
                    precision: prf.precision,
                    recall: prf.recall,
                    f1: prf.f1,
                    iou: (area.gt_pixels > 0).then(|| area.iou()),
                    pixel_f1: area.pixel_f1(),
                };
                (c, metrics)
            })
            .collect();
        let prf = total.prf();
        let mut missing = missing;
        missing.sort();
        EvalReport {
            config: cfg.clone(),
            images: images.len(),
            per_class,
            aggregate: Aggregate {
                counts: total,
                precision: prf.precision,
                recall: prf.recall,
                f1: prf.f1,
                miou: miou_of(&areas),
            },
            per_image,
            missing,
        }
    }
}

/// Evaluates `(prediction, ground truth)` pairs as one corpus.
pub fn evaluate_pairs<'a>(
    pairs: impl IntoIterator<Item = (&'a InstanceSet, &'a InstanceSet)>,
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    let images = pairs
        .into_iter()
        .map(|(p, g)| evaluate_image(p, g, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_images(images, Vec::new(), cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{BBox, Instance};
    use alloc::vec;

    fn mask(w: usize, h: usize, px: &[(usize, usize)]) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| px.contains(&(x, y)))
    }

    fn rect(x0: usize, y0: usize, x1: usize, y1: usize) -> BinaryMask {
        BinaryMask::rect(20, 10, BBox::new(x0, y0, x1, y1))
    }

    fn set(items: Vec<(ClassId, BinaryMask, f64)>) -> InstanceSet {
        let (w, h) = items[0].1.dims();
        InstanceSet::from_instances(
            "x",
            w,
            h,
            items
                .into_iter()
                .map(|(c, m, s)| Instance::new(c, m, s).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn iou_examples() {
        let a = mask(2, 2, &[(0, 0), (0, 1)]);
        let b = mask(2, 2, &[(0, 1), (1, 1)]);
        assert_eq!(instance_iou(&a, &b).unwrap(), 1.0 / 3.0);
        assert_eq!(instance_iou(&a, &a).unwrap(), 1.0);
        assert_eq!(instance_iou(&a, &mask(2, 2, &[(1, 0)])).unwrap(), 0.0);
        assert_eq!(instance_iou(&a, &b).unwrap(), instance_iou(&b, &a).unwrap());
    }

    #[test]
    fn f1_examples() {
        assert_eq!(f1_score(1, 0, 0).f1, 1.0);
        assert_eq!(f1_score(0, 3, 2).f1, 0.0);
        assert_eq!(f1_score(0, 0, 0).f1, 0.0);
        let p = f1_score(1, 1, 2);
        assert_eq!(p.precision, 0.5);
        assert_eq!(p.recall, 1.0 / 3.0);
        assert!((p.f1 - 0.4).abs() < 1e-15);
    }

    #[test]
    fn three_gt_two_pred() {
        // gt: 0..10, 12..16, 17..20 (row 0); pred 0 overlaps gt 0 at IoU 0.6, pred 1 hits gt 1 at 0.25
        let gt = set(vec![
            (ClassId::People, rect(0, 0, 10, 1), 1.0),
            (ClassId::People, rect(12, 0, 16, 1), 1.0),
            (ClassId::People, rect(17, 0, 20, 1), 1.0),
        ]);
        let pred = set(vec![
            (ClassId::People, rect(0, 0, 6, 1), 0.9),
            (ClassId::People, rect(12, 0, 13, 1), 0.8),
        ]);
        let m = match_instances(&pred, &gt, 0.5).unwrap();
        assert_eq!(m.total(), Counts { tp: 1, fp: 1, fn_: 2 });
        assert!((m.total().prf().f1 - 0.4).abs() < 1e-15);
        assert_eq!(
            m.pairs,
            [MatchedPair {
                pred: 0,
                gt: 0,
                iou: 0.6
            }]
        );
    }

    #[test]
    fn equal_scores_tie_break_by_index() {
        let gt = set(vec![(ClassId::Wall, rect(0, 0, 10, 2), 1.0)]);
        let pred = set(vec![
            (ClassId::Wall, rect(0, 0, 9, 2), 0.5),
            (ClassId::Wall, rect(0, 0, 10, 2), 0.5),
        ]);
        let m = match_instances(&pred, &gt, 0.5).unwrap();
        assert_eq!(m.pairs[0].pred, 0);
    }

    #[test]
    fn no_predictions() {
        let gt = set(vec![
            (ClassId::Wall, rect(0, 0, 4, 2), 1.0),
            (ClassId::Road, rect(5, 5, 9, 9), 1.0),
        ]);
        let m = match_instances(&gt.empty_like(), &gt, 0.5).unwrap();
        assert_eq!(m.total(), Counts { tp: 0, fp: 0, fn_: 2 });
    }

    #[test]
    fn miou_two_class_fixture() {
        // class wall: IoU 1/2, class road: IoU 1
        let gt = set(vec![
            (ClassId::Wall, mask(2, 2, &[(0, 0)]), 1.0),
            (ClassId::Road, mask(2, 2, &[(0, 1), (1, 1)]), 1.0),
        ]);
        let pred = set(vec![
            (ClassId::Wall, mask(2, 2, &[(0, 0), (1, 0)]), 1.0),
            (ClassId::Road, mask(2, 2, &[(0, 1), (1, 1)]), 1.0),
        ]);
        assert_eq!(mean_iou(&pred, &gt, None).unwrap(), 0.75);
        assert_eq!(mean_iou(&gt, &gt, None).unwrap(), 1.0);
        let only_road = set(vec![(ClassId::Road, mask(2, 2, &[(0, 1), (1, 1)]), 1.0)]);
        assert_eq!(mean_iou(&only_road, &gt, None).unwrap(), 0.5);
    }

    #[test]
    fn merge_examples() {
        let s = set(vec![
            (ClassId::Wall, rect(0, 0, 2, 2), 1.0),
            (ClassId::People, rect(3, 3, 5, 5), 1.0),
            (ClassId::Road, rect(6, 6, 8, 8), 1.0),
        ]);
        let m = merge_surrounding(&s);
        let classes: Vec<_> = m.instances().iter().map(|i| i.class()).collect();
        assert_eq!(classes, [ClassId::Surrounding, ClassId::People, ClassId::Surrounding]);
        assert_eq!(m.instances()[0].mask(), s.instances()[0].mask());
    }

    #[test]
    fn self_evaluation_is_perfect() {
        let gt = set(vec![
            (ClassId::Wall, rect(0, 0, 4, 2), 1.0),
            (ClassId::Road, rect(5, 5, 9, 9), 1.0),
        ]);
        let r = evaluate_pairs([(&gt, &gt)], &EvalConfig::default()).unwrap();
        assert_eq!(r.aggregate.f1, 1.0);
        assert_eq!(r.aggregate.miou, 1.0);
        assert!(r.per_class.values().all(|c| c.f1 == 1.0 && c.iou == Some(1.0)));
        let empty = evaluate_pairs([(&gt.empty_like(), &gt)], &EvalConfig::default()).unwrap();
        assert_eq!(empty.aggregate.f1, 0.0);
    }
}
