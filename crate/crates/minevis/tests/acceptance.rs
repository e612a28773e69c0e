//! Acceptance suite: one PASS / FAIL line per criterion, non-zero exit if any fails.

mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::time::{Duration, Instant};

use common::*;
use minevis::config::PipelineConfig;
use minevis::io::{read_image, read_instance_dir, write_instances};
use minevis::pipeline::{run_pipeline, RunOutput};
use minevis::report::evaluate_dirs;
use minevis_core::enhance::{decompose, enhance, EnhanceConfig};
use minevis_core::eval::{f1_score, match_instances, mean_iou, EvalConfig};
use minevis_core::fusion::{
    apply_grid_rules, detect_orb, estimate_transform, intersect_aligned, match_features, warp_image, warp_mask,
    FusionConfig, PlanarTransform,
};
use minevis_core::gradcheck::{run_suite, GradCheckConfig};
use minevis_core::losses::{
    focal_loss, soft_counts, weighted_dice_loss, DiceDenominator, LossConfig, SoftMaskPrediction,
};
use minevis_core::mock::{mock_segment, shift_set, without_class};
use minevis_core::morphology::close;
use minevis_core::rng::{derive_seed, SeededRng};
use minevis_core::synth::{grid_rule_cases, random_blob_mask, textured_fixture};
use minevis_core::{BBox, BinaryMask, ClassId, Instance, InstanceSet, RasterImage};
use tempfile::tempdir;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn gradient_suite() -> Verdict {
    let t = Instant::now();
    let results = run_suite(&GradCheckConfig::default());
    let elapsed = t.elapsed();
    let worst = results.iter().map(|s| s.max_rel_error).fold(0.0, f64::max);
    let failed: Vec<_> = results.iter().filter(|s| !s.passed).map(|s| s.name).collect();
    let names: Vec<_> = results.iter().map(|s| s.name).collect();
    verdict(
        failed.is_empty() && elapsed < Duration::from_secs(10),
        format!(
            "{} losses x 100 points, max rel error {worst:.2e} (< 1e-4), failing {failed:?}, {:.2} s (< 10 s) [{}]",
            results.len(),
            secs(elapsed),
            names.join(", ")
        ),
    )
}

const CLASSES: [ClassId; 3] = [ClassId::Wall, ClassId::People, ClassId::Road];

fn loss_oracle() -> Verdict {
    let mut rng = SeededRng::new(derive_seed(1, "loss-oracle"));
    let mut count_mismatch = 0;
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let (w, h) = (1 + rng.below(8), 1 + rng.below(8));
        let k = 1 + rng.below(3);
        let preds: Vec<Vec<Vec<bool>>> = (0..k)
            .map(|_| (0..h).map(|_| (0..w).map(|_| rng.bernoulli(0.5)).collect()).collect())
            .collect();
        let gts: Vec<Vec<Vec<bool>>> = (0..k)
            .map(|_| (0..h).map(|_| (0..w).map(|_| rng.bernoulli(0.5)).collect()).collect())
            .collect();
        let weights: Vec<f64> = (0..k).map(|_| rng.uniform_range(0.5, 2.0)).collect();
        let mut cfg = LossConfig::default();
        for (c, wgt) in CLASSES.iter().zip(&weights) {
            cfg.class_weights.insert(*c, *wgt);
        }
        let probs: Vec<f64> = preds
            .iter()
            .flatten()
            .flatten()
            .map(|&b| if b { 1.0 } else { 0.0 })
            .collect();
        let targets: Vec<bool> = gts.iter().flatten().flatten().copied().collect();
        let pred = SoftMaskPrediction::new(w, h, CLASSES[..k].to_vec(), probs, targets).unwrap();

        // integer confusion counts by direct scan
        let mut ints = Vec::new();
        for c in 0..k {
            let (mut tp, mut fp, mut fn_) = (0u32, 0u32, 0u32);
            for y in 0..h {
                for x in 0..w {
                    match (preds[c][y][x], gts[c][y][x]) {
                        (true, true) => tp += 1,
                        (true, false) => fp += 1,
                        (false, true) => fn_ += 1,
                        _ => {}
                    }
                }
            }
            ints.push((tp, fp, fn_));
        }
        for (s, &(tp, fp, fn_)) in soft_counts(&pred).iter().zip(&ints) {
            if s.tp != tp as f64 || s.fp != fp as f64 || s.fn_ != fn_ as f64 {
                count_mismatch += 1;
            }
        }
        for mode in [DiceDenominator::Union, DiceDenominator::Standard] {
            cfg.dice_denominator = mode;
            let (mut num, mut den) = (0.0, 0.0);
            for (c, &(tp, fp, fn_)) in ints.iter().enumerate() {
                num += weights[c] * 2.0 * tp as f64;
                den += weights[c]
                    * match mode {
                        DiceDenominator::Union => (tp + fp + fn_) as f64,
                        DiceDenominator::Standard => (2 * tp + fp + fn_) as f64,
                    };
            }
            let oracle = if den == 0.0 { 0.0 } else { 1.0 - num / den };
            worst = worst.max((weighted_dice_loss(&pred, &cfg).value - oracle).abs());
        }
    }
    verdict(
        count_mismatch == 0 && worst <= 1e-12,
        format!("500 mask pairs, count mismatches {count_mismatch}, max |loss - oracle| {worst:.1e} (<= 1e-12)"),
    )
}

fn focal_reduction() -> Verdict {
    let mut rng = SeededRng::new(derive_seed(1, "focal-bce"));
    let n = 1000;
    let probs: Vec<f64> = (0..n).map(|_| rng.uniform_range(0.001, 0.999)).collect();
    let targets: Vec<bool> = (0..n).map(|_| rng.bernoulli(0.5)).collect();
    let bce = probs
        .iter()
        .zip(&targets)
        .map(|(&p, &y)| if y { -p.ln() } else { -(1.0 - p).ln() })
        .sum::<f64>()
        / n as f64;
    let pred = SoftMaskPrediction::single(n, 1, ClassId::Wall, probs, targets).unwrap();
    let cfg = LossConfig {
        alpha: 0.5,
        gamma_f: 0.0,
        ..LossConfig::default()
    };
    let diff = (focal_loss(&pred, &cfg).value - 0.5 * bce).abs();
    verdict(
        diff <= 1e-12,
        format!("1000 pixels, |focal - 0.5 BCE| = {diff:.1e} (<= 1e-12)"),
    )
}

fn perfect_match_values() -> Verdict {
    let mask = vec![true, false, true, true, false, false, true, false, true];
    let probs = mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let pred = SoftMaskPrediction::single(3, 3, ClassId::Road, probs, mask).unwrap();
    let union = weighted_dice_loss(
        &pred,
        &LossConfig {
            dice_denominator: DiceDenominator::Union,
            ..LossConfig::default()
        },
    )
    .value;
    let standard = weighted_dice_loss(&pred, &LossConfig::default()).value;
    verdict(
        union == -1.0 && standard == 0.0,
        format!("perfect match: union-denominator loss {union}, standard loss {standard}"),
    )
}

fn alignment_recovery() -> Verdict {
    let t0 = Instant::now();
    let cfg = FusionConfig::default();
    let mut rng = SeededRng::new(derive_seed(1, "alignment"));
    let (mut recovered, mut fallbacks) = (0, 0);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let img = textured_fixture(derive_seed(2, &format!("texture/{i}")), 256, 256);
        let s = rng.uniform_range(0.8, 1.25);
        let theta = rng.uniform_range(-15.0, 15.0) * PI / 180.0;
        let (tx, ty) = (rng.uniform_range(-20.0, 20.0), rng.uniform_range(-20.0, 20.0));
        // about the image centre, then translated
        let c = 127.5;
        let (a, b) = (s * theta.cos(), s * theta.sin());
        let truth = PlanarTransform::similarity(s, theta, c - (a * c - b * c) + tx, c - (b * c + a * c) + ty);
        let moved = warp_image(&img, &truth, 0.0);
        let fa = detect_orb(&img, &cfg);
        let fb = detect_orb(&moved, &cfg);
        let estimate = match_features(&fa, &fb, &cfg).and_then(|m| estimate_transform(&m, &fa, &fb, &cfg));
        let t = match estimate {
            Ok(t) => t,
            Err(e) => {
                println!("    fixture {i}: alignment failed ({e}), identity fallback recorded");
                fallbacks += 1;
                PlanarTransform::identity()
            }
        };
        let err = t.corner_error(&truth, 256, 256);
        worst = worst.max(err);
        if err < 2.0 {
            recovered += 1;
        }
    }
    let elapsed = t0.elapsed();
    verdict(
        recovered >= 48 && elapsed < Duration::from_secs(60),
        format!(
            "{recovered}/50 recovered with mean corner error < 2 px (>= 48), fallbacks {fallbacks}, worst {worst:.2} px, {:.1} s (< 60 s)",
            secs(elapsed)
        ),
    )
}

fn fusion_invariants() -> Verdict {
    let mut rng = SeededRng::new(derive_seed(1, "fusion-invariants"));
    let (mut containment, mut idempotence) = (0, 0);
    for i in 0..200 {
        let (w, h) = (8 + rng.below(40), 8 + rng.below(40));
        let a = random_blob_mask(&mut rng, w, h);
        let b = random_blob_mask(&mut rng, w, h);
        let t = PlanarTransform::similarity(
            rng.uniform_range(0.9, 1.1),
            rng.uniform_range(-0.1, 0.1),
            rng.uniform_range(-4.0, 4.0),
            rng.uniform_range(-4.0, 4.0),
        );
        let cfg = FusionConfig {
            struct_elem: [1, 3, 5, 7][i % 4],
            symmetric_paper_mode: i % 2 == 1,
            ..FusionConfig::default()
        };
        let fused = intersect_aligned(&a, &b, &t, &cfg).unwrap();
        let other = if cfg.symmetric_paper_mode {
            warp_mask(&b, &t.inverse())
        } else {
            b.clone()
        };
        if fused.is_subset_of(&warp_mask(&a, &t)).unwrap() && fused.is_subset_of(&other).unwrap() {
            containment += 1;
        }
        let once = close(&fused, cfg.struct_elem);
        if close(&once, cfg.struct_elem) == once {
            idempotence += 1;
        }
    }
    verdict(
        containment == 200 && idempotence == 200,
        format!("200 random pairs: containment {containment}/200, closing idempotent {idempotence}/200"),
    )
}

fn grid_rule_table() -> Verdict {
    let cfg = FusionConfig::default();
    let mut wrong = Vec::new();
    let mut total = 0;
    for case in grid_rule_cases() {
        let out = apply_grid_rules(&case.set, &cfg);
        for (k, (inst, want)) in out.instances().iter().zip(&case.expected).enumerate() {
            total += 1;
            if inst.class() != *want {
                wrong.push(format!("{}#{k}: {} != {}", case.name, inst.class(), want));
            }
        }
    }
    verdict(
        wrong.is_empty(),
        format!("{total} instances checked against the table, mismatches {wrong:?}"),
    )
}

fn metrics_oracle() -> Verdict {
    let self_report = evaluate_dirs(&corpus_gt(), &corpus_gt(), &EvalConfig::default()).unwrap();
    let self_ok = self_report.aggregate.f1 == 1.0
        && self_report.aggregate.miou == 1.0
        && self_report
            .per_class
            .values()
            .all(|c| c.f1 == 1.0 && c.iou == Some(1.0));

    let row = |x0, x1| BinaryMask::rect(20, 1, BBox::new(x0, 0, x1, 1));
    let set = |items: Vec<(BinaryMask, f64)>| {
        InstanceSet::from_instances(
            "m",
            20,
            1,
            items
                .into_iter()
                .map(|(m, s)| Instance::new(ClassId::People, m, s).unwrap())
                .collect(),
        )
        .unwrap()
    };
    let gt = set(vec![(row(0, 10), 1.0), (row(12, 16), 1.0), (row(17, 20), 1.0)]);
    let pred = set(vec![(row(0, 6), 0.9), (row(12, 13), 0.8)]);
    let counts = match_instances(&pred, &gt, 0.5).unwrap().total();
    let f1 = f1_score(counts.tp, counts.fp, counts.fn_).f1;

    let px = |pts: &[(usize, usize)]| BinaryMask::from_fn(2, 2, |x, y| pts.contains(&(x, y)));
    let two = |items: Vec<(ClassId, BinaryMask)>| {
        InstanceSet::from_instances(
            "q",
            2,
            2,
            items
                .into_iter()
                .map(|(c, m)| Instance::new(c, m, 1.0).unwrap())
                .collect(),
        )
        .unwrap()
    };
    let gt2 = two(vec![
        (ClassId::Wall, px(&[(0, 0)])),
        (ClassId::Road, px(&[(0, 1), (1, 1)])),
    ]);
    let pred2 = two(vec![
        (ClassId::Wall, px(&[(0, 0), (1, 0)])),
        (ClassId::Road, px(&[(0, 1), (1, 1)])),
    ]);
    let miou = mean_iou(&pred2, &gt2, None).unwrap();
    verdict(
        self_ok && f1 == 0.4 && miou == 0.75,
        format!(
            "gt vs gt F1 {} mIoU {}; 3-GT/2-pred F1 {f1}; 2x2 two-class mIoU {miou}",
            self_report.aggregate.f1, self_report.aggregate.miou
        ),
    )
}

fn enhancement_contract() -> Verdict {
    let cfg = EnhanceConfig::default();
    let mut recon: f64 = 0.0;
    let mut brightening_ok = true;
    let mut images: Vec<RasterImage> = read_instance_dir(&corpus_gt())
        .unwrap()
        .keys()
        .map(|id| read_image(&corpus_images().join(format!("{id}.png"))).unwrap())
        .collect();
    let mut rng = SeededRng::new(derive_seed(1, "enhance"));
    for _ in 0..10 {
        images.push(RasterImage::from_fn(48, 32, 3, |_, _, _| rng.uniform()));
    }
    for img in &images {
        let pair = decompose(img, &cfg);
        let back = pair.recombine();
        for (i, (&v, &r)) in img.data().iter().zip(back.data()).enumerate() {
            let px = i / img.channels();
            let lum = img.data()[px * img.channels()..(px + 1) * img.channels()]
                .iter()
                .fold(0.0f64, |a, &b| a.max(b));
            if lum >= cfg.eps_floor {
                recon = recon.max((v - r).abs());
            }
        }
        for gamma in [1.0, 1.2, 1.8, 2.2, 3.0, 5.0] {
            let c = EnhanceConfig { gamma, ..cfg.clone() };
            if enhance(img, &c).mean() < back.mean() - 1e-12 {
                brightening_ok = false;
            }
        }
    }
    let two = RasterImage::from_fn(64, 32, 1, |x, _, _| if x < 32 { 0.05 } else { 0.9 });
    let out = enhance(&two, &cfg);
    let region = |img: &RasterImage, dark: bool| {
        let v: Vec<f64> = (0..32)
            .flat_map(|y| (0..64).map(move |x| (x, y)))
            .filter(|&(x, _)| (x < 32) == dark)
            .map(|(x, y)| img.get(x, y, 0))
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let dark_gain = region(&out, true) - region(&two, true);
    let bright_gain = region(&out, false) - region(&two, false);
    verdict(
        recon <= 1e-3 && brightening_ok && dark_gain > bright_gain,
        format!(
            "reconstruction error {recon:.1e} (<= 1e-3), brightening holds {brightening_ok}, dark gain {dark_gain:.4} > bright gain {bright_gain:.4}"
        ),
    )
}

fn write_dir(dir: &Path, sets: &BTreeMap<String, InstanceSet>) {
    for (id, s) in sets {
        write_instances(s, &dir.join(format!("{id}.json"))).unwrap();
    }
}

fn run(
    base: &Path,
    name: &str,
    a: &BTreeMap<String, InstanceSet>,
    b: &BTreeMap<String, InstanceSet>,
    tweak: impl FnOnce(&mut PipelineConfig),
) -> RunOutput {
    let (pa, pb) = (base.join(format!("{name}_a")), base.join(format!("{name}_b")));
    write_dir(&pa, a);
    write_dir(&pb, b);
    let mut cfg = PipelineConfig::default().with_seed(11);
    cfg.paths.input = Some(corpus_images());
    cfg.paths.gt = Some(corpus_gt());
    cfg.paths.pred_a = Some(pa);
    cfg.paths.pred_b = Some(pb);
    cfg.paths.output = Some(base.join(name));
    cfg.run.overlays = false;
    tweak(&mut cfg);
    run_pipeline(&cfg).unwrap()
}

fn fusion_benefit() -> Verdict {
    let t0 = Instant::now();
    let tmp = tempdir().unwrap();
    let gt = read_instance_dir(&corpus_gt()).unwrap();

    let miss_people: BTreeMap<_, _> = gt
        .iter()
        .map(|(id, g)| {
            (
                id.clone(),
                without_class(&mock_segment(g, 0.1, derive_seed(21, id)), ClassId::People),
            )
        })
        .collect();
    let miss_equipment: BTreeMap<_, _> = gt
        .iter()
        .map(|(id, g)| {
            (
                id.clone(),
                without_class(&mock_segment(g, 0.1, derive_seed(22, id)), ClassId::Equipment),
            )
        })
        .collect();
    let comp = run(tmp.path(), "complementary", &miss_people, &miss_equipment, |c| {
        c.fusion.keep_unmatched = true
    });
    let r = comp.reports.unwrap();
    let (fa, fb, ff) = (r.pred_a.aggregate.f1, r.pred_b.aggregate.f1, r.fused.aggregate.f1);

    let noisy: BTreeMap<_, _> = gt
        .iter()
        .map(|(id, g)| (id.clone(), mock_segment(g, 0.2, derive_seed(23, id))))
        .collect();
    let shifted: BTreeMap<_, _> = noisy.iter().map(|(id, s)| (id.clone(), shift_set(s, 3, 0))).collect();
    let aligned = run(tmp.path(), "aligned", &shifted, &noisy, |_| {});
    let baseline = run(tmp.path(), "unaligned", &shifted, &noisy, |c| c.fusion.align = false);
    let m_al = aligned.reports.unwrap().fused.aggregate.miou;
    let m_un = baseline.reports.unwrap().fused.aggregate.miou;
    let elapsed = t0.elapsed();
    verdict(
        ff >= fa.max(fb) && m_al - m_un >= 0.05 && elapsed < Duration::from_secs(120),
        format!(
            "complementary: F1 A {fa:.4}, B {fb:.4}, fused {ff:.4} (>= max); 3-px shift: aligned mIoU {m_al:.4} vs unaligned {m_un:.4} (margin {:.4} >= 0.05); {} fallbacks; {:.1} s (< 120 s)",
            m_al - m_un,
            aligned.manifest.alignment_fallbacks,
            secs(elapsed)
        ),
    )
}

fn determinism() -> Verdict {
    let tmp = tempdir().unwrap();
    let mut outputs = Vec::new();
    for (name, workers) in [("first", 0), ("second", 0), ("single", 1)] {
        let mut cfg = PipelineConfig::default().with_seed(5);
        cfg.workers = workers;
        cfg.paths.input = Some(corpus_images());
        cfg.paths.gt = Some(corpus_gt());
        cfg.paths.output = Some(tmp.path().join(name));
        let out = run_pipeline(&cfg).unwrap();
        let dir = tmp.path().join(name);
        let report = std::fs::read(dir.join("report.json")).unwrap();
        outputs.push((
            report,
            tree(&dir.join("fused")),
            tree(&dir.join("overlays")),
            out.manifest.without_timestamps(),
        ));
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    verdict(
        same,
        format!(
            "3 runs (seed 5; workers auto, auto, 1): report.json, {} fused masks, overlays and manifest identical: {same}",
            outputs[0].1.len()
        ),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 11] = [
        ("gradient suite", gradient_suite),
        ("loss oracle equivalence", loss_oracle),
        ("focal reduction", focal_reduction),
        ("perfect-match dice values", perfect_match_values),
        ("alignment recovery", alignment_recovery),
        ("fusion invariants", fusion_invariants),
        ("grid rule", grid_rule_table),
        ("metrics oracle", metrics_oracle),
        ("enhancement contract", enhancement_contract),
        ("end-to-end fusion benefit", fusion_benefit),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        println!(
            "criterion {:>2} {} {name}: {}",
            i + 1,
            if v.passed { "PASS" } else { "FAIL" },
            v.detail
        );
        failures += usize::from(!v.passed);
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
