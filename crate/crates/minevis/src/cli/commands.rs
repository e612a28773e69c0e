use std::path::{Path, PathBuf};

use minevis_core::degrade::degrade;
use minevis_core::enhance::enhance;
use minevis_core::filter::{average_hash, filter_image, laplacian_variance, mean_luminance, FilterVerdict, SeenHashes};
use minevis_core::fusion::{fuse_sets, FusionReport};
use minevis_core::gradcheck::{run_suite, GradCheckConfig};
use minevis_core::mock::{mock_segment, shift_set, without_class};
use minevis_core::rng::derive_seed;
use minevis_core::{ClassId, InstanceSet};
use serde::Serialize;

use super::{usage, Cli, Command, Outcome};
use crate::config::PipelineConfig;
use crate::error::{AppError, Result};
use crate::io::{
    ensure_dir, image_id, list_files, read_image, read_instance_dir, read_instances, write_image, write_instances,
    write_json,
};
use crate::pipeline::run_pipeline;
use crate::render::render_overlay;
use crate::report::{evaluate_dirs, write_eval_csv};

pub(super) fn dispatch(cli: &Cli, mut cfg: PipelineConfig) -> Result<Outcome> {
    match &cli.command {
        Command::Enhance(a) => {
            if let Some(g) = a.gamma {
                cfg.enhance.gamma = g;
                cfg.enhance.target_mean = None;
            }
            if let Some(m) = a.target_mean {
                cfg.enhance.target_mean = Some(m);
            }
            if let Some(r) = a.radius {
                cfg.enhance.smoothing_radius = r;
            }
            cfg.validate()?;
            for_each_image(&a.input, &a.output, |img, _| Ok(enhance(img, &cfg.enhance)))?;
        }
        Command::Degrade(a) => {
            if let Some(s) = a.sigma {
                cfg.degrade.noise_sigma = s;
            }
            if let Some(b) = a.brightness {
                cfg.degrade.brightness_factor = b;
            }
            if let Some(c) = a.contrast {
                cfg.degrade.contrast_factor = c;
            }
            cfg.validate()?;
            for_each_image(&a.input, &a.output, |img, id| {
                let mut d = cfg.degrade.clone();
                d.seed = derive_seed(cfg.seed, id);
                Ok(degrade(img, &d))
            })?;
        }
        Command::Filter(a) => {
            cfg.validate()?;
            filter_dir(&a.input, &a.report, a.move_rejected.as_deref(), &cfg)?;
        }
        Command::MockSegment(a) => {
            if !(0.0..=1.0).contains(&a.epsilon) {
                return Err(usage("--epsilon must be in [0, 1]"));
            }
            let drop: Vec<ClassId> = a
                .drop_class
                .iter()
                .map(|s| s.parse().map_err(|e: minevis_core::Error| usage(e.to_string())))
                .collect::<Result<_>>()?;
            let perturb = |gt: &InstanceSet| {
                let mut s = mock_segment(gt, a.epsilon, derive_seed(cfg.seed, &gt.image_id));
                if a.shift_x != 0 || a.shift_y != 0 {
                    s = shift_set(&s, a.shift_x, a.shift_y);
                }
                for c in &drop {
                    s = without_class(&s, *c);
                }
                s
            };
            if a.gt.is_dir() {
                ensure_dir(&a.out)?;
                for (id, gt) in read_instance_dir(&a.gt)? {
                    write_instances(&perturb(&gt), &a.out.join(format!("{id}.json")))?;
                }
            } else {
                write_instances(&perturb(&read_instances(&a.gt)?), &a.out)?;
            }
        }
        Command::Fuse(a) => {
            if a.keep_unmatched {
                cfg.fusion.keep_unmatched = true;
            }
            if a.no_align {
                cfg.fusion.align = false;
            }
            cfg.validate()?;
            fuse_command(a, &cfg)?;
        }
        Command::Eval(a) => {
            if let Some(t) = a.iou {
                cfg.eval.iou_threshold = t;
            }
            if a.merge_surrounding {
                cfg.eval.merge_surrounding = true;
            }
            cfg.validate()?;
            let report = evaluate_dirs(&a.pred, &a.gt, &cfg.eval)?;
            write_json(&report, &a.out)?;
            let csv = a.csv.clone().unwrap_or_else(|| a.out.with_extension("csv"));
            write_eval_csv(&report, &csv)?;
            println!(
                "images {}  F1 {:.4}  mIoU {:.4}",
                report.images, report.aggregate.f1, report.aggregate.miou
            );
        }
        Command::Render(a) => {
            let image = read_image(&a.image)?;
            let set = read_instances(&a.pred)?;
            if set.dims() != image.dims() {
                return Err(AppError::Data(format!(
                    "{}: prediction is {:?}, image is {:?}",
                    a.pred.display(),
                    set.dims(),
                    image.dims()
                )));
            }
            write_image(&render_overlay(&image, &set), &a.out)?;
        }
        Command::LossCheck(a) => {
            cfg.validate()?;
            let gc = GradCheckConfig {
                points: a.points,
                tolerance: a.tolerance,
                seed: cfg.seed ^ GradCheckConfig::default().seed,
                ..GradCheckConfig::default()
            };
            let mut ok = true;
            for s in run_suite(&gc) {
                println!(
                    "{:<26} points {:>4}  coords {:>6}  max rel error {:.3e}  {}",
                    s.name,
                    s.points,
                    s.coordinates,
                    s.max_rel_error,
                    if s.passed { "ok" } else { "FAIL" }
                );
                ok &= s.passed;
            }
            if !ok {
                return Ok(Outcome::CheckFailed);
            }
        }
        Command::Run(a) => {
            let p = &mut cfg.paths;
            for (slot, v) in [
                (&mut p.input, &a.input),
                (&mut p.output, &a.output),
                (&mut p.gt, &a.gt),
                (&mut p.pred_a, &a.pred_a),
                (&mut p.pred_b, &a.pred_b),
            ] {
                if v.is_some() {
                    slot.clone_from(v);
                }
            }
            cfg.run.filter |= a.filter;
            cfg.run.enhance &= !a.no_enhance;
            cfg.run.overlays &= !a.no_overlays;
            cfg.fusion.keep_unmatched |= a.keep_unmatched;
            cfg.fusion.align &= !a.no_align;
            let out = run_pipeline(&cfg)?;
            let m = &out.manifest;
            println!(
                "processed {}  skipped {}  alignment fallbacks {}",
                m.processed, m.skipped, m.alignment_fallbacks
            );
            if let Some(r) = &out.reports {
                println!("F1 {:.4}  mIoU {:.4}", r.fused.aggregate.f1, r.fused.aggregate.miou);
            }
        }
    }
    Ok(Outcome::Success)
}

fn for_each_image(
    input: &Path,
    output: &Path,
    f: impl Fn(&minevis_core::RasterImage, &str) -> Result<minevis_core::RasterImage>,
) -> Result<()> {
    let files = list_files(input, "png")?;
    if files.is_empty() {
        return Err(AppError::Data(format!("{}: no PNG images", input.display())));
    }
    ensure_dir(output)?;
    for path in files {
        let id = image_id(&path);
        let out = f(&read_image(&path)?, &id)?;
        write_image(&out, &output.join(path.file_name().expect("file name")))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct FilterEntry {
    file: String,
    image_id: String,
    #[serde(flatten)]
    verdict: FilterVerdict,
    mean_luminance: f64,
    laplacian_variance: f64,
    average_hash: String,
}

#[derive(Serialize)]
struct FilterReport {
    kept: usize,
    rejected: usize,
    files: Vec<FilterEntry>,
}

fn filter_dir(input: &Path, report: &Path, move_to: Option<&Path>, cfg: &PipelineConfig) -> Result<()> {
    let mut seen = SeenHashes::new();
    let mut files = Vec::new();
    let mut rejected: Vec<PathBuf> = Vec::new();
    for path in list_files(input, "png")? {
        let img = read_image(&path)?;
        let verdict = filter_image(&img, &cfg.filter, &mut seen);
        if !verdict.keep {
            rejected.push(path.clone());
        }
        files.push(FilterEntry {
            file: path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
            image_id: image_id(&path),
            verdict,
            mean_luminance: mean_luminance(&img),
            laplacian_variance: laplacian_variance(&img),
            average_hash: format!("{:016x}", average_hash(&img)),
        });
    }
    let summary = FilterReport {
        kept: files.len() - rejected.len(),
        rejected: rejected.len(),
        files,
    };
    write_json(&summary, report)?;
    if let Some(dir) = move_to {
        ensure_dir(dir)?;
        for path in rejected {
            let dest = dir.join(path.file_name().expect("file name"));
            std::fs::rename(&path, &dest).map_err(|e| AppError::io(&path, e))?;
        }
    }
    println!("kept {}  rejected {}", summary.kept, summary.rejected);
    Ok(())
}

fn fuse_one(
    image: &Path,
    a: &InstanceSet,
    b: &InstanceSet,
    cfg: &PipelineConfig,
) -> Result<(InstanceSet, FusionReport)> {
    let img = read_image(image)?;
    fuse_sets(a, b, &img, &cfg.fusion).map_err(|e| AppError::core(&b.image_id, e))
}

fn fuse_command(a: &super::FuseArgs, cfg: &PipelineConfig) -> Result<()> {
    if !a.image.is_dir() {
        let (set, report) = fuse_one(&a.image, &read_instances(&a.pred_a)?, &read_instances(&a.pred_b)?, cfg)?;
        write_instances(&set, &a.out)?;
        if let Some(r) = &a.report {
            write_json(&report, r)?;
        }
        return Ok(());
    }
    let preds_a = read_instance_dir(&a.pred_a)?;
    let preds_b = read_instance_dir(&a.pred_b)?;
    ensure_dir(&a.out)?;
    let mut reports = Vec::new();
    for path in list_files(&a.image, "png")? {
        let id = image_id(&path);
        let (Some(pa), Some(pb)) = (preds_a.get(&id), preds_b.get(&id)) else {
            log::warn!("{id}: missing prediction, skipped");
            continue;
        };
        let (set, report) = fuse_one(&path, pa, pb, cfg)?;
        write_instances(&set, &a.out.join(format!("{id}.json")))?;
        reports.push(report);
    }
    if let Some(r) = &a.report {
        write_json(&reports, r)?;
    }
    Ok(())
}
