//! Evaluation over directories and CSV export.

use std::collections::BTreeMap;
use std::path::Path;

use minevis_core::eval::{evaluate_image, EvalConfig, EvalReport};
use minevis_core::InstanceSet;

use crate::error::{AppError, Result};
use crate::io::{ensure_parent, read_instance_dir};

/// Pairs predictions with ground truth by `image_id`. Ids present on only one side are
/// listed in `missing` and skipped.
pub fn evaluate_sets(
    pred: &BTreeMap<String, InstanceSet>,
    gt: &BTreeMap<String, InstanceSet>,
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    let mut images = Vec::new();
    let mut missing = Vec::new();
    for (id, g) in gt {
        match pred.get(id) {
            Some(p) => images.push(evaluate_image(p, g, cfg).map_err(|e| AppError::core(id, e))?),
            None => {
                log::warn!("{id}: no prediction, skipped");
                missing.push(id.clone());
            }
        }
    }
    for id in pred.keys().filter(|id| !gt.contains_key(*id)) {
        log::warn!("{id}: no ground truth, skipped");
        missing.push(id.clone());
    }
    Ok(EvalReport::from_images(images, missing, cfg))
}

pub fn evaluate_dirs(pred_dir: &Path, gt_dir: &Path, cfg: &EvalConfig) -> Result<EvalReport> {
    evaluate_sets(&read_instance_dir(pred_dir)?, &read_instance_dir(gt_dir)?, cfg)
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

/// One row per class plus a final `all` row.
pub fn write_eval_csv(report: &EvalReport, path: &Path) -> Result<()> {
    ensure_parent(path)?;
    let csv_err = |e: csv::Error| AppError::Data(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record([
        "class",
        "tp",
        "fp",
        "fn",
        "precision",
        "recall",
        "f1",
        "iou",
        "pixel_f1",
    ])
    .map_err(csv_err)?;
    for (class, m) in &report.per_class {
        w.write_record([
            class.as_str().to_string(),
            m.counts.tp.to_string(),
            m.counts.fp.to_string(),
            m.counts.fn_.to_string(),
            fmt(m.precision),
            fmt(m.recall),
            fmt(m.f1),
            m.iou.map(fmt).unwrap_or_default(),
            fmt(m.pixel_f1),
        ])
        .map_err(csv_err)?;
    }
    let a = &report.aggregate;
    w.write_record([
        "all".to_string(),
        a.counts.tp.to_string(),
        a.counts.fp.to_string(),
        a.counts.fn_.to_string(),
        fmt(a.precision),
        fmt(a.recall),
        fmt(a.f1),
        fmt(a.miou),
        String::new(),
    ])
    .map_err(csv_err)?;
    w.flush().map_err(|e| AppError::io(path, e))
}
