//! The full batch: filter, enhance, predictions, fusion, evaluation, artifacts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use minevis_core::enhance::enhance;
use minevis_core::eval::{evaluate_image, EvalReport, ImageEval};
use minevis_core::filter::{filter_image, SeenHashes};
use minevis_core::fusion::{fuse_sets, AlignmentOutcome};
use minevis_core::mock::mock_segment;
use minevis_core::rng::derive_seed;
use minevis_core::InstanceSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{AppError, Result};
use crate::io::{
    ensure_dir, image_id, list_files, quantized, read_image, read_instance_dir, write_image, write_instances,
    write_json,
};
use crate::render::render_overlay;
use crate::report::write_eval_csv;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageStatus {
    Processed,
    Skipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionSource {
    File,
    Mock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub image_id: String,
    pub status: ImageStatus,
    /// Why the image was skipped, or the error that stopped it.
    pub reasons: Vec<String>,
    pub enhanced: bool,
    pub prediction_a: Option<PredictionSource>,
    pub prediction_b: Option<PredictionSource>,
    pub fused_instances: usize,
    pub alignment: Option<AlignmentOutcome>,
    pub alignment_fallback: bool,
}

impl ImageRecord {
    fn skipped(image_id: &str, reason: impl Into<String>) -> Self {
        ImageRecord {
            image_id: image_id.to_string(),
            status: ImageStatus::Skipped,
            reasons: vec![reason.into()],
            enhanced: false,
            prediction_a: None,
            prediction_b: None,
            fused_instances: 0,
            alignment: None,
            alignment_fallback: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_hash: String,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub input_images: usize,
    pub processed: usize,
    pub skipped: usize,
    pub alignment_fallbacks: usize,
    pub images: Vec<ImageRecord>,
}

impl RunManifest {
    /// The manifest with timestamps zeroed, for comparing runs.
    pub fn without_timestamps(&self) -> RunManifest {
        RunManifest {
            started_unix_ms: 0,
            finished_unix_ms: 0,
            ..self.clone()
        }
    }
}

/// Evaluation reports of a run; absent when no ground truth was configured.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReports {
    pub fused: EvalReport,
    pub pred_a: EvalReport,
    pub pred_b: EvalReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub manifest: RunManifest,
    pub reports: Option<RunReports>,
}

fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

struct Inputs {
    gt: Option<BTreeMap<String, InstanceSet>>,
    pred_a: Option<BTreeMap<String, InstanceSet>>,
    pred_b: Option<BTreeMap<String, InstanceSet>>,
}

struct ImageResult {
    record: ImageRecord,
    evals: Option<[ImageEval; 3]>,
}

fn prediction(
    preds: &Option<BTreeMap<String, InstanceSet>>,
    gt: Option<&InstanceSet>,
    id: &str,
    epsilon: f64,
    seed: u64,
    label: &str,
) -> std::result::Result<(InstanceSet, PredictionSource), String> {
    match (preds, gt) {
        (Some(map), _) => map
            .get(id)
            .cloned()
            .map(|s| (s, PredictionSource::File))
            .ok_or_else(|| format!("no prediction {label}")),
        (None, Some(gt)) => Ok((
            mock_segment(gt, epsilon, derive_seed(seed, &format!("{label}/{id}"))),
            PredictionSource::Mock,
        )),
        (None, None) => Err(format!("no prediction {label} and no ground truth to mock from")),
    }
}

fn process_image(path: &Path, cfg: &PipelineConfig, inputs: &Inputs, out: &Path) -> ImageResult {
    let id = image_id(path);
    match process_image_inner(path, &id, cfg, inputs, out) {
        Ok(r) => r,
        Err(e) => {
            log::warn!("{id}: {e}");
            ImageResult {
                record: ImageRecord::skipped(&id, e.to_string()),
                evals: None,
            }
        }
    }
}

fn process_image_inner(
    path: &Path,
    id: &str,
    cfg: &PipelineConfig,
    inputs: &Inputs,
    out: &Path,
) -> Result<ImageResult> {
    let image = read_image(path)?;
    let image = if cfg.run.enhance {
        let e = quantized(&enhance(&image, &cfg.enhance));
        write_image(&e, &out.join("enhanced").join(format!("{id}.png")))?;
        e
    } else {
        image
    };
    let gt = inputs.gt.as_ref().and_then(|m| m.get(id));
    let (a, src_a) =
        prediction(&inputs.pred_a, gt, id, cfg.run.mock_epsilon_a, cfg.seed, "a").map_err(AppError::Data)?;
    let (b, src_b) =
        prediction(&inputs.pred_b, gt, id, cfg.run.mock_epsilon_b, cfg.seed, "b").map_err(AppError::Data)?;
    let (fused, report) = fuse_sets(&a, &b, &image, &cfg.fusion).map_err(|e| AppError::core(id, e))?;
    let mut fused = fused;
    fused.image_id = id.to_string();
    write_instances(&fused, &out.join("fused").join(format!("{id}.json")))?;
    if cfg.run.overlays {
        write_image(
            &render_overlay(&image, &fused),
            &out.join("overlays").join(format!("{id}.png")),
        )?;
    }
    let evals = match gt {
        Some(gt) => {
            let ev = |p: &InstanceSet| evaluate_image(p, gt, &cfg.eval).map_err(|e| AppError::core(id, e));
            let (mut ea, mut eb) = (ev(&a)?, ev(&b)?);
            ea.image_id = id.to_string();
            eb.image_id = id.to_string();
            let mut ef = ev(&fused)?;
            ef.image_id = id.to_string();
            Some([ef, ea, eb])
        }
        None => None,
    };
    let alignment_fallback = report.alignment.is_fallback();
    Ok(ImageResult {
        record: ImageRecord {
            image_id: id.to_string(),
            status: ImageStatus::Processed,
            reasons: Vec::new(),
            enhanced: cfg.run.enhance,
            prediction_a: Some(src_a),
            prediction_b: Some(src_b),
            fused_instances: fused.len(),
            alignment: Some(report.alignment),
            alignment_fallback,
        },
        evals,
    })
}

fn required<'a>(p: &'a Option<PathBuf>, name: &str) -> Result<&'a PathBuf> {
    p.as_ref()
        .ok_or_else(|| AppError::Usage(format!("paths.{name} is not set")))
}

fn optional_dir(p: &Option<PathBuf>) -> Result<Option<BTreeMap<String, InstanceSet>>> {
    p.as_deref().map(read_instance_dir).transpose()
}

/// Runs every stage over `paths.input` and writes artifacts under `paths.output`:
/// `enhanced/`, `fused/`, `overlays/`, `report.json` (+ `.csv`), `report_a.json`,
/// `report_b.json` and `manifest.json`. Per-image failures are recorded, not fatal.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunOutput> {
    let started = now_ms();
    cfg.validate()?;
    let input = required(&cfg.paths.input, "input")?;
    let out = required(&cfg.paths.output, "output")?;
    let images = list_files(input, "png")?;
    if images.is_empty() {
        return Err(AppError::Data(format!("{}: no PNG images", input.display())));
    }
    ensure_dir(out)?;
    let inputs = Inputs {
        gt: optional_dir(&cfg.paths.gt)?,
        pred_a: optional_dir(&cfg.paths.pred_a)?,
        pred_b: optional_dir(&cfg.paths.pred_b)?,
    };

    let mut rejected: BTreeMap<PathBuf, ImageRecord> = BTreeMap::new();
    if cfg.run.filter {
        let mut seen = SeenHashes::new();
        for path in &images {
            let id = image_id(path);
            match read_image(path) {
                Ok(img) => {
                    let v = filter_image(&img, &cfg.filter, &mut seen);
                    if !v.keep {
                        let mut rec = ImageRecord::skipped(&id, "filtered");
                        rec.reasons = v.reasons.iter().map(|r| format!("{r:?}")).collect();
                        rejected.insert(path.clone(), rec);
                    }
                }
                Err(e) => {
                    rejected.insert(path.clone(), ImageRecord::skipped(&id, e.to_string()));
                }
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| AppError::Data(format!("cannot start worker pool: {e}")))?;
    let mut results: Vec<ImageResult> = pool.install(|| {
        images
            .par_iter()
            .map(|path| match rejected.get(path) {
                Some(rec) => ImageResult {
                    record: rec.clone(),
                    evals: None,
                },
                None => process_image(path, cfg, &inputs, out),
            })
            .collect()
    });
    results.sort_by(|a, b| a.record.image_id.cmp(&b.record.image_id));

    let reports = inputs.gt.as_ref().map(|gt| {
        let mut per = [Vec::new(), Vec::new(), Vec::new()];
        for r in &results {
            if let Some(evals) = &r.evals {
                for (k, e) in evals.iter().enumerate() {
                    per[k].push(e.clone());
                }
            }
        }
        let evaluated: std::collections::BTreeSet<&str> = results
            .iter()
            .filter(|r| r.evals.is_some())
            .map(|r| r.record.image_id.as_str())
            .collect();
        let missing: Vec<String> = gt
            .keys()
            .filter(|id| !evaluated.contains(id.as_str()))
            .cloned()
            .collect();
        let [f, a, b] = per;
        RunReports {
            fused: EvalReport::from_images(f, missing.clone(), &cfg.eval),
            pred_a: EvalReport::from_images(a, missing.clone(), &cfg.eval),
            pred_b: EvalReport::from_images(b, missing, &cfg.eval),
        }
    });
    if let Some(r) = &reports {
        write_json(&r.fused, &out.join("report.json"))?;
        write_eval_csv(&r.fused, &out.join("report.csv"))?;
        write_json(&r.pred_a, &out.join("report_a.json"))?;
        write_json(&r.pred_b, &out.join("report_b.json"))?;
    }

    let records: Vec<ImageRecord> = results.into_iter().map(|r| r.record).collect();
    let processed = records.iter().filter(|r| r.status == ImageStatus::Processed).count();
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: cfg.hash(),
        started_unix_ms: started,
        finished_unix_ms: now_ms(),
        input_images: images.len(),
        processed,
        skipped: records.len() - processed,
        alignment_fallbacks: records.iter().filter(|r| r.alignment_fallback).count(),
        images: records,
    };
    write_json(&manifest, &out.join("manifest.json"))?;
    Ok(RunOutput { manifest, reports })
}
