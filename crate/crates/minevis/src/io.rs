//! PNG images, prediction JSON documents and directory listings.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageFormat, ImageReader};
use minevis_core::raster::tight_bbox;
use minevis_core::rle::{decode_rle, encode_rle};
use minevis_core::{ClassId, Instance, InstanceSet, RasterImage};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

/// Reads an 8- or 16-bit PNG. Greyscale files give one channel, everything else three
/// (alpha is dropped).
pub fn read_image(path: &Path) -> Result<RasterImage> {
    let img_err = |source| AppError::Image {
        path: path.to_path_buf(),
        source,
    };
    let decoded = ImageReader::open(path)
        .map_err(|e| AppError::io(path, e))?
        .with_guessed_format()
        .map_err(|e| AppError::io(path, e))?
        .decode()
        .map_err(img_err)?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let sixteen = matches!(
        decoded,
        DynamicImage::ImageLuma16(_)
            | DynamicImage::ImageLumaA16(_)
            | DynamicImage::ImageRgb16(_)
            | DynamicImage::ImageRgba16(_)
    );
    let grey = !decoded.color().has_color();
    let (channels, data): (usize, Vec<f64>) = match (grey, sixteen) {
        (true, false) => (
            1,
            decoded
                .to_luma8()
                .into_raw()
                .into_iter()
                .map(|v| v as f64 / 255.0)
                .collect(),
        ),
        (true, true) => (
            1,
            decoded
                .to_luma16()
                .into_raw()
                .into_iter()
                .map(|v| v as f64 / 65535.0)
                .collect(),
        ),
        (false, false) => (
            3,
            decoded
                .to_rgb8()
                .into_raw()
                .into_iter()
                .map(|v| v as f64 / 255.0)
                .collect(),
        ),
        (false, true) => (
            3,
            decoded
                .to_rgb16()
                .into_raw()
                .into_iter()
                .map(|v| v as f64 / 65535.0)
                .collect(),
        ),
    };
    RasterImage::new(w, h, channels, data).map_err(|e| AppError::core(path.display(), e))
}

fn quantize(v: f64) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

/// The image as it reads back after an 8-bit write.
pub fn quantized(image: &RasterImage) -> RasterImage {
    image.map(|v| quantize(v) as f64 / 255.0)
}

/// Writes an 8-bit PNG with one or three channels.
pub fn write_image(image: &RasterImage, path: &Path) -> Result<()> {
    let (w, h) = (image.width() as u32, image.height() as u32);
    let bytes: Vec<u8> = image.data().iter().map(|&v| quantize(v)).collect();
    let dynamic = match image.channels() {
        1 => DynamicImage::ImageLuma8(image::GrayImage::from_raw(w, h, bytes).expect("buffer size")),
        3 => DynamicImage::ImageRgb8(image::RgbImage::from_raw(w, h, bytes).expect("buffer size")),
        c => {
            return Err(AppError::Data(format!(
                "{}: cannot write a {c}-channel image",
                path.display()
            )))
        }
    };
    ensure_parent(path)?;
    dynamic
        .save_with_format(path, ImageFormat::Png)
        .map_err(|source| AppError::Image {
            path: path.to_path_buf(),
            source,
        })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceRecord {
    pub class: ClassId,
    pub bbox: [usize; 4],
    pub score: f64,
    pub mask_rle: String,
}

/// The on-disk form of an [`InstanceSet`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub image_id: String,
    pub width: usize,
    pub height: usize,
    pub instances: Vec<InstanceRecord>,
}

impl InstanceFile {
    pub fn from_set(set: &InstanceSet) -> Self {
        InstanceFile {
            image_id: set.image_id.clone(),
            width: set.width(),
            height: set.height(),
            instances: set
                .instances()
                .iter()
                .map(|i| InstanceRecord {
                    class: i.class(),
                    bbox: i.bbox().to_array(),
                    score: i.score(),
                    mask_rle: encode_rle(i.mask()),
                })
                .collect(),
        }
    }

    /// Decodes every mask. A stored bbox that disagrees with its mask is replaced by the
    /// tight one, with a warning.
    pub fn into_set(self) -> minevis_core::Result<InstanceSet> {
        let mut set = InstanceSet::new(self.image_id, self.width, self.height);
        for (k, rec) in self.instances.into_iter().enumerate() {
            let mask = decode_rle(&rec.mask_rle, self.width, self.height)?;
            let bbox = tight_bbox(&mask)?;
            if bbox.to_array() != rec.bbox {
                log::warn!(
                    "{}: instance {k} bbox {:?} does not match its mask, using {:?}",
                    set.image_id,
                    rec.bbox,
                    bbox.to_array()
                );
            }
            set.push(Instance::new(rec.class, mask, rec.score)?)?;
        }
        Ok(set)
    }
}

pub fn read_instances(path: &Path) -> Result<InstanceSet> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    let file: InstanceFile = serde_json::from_str(&text).map_err(|source| AppError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    file.into_set().map_err(|e| AppError::core(path.display(), e))
}

pub fn write_instances(set: &InstanceSet, path: &Path) -> Result<()> {
    write_json(&InstanceFile::from_set(set), path)
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| AppError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    ensure_parent(path)?;
    fs::write(path, text).map_err(|e| AppError::io(path, e))
}

pub fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => fs::create_dir_all(p).map_err(|e| AppError::io(p, e)),
        _ => Ok(()),
    }
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| AppError::io(path, e))
}

/// Files in `dir` with the given extension (case-insensitive), sorted by name.
pub fn list_files(dir: &Path, extension: &str) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| AppError::io(dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| AppError::io(dir, e))?.path();
        let matches = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case(extension));
        if matches && path.is_file() {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// The image id of an image file: its stem.
pub fn image_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Every prediction document in `dir`, keyed by the `image_id` it declares.
pub fn read_instance_dir(dir: &Path) -> Result<BTreeMap<String, InstanceSet>> {
    let mut out = BTreeMap::new();
    for path in list_files(dir, "json")? {
        let set = read_instances(&path)?;
        if let Some(prev) = out.insert(set.image_id.clone(), set) {
            return Err(AppError::Data(format!(
                "{}: image_id `{}` appears in more than one file",
                path.display(),
                prev.image_id
            )));
        }
    }
    Ok(out)
}
