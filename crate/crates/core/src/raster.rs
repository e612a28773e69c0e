//! Pixel and instance carriers shared by every other module.
//!
//! Intensities are `f64` in `[0, 1]`; 8-bit quantization only happens when images are
//! written to or read from disk. Bounding boxes are half-open: `x_min..x_max`.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Row-major `width x height x channels` image with intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl RasterImage {
    /// Validates shape and range.
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidImage(alloc::format!(
                "channels must be 1 or 3, got {channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::InvalidImage(alloc::format!(
                "expected {} values for {width}x{height}x{channels}, got {}",
                width * height * channels,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidImage(alloc::format!(
                "intensity {} at index {i} is outside [0, 1]",
                data[i]
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Like [`RasterImage::new`] but clamps out-of-range values (NaN becomes 0).
    ///
    /// Panics if `channels` is not 1 or 3 or the length does not match.
    pub fn from_vec_clamped(width: usize, height: usize, channels: usize, mut data: Vec<f64>) -> Self {
        assert!(channels == 1 || channels == 3, "channels must be 1 or 3");
        assert_eq!(data.len(), width * height * channels, "data length");
        for v in &mut data {
            *v = clamp_unit(*v);
        }
        Self {
            width,
            height,
            channels,
            data,
        }
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Self {
        Self::from_vec_clamped(width, height, channels, vec![value; width * height * channels])
    }

    /// Builds an image from `f(x, y, channel)`, clamping the result.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c));
                }
            }
        }
        Self::from_vec_clamped(width, height, channels, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    /// Single-channel luminance as the per-pixel maximum over channels.
    pub fn max_channel(&self) -> RasterImage {
        if self.channels == 1 {
            return self.clone();
        }
        let data = self
            .data
            .chunks_exact(self.channels)
            .map(|px| px.iter().copied().fold(0.0, f64::max))
            .collect();
        Self {
            width: self.width,
            height: self.height,
            channels: 1,
            data,
        }
    }

    /// Mean over all pixels and channels; 0 for an empty image.
    pub fn mean(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Applies `f` to every value and clamps the result.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> RasterImage {
        Self {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data: self.data.iter().map(|&v| clamp_unit(f(v))).collect(),
        }
    }

    pub fn same_shape(&self, other: &RasterImage) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }
}

#[inline]
pub(crate) fn clamp_unit(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

/// Row-major boolean mask.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMask {}x{} ({} set)", self.width, self.height, self.count())?;
        if self.width * self.height <= 1024 {
            for row in self.bits.chunks(self.width.max(1)) {
                for &b in row {
                    f.write_str(if b { "#" } else { "." })?;
                }
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::InvalidImage(alloc::format!(
                "mask of {width}x{height} needs {} bits, got {}",
                width * height,
                bits.len()
            )));
        }
        Ok(Self { width, height, bits })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self { width, height, bits }
    }

    /// Filled rectangle over the half-open box, clipped to the mask.
    pub fn rect(width: usize, height: usize, bbox: BBox) -> Self {
        Self::from_fn(width, height, |x, y| bbox.contains(x, y))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Out-of-bounds coordinates read as unset.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.bits[y as usize * self.width + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    fn check_dims(&self, other: &BinaryMask) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::dims(self.dims(), other.dims()));
        }
        Ok(())
    }

    fn zip_with(&self, other: &BinaryMask, f: impl Fn(bool, bool) -> bool) -> Result<BinaryMask> {
        self.check_dims(other)?;
        let bits = self.bits.iter().zip(&other.bits).map(|(&a, &b)| f(a, b)).collect();
        Ok(BinaryMask {
            width: self.width,
            height: self.height,
            bits,
        })
    }

    pub fn intersection(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn union(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a || b)
    }

    /// Sets every bit of `other` in `self`.
    pub fn union_in_place(&mut self, other: &BinaryMask) -> Result<()> {
        self.check_dims(other)?;
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
        Ok(())
    }

    /// `(|a ∩ b|, |a ∪ b|)`.
    pub fn overlap_counts(&self, other: &BinaryMask) -> Result<(usize, usize)> {
        self.check_dims(other)?;
        let mut inter = 0;
        let mut union = 0;
        for (&a, &b) in self.bits.iter().zip(&other.bits) {
            inter += usize::from(a && b);
            union += usize::from(a || b);
        }
        Ok((inter, union))
    }

    pub fn is_subset_of(&self, other: &BinaryMask) -> Result<bool> {
        self.check_dims(other)?;
        Ok(self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b))
    }

    /// Shifts content by `(dx, dy)`; pixels moved outside are lost.
    pub fn translated(&self, dx: i64, dy: i64) -> BinaryMask {
        BinaryMask::from_fn(self.width, self.height, |x, y| {
            self.get_signed(x as i64 - dx, y as i64 - dy)
        })
    }

    /// Iterates `(x, y)` of set pixels in row-major order.
    pub fn set_pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width.max(1);
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % w, i / w))
    }
}

/// Half-open pixel box `[x_min, x_max) x [y_min, y_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BBox {
    pub x_min: usize,
    pub y_min: usize,
    pub x_max: usize,
    pub y_max: usize,
}

impl BBox {
    pub const fn new(x_min: usize, y_min: usize, x_max: usize, y_max: usize) -> Self {
        Self {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    pub fn width(&self) -> usize {
        self.x_max.saturating_sub(self.x_min)
    }

    pub fn height(&self) -> usize {
        self.y_max.saturating_sub(self.y_min)
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x_min && x < self.x_max && y >= self.y_min && y < self.y_max
    }

    pub fn to_array(self) -> [usize; 4] {
        [self.x_min, self.y_min, self.x_max, self.y_max]
    }
}

/// Minimal half-open box covering every set pixel.
pub fn tight_bbox(mask: &BinaryMask) -> Result<BBox> {
    let mut bbox: Option<BBox> = None;
    for (x, y) in mask.set_pixels() {
        let b = bbox.get_or_insert(BBox::new(x, y, x + 1, y + 1));
        b.x_min = b.x_min.min(x);
        b.y_min = b.y_min.min(y);
        b.x_max = b.x_max.max(x + 1);
        b.y_max = b.y_max.max(y + 1);
    }
    bbox.ok_or(Error::EmptyMask)
}

/// Object category. `Surrounding` only appears after [`crate::eval::merge_surrounding`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ClassId {
    Road,
    Wall,
    Roof,
    People,
    Equipment,
    Corridor,
    Surrounding,
}

impl ClassId {
    /// The six annotation classes.
    pub const RAW: [ClassId; 6] = [
        ClassId::Road,
        ClassId::Wall,
        ClassId::Roof,
        ClassId::People,
        ClassId::Equipment,
        ClassId::Corridor,
    ];

    pub const ALL: [ClassId; 7] = [
        ClassId::Road,
        ClassId::Wall,
        ClassId::Roof,
        ClassId::People,
        ClassId::Equipment,
        ClassId::Corridor,
        ClassId::Surrounding,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassId::Road => "road",
            ClassId::Wall => "wall",
            ClassId::Roof => "roof",
            ClassId::People => "people",
            ClassId::Equipment => "equipment",
            ClassId::Corridor => "corridor",
            ClassId::Surrounding => "surrounding",
        }
    }

    /// Position in [`ClassId::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    /// Road, wall and roof: the structural classes.
    pub fn is_structural(self) -> bool {
        matches!(self, ClassId::Road | ClassId::Wall | ClassId::Roof)
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassId::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownClass(s.to_string()))
    }
}

/// One detected or annotated object. The box is always the tight box of the mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    class: ClassId,
    mask: BinaryMask,
    bbox: BBox,
    score: f64,
}

impl Instance {
    /// Fails with [`Error::EmptyMask`] on an empty mask; the score is clamped to `[0, 1]`.
    pub fn new(class: ClassId, mask: BinaryMask, score: f64) -> Result<Self> {
        let bbox = tight_bbox(&mask)?;
        Ok(Self {
            class,
            mask,
            bbox,
            score: clamp_unit(score),
        })
    }

    pub fn class(&self) -> ClassId {
        self.class
    }

    pub fn mask(&self) -> &BinaryMask {
        &self.mask
    }

    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    pub fn score(&self) -> f64 {
        self.score
    }

    pub fn with_class(mut self, class: ClassId) -> Self {
        self.class = class;
        self
    }

    pub fn with_score(mut self, score: f64) -> Self {
        self.score = clamp_unit(score);
        self
    }

    pub fn into_mask(self) -> BinaryMask {
        self.mask
    }
}

/// All instances of one image; every mask shares the set's dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSet {
    pub image_id: String,
    width: usize,
    height: usize,
    instances: Vec<Instance>,
}

impl InstanceSet {
    pub fn new(image_id: impl Into<String>, width: usize, height: usize) -> Self {
        Self {
            image_id: image_id.into(),
            width,
            height,
            instances: Vec::new(),
        }
    }

    pub fn from_instances(
        image_id: impl Into<String>,
        width: usize,
        height: usize,
        instances: Vec<Instance>,
    ) -> Result<Self> {
        let mut set = Self::new(image_id, width, height);
        for inst in instances {
            set.push(inst)?;
        }
        Ok(set)
    }

    pub fn push(&mut self, instance: Instance) -> Result<()> {
        if instance.mask.dims() != (self.width, self.height) {
            return Err(Error::dims((self.width, self.height), instance.mask.dims()));
        }
        self.instances.push(instance);
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn into_instances(self) -> Vec<Instance> {
        self.instances
    }

    /// Same image and dimensions, no instances.
    pub fn empty_like(&self) -> InstanceSet {
        InstanceSet::new(self.image_id.clone(), self.width, self.height)
    }

    /// Relabels every instance through `f`; masks are untouched.
    pub fn map_classes(&self, mut f: impl FnMut(ClassId) -> ClassId) -> InstanceSet {
        InstanceSet {
            image_id: self.image_id.clone(),
            width: self.width,
            height: self.height,
            instances: self
                .instances
                .iter()
                .map(|i| i.clone().with_class(f(i.class)))
                .collect(),
        }
    }

    /// Union of the masks of every instance of `class`.
    pub fn class_union(&self, class: ClassId) -> BinaryMask {
        let mut out = BinaryMask::new(self.width, self.height);
        for inst in self.instances.iter().filter(|i| i.class == class) {
            for (o, &b) in out.bits.iter_mut().zip(&inst.mask.bits) {
                *o |= b;
            }
        }
        out
    }

    pub fn check_same_dims(&self, other: &InstanceSet) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::dims(self.dims(), other.dims()));
        }
        Ok(())
    }
}
