//! Binary morphology with a square structuring element.
//!
//! Pixels outside the image are ignored (neither foreground nor background), which keeps
//! dilation and erosion adjoint on the bounded domain: closing is extensive and
//! idempotent and shapes touching the border are not eaten away.

use alloc::vec;
use alloc::vec::Vec;

use crate::raster::BinaryMask;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Op {
    Dilate,
    Erode,
}

/// One axis of a separable square window. `len` is the line length, `stride` the
/// step between consecutive elements.
fn line_pass(src: &[bool], dst: &mut [bool], start: usize, len: usize, stride: usize, radius: usize, op: Op) {
    let mut prefix: Vec<usize> = vec![0; len + 1];
    for i in 0..len {
        prefix[i + 1] = prefix[i] + usize::from(src[start + i * stride]);
    }
    for i in 0..len {
        let lo = i.saturating_sub(radius);
        let hi = (i + radius + 1).min(len);
        let set = prefix[hi] - prefix[lo];
        dst[start + i * stride] = match op {
            Op::Dilate => set > 0,
            Op::Erode => set == hi - lo,
        };
    }
}

fn apply(mask: &BinaryMask, side: usize, op: Op) -> BinaryMask {
    let radius = side / 2;
    let (w, h) = mask.dims();
    if radius == 0 || w == 0 || h == 0 {
        return mask.clone();
    }
    let src = mask.bits();
    let mut tmp = vec![false; w * h];
    for y in 0..h {
        line_pass(src, &mut tmp, y * w, w, 1, radius, op);
    }
    let mut out = vec![false; w * h];
    for x in 0..w {
        line_pass(&tmp, &mut out, x, h, w, radius, op);
    }
    BinaryMask::from_bits(w, h, out).expect("shape preserved")
}

/// Dilation by a `side x side` square (`side` odd; even sides behave as `side + 1`).
pub fn dilate(mask: &BinaryMask, side: usize) -> BinaryMask {
    apply(mask, side, Op::Dilate)
}

pub fn erode(mask: &BinaryMask, side: usize) -> BinaryMask {
    apply(mask, side, Op::Erode)
}

/// Dilation followed by erosion.
pub fn close(mask: &BinaryMask, side: usize) -> BinaryMask {
    erode(&dilate(mask, side), side)
}

/// Erosion followed by dilation.
pub fn open(mask: &BinaryMask, side: usize) -> BinaryMask {
    dilate(&erode(mask, side), side)
}
