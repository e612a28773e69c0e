//! Run-length mask encoding.
//!
//! A mask is written as comma-separated `value:count` runs in row-major order, where
//! `value` is `0` or `1`. Runs alternate value and the counts add up to
//! `width * height`. The first run carries the value of pixel `(0, 0)`; a mask with no
//! pixels encodes as the empty string.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::error::{Error, Result};
use crate::raster::BinaryMask;

pub fn encode_rle(mask: &BinaryMask) -> String {
    let mut out = String::new();
    let mut bits = mask.bits().iter().copied();
    let Some(mut current) = bits.next() else {
        return out;
    };
    let mut count = 1usize;
    let push = |out: &mut String, value: bool, count: usize| {
        if !out.is_empty() {
            out.push(',');
        }
        let _ = write!(out, "{}:{count}", u8::from(value));
    };
    for b in bits {
        if b == current {
            count += 1;
        } else {
            push(&mut out, current, count);
            current = b;
            count = 1;
        }
    }
    push(&mut out, current, count);
    out
}

/// Decodes a run string into a `width x height` mask.
///
/// Adjacent runs with the same value are accepted; zero-length runs and count totals
/// that differ from `width * height` are rejected.
pub fn decode_rle(rle: &str, width: usize, height: usize) -> Result<BinaryMask> {
    let total = width * height;
    let mut bits = Vec::with_capacity(total);
    let rle = rle.trim();
    if !rle.is_empty() {
        for (run, token) in rle.split(',').enumerate() {
            let bad = |reason: &str| Error::MalformedRle {
                run,
                reason: reason.into(),
            };
            let (value, count) = token
                .trim()
                .split_once(':')
                .ok_or_else(|| bad("expected `value:count`"))?;
            let value = match value.trim() {
                "0" => false,
                "1" => true,
                _ => return Err(bad("value must be 0 or 1")),
            };
            let count: usize = count
                .trim()
                .parse()
                .map_err(|_| bad("count is not a non-negative integer"))?;
            if count == 0 {
                return Err(bad("zero-length run"));
            }
            if bits.len() + count > total {
                return Err(bad("runs exceed width * height"));
            }
            bits.resize(bits.len() + count, value);
        }
    }
    if bits.len() != total {
        return Err(Error::MalformedRle {
            run: rle.split(',').count(),
            reason: alloc::format!("runs cover {} pixels, expected {total}", bits.len()),
        });
    }
    BinaryMask::from_bits(width, height, bits)
}
