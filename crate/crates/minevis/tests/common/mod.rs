#![allow(dead_code)]

use std::path::{Path, PathBuf};

use minevis_core::rng::derive_seed;
use minevis_core::synth::scene_corpus;
use minevis_core::{InstanceSet, RasterImage};

pub const CORPUS_SEED: u64 = 7;
pub const CORPUS_SIZE: usize = 10;
pub const MOCK_EPSILON: f64 = 0.2;
pub const MOCK_SEED: u64 = 7;
pub const DEGRADE_SEED: u64 = 42;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

pub fn corpus_images() -> PathBuf {
    fixtures().join("corpus").join("images")
}

pub fn corpus_gt() -> PathBuf {
    fixtures().join("corpus").join("gt")
}

pub fn regenerate() -> bool {
    std::env::var_os("MINEVIS_REGENERATE").is_some()
}

pub fn generated_corpus() -> Vec<(RasterImage, InstanceSet)> {
    scene_corpus(CORPUS_SEED, CORPUS_SIZE)
}

pub fn mock_seed(image_id: &str) -> u64 {
    derive_seed(MOCK_SEED, image_id)
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_minevis")
}

pub fn minevis(args: &[&str]) -> std::process::Output {
    std::process::Command::new(bin())
        .args(args)
        .output()
        .expect("spawn minevis")
}

pub fn arg(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Every regular file under `dir`, relative path and bytes, sorted.
pub fn tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let bytes = std::fs::read(&p).unwrap();
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), bytes));
            }
        }
    }
    out.sort();
    out
}
