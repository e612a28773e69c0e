//! Sampling pattern for the steered BRIEF descriptor.
//!
//! 256 point pairs `(x1, y1, x2, y2)` drawn i.i.d. from an isotropic Gaussian with
//! standard deviation `31 / 5` around the keypoint (the Gaussian G II layout of the
//! original BRIEF design), rounded to integers, clamped to `[-13, 13]` so a rotated pair
//! stays inside a 31x31 patch, and redrawn whenever the two points coincide. The draw
//! uses [`SeededRng`](crate::rng::SeededRng) seeded with [`PATTERN_SEED`]; the table below
//! is that draw frozen, and a unit test regenerates it.

pub const PATTERN_SEED: u64 = 0x0b21_ef5e_ed00_0256;

#[rustfmt::skip]
pub static BRIEF_PATTERN: [[i8; 4]; 256] = [
    [-9, 13, 10, -11], [-8, -4, -7, 8], [-1, 3, 0, -3], [-13, -1, 0, 3],
    [-2, 1, 7, 8], [-9, -7, -8, 0], [0, 9, 6, 1], [-6, 6, -6, 0],
    [3, 6, 1, 5], [-2, -3, -8, -8], [-10, 5, 0, 2], [10, 1, 2, -9],
    [8, -3, 5, 13], [6, 11, -10, -4], [7, 6, -7, -9], [7, 13, -1, -1],
    [-2, -1, -2, -5], [-2, -6, -4, 10], [-1, -1, 2, 6], [-4, -2, -1, 4],
    [-9, 6, 11, -13], [4, 2, -3, -10], [-2, -3, 0, 2], [-11, -4, -2, -1],
    [-1, 7, -11, 4], [7, 7, 1, -8], [1, 12, -4, -4], [-5, 2, 9, -10],
    [1, 7, 1, -4], [-8, 11, 7, 9], [2, 1, -2, 1], [-3, 0, -5, 0],
    [11, 0, -1, -1], [3, 3, -4, 5], [8, 5, 0, 8], [-4, 3, -5, 2],
    [3, 11, -1, 2], [1, 7, 5, 3], [0, 2, -6, -5], [8, 7, -4, 2],
    [1, -4, -5, -4], [7, -5, -4, 0], [3, 1, -1, 4], [0, 9, -13, -7],
    [-1, -3, 1, 12], [-5, 9, -4, -13], [-2, -2, 3, 4], [-2, -9, -10, 5],
    [4, 9, -11, 8], [-13, 4, -3, 10], [1, -1, -5, 4], [8, -5, -9, 0],
    [-10, -2, -3, -4], [-10, -5, -1, 6], [-1, 1, 8, -8], [2, -5, 2, -10],
    [2, 2, 0, -3], [7, -2, -2, -5], [-1, 13, -3, -10], [-1, -6, -10, 3],
    [6, 1, 0, -1], [6, 2, -1, 3], [-8, 5, -2, 3], [-6, 6, -6, 4],
    [-8, 3, -4, -4], [1, 7, -8, -5], [-7, 7, 5, -9], [1, 0, -5, 0],
    [6, -3, -13, 1], [-6, -13, -7, 0], [3, -2, -3, -2], [7, 8, -9, 7],
    [4, -3, 2, -7], [7, 2, -3, 4], [2, -12, -13, 5], [0, 10, 3, 2],
    [7, 0, -7, 3], [3, -6, 6, 3], [-5, 5, 0, 1], [2, 1, -2, 2],
    [-2, 13, 4, -3], [2, -13, -9, -7], [0, 2, 4, -4], [4, 6, 0, 2],
    [-7, -1, -7, 12], [-5, -2, 1, -7], [0, 2, -1, -1], [-13, -2, 5, 1],
    [7, -2, 3, -8], [0, 5, -5, 8], [3, -4, -3, 0], [-3, 1, -3, 9],
    [9, 8, 1, 0], [-2, 4, 2, 6], [-8, 9, 1, -5], [-6, -2, 2, -6],
    [-2, 0, -1, -13], [10, 3, 4, 8], [4, 8, 8, 1], [-2, 9, -9, 12],
    [-11, 4, 1, -4], [-12, -5, 2, 0], [-2, -3, 8, -6], [-6, 8, 3, -2],
    [-11, 3, 7, -1], [-7, 2, 10, -12], [13, 0, -5, -5], [-1, 5, -1, 2],
    [3, 2, -12, 4], [1, -8, -2, -3], [0, -7, 10, -11], [1, -7, -12, 10],
    [-8, -10, -4, 3], [4, -1, -2, 5], [9, -13, -11, -6], [0, -12, 5, -11],
    [-7, -3, 4, 4], [-12, -5, -13, 6], [4, -6, -11, 1], [-5, 0, 12, 2],
    [-5, -12, 1, -1], [-5, -5, -1, -3], [13, 7, -3, 6], [2, -10, 9, -1],
    [-1, 5, -1, 13], [-6, 0, -11, -3], [0, 4, -4, -13], [-6, 5, -1, -6],
    [-13, -2, 9, -13], [7, -5, 12, -5], [-5, -2, 3, 5], [-13, 6, 5, 5],
    [3, 5, 9, 11], [2, 9, -4, -3], [13, -6, -6, 5], [10, -1, -7, 13],
    [-7, 4, 7, 5], [2, -3, 3, 5], [0, 2, 3, 1], [0, 0, 0, -2],
    [0, 1, 2, 3], [-6, -8, 3, 12], [2, 3, 4, 1], [3, -4, 1, -1],
    [1, 10, 6, 6], [-6, 8, -2, 0], [-8, -7, 1, 2], [9, -2, 0, -4],
    [1, 13, 9, -11], [-1, 4, 9, -5], [2, -4, 4, 8], [-8, -12, 9, -5],
    [-8, 1, -1, -4], [3, 1, 6, 12], [8, 0, -7, 9], [-4, 10, -4, 3],
    [0, 5, 2, -5], [5, 2, -3, 1], [-2, -4, 0, 5], [0, -1, -2, 10],
    [2, -2, -7, 6], [-1, -6, -9, -6], [-7, -8, 1, -3], [1, -6, 8, -5],
    [-7, 8, 4, -5], [2, -2, -6, 5], [7, 6, -3, 3], [-3, -6, 8, -1],
    [-1, 0, 4, 12], [0, -1, -2, -4], [8, 4, 1, -3], [-4, 3, -7, 2],
    [-2, 2, 1, 0], [-6, 8, 4, 2], [-3, 4, 3, -3], [-3, -11, 6, 3],
    [-1, -1, 7, -5], [10, 2, 11, -4], [-6, -10, 12, -10], [-10, 8, 7, -2],
    [13, -1, 0, 1], [-1, 1, 5, 1], [-6, -3, 13, 0], [6, -13, 1, -5],
    [-10, -12, 2, -1], [-6, 1, 2, 1], [4, 1, 3, -13], [7, -3, 9, -4],
    [5, 2, -4, -7], [10, 2, 6, 6], [2, -2, 2, 5], [-10, -4, 1, -3],
    [3, 2, -4, -3], [-4, 7, -1, 2], [13, -13, -1, -11], [1, -13, 2, 2],
    [-3, -2, 3, 4], [9, 8, -9, -3], [5, -9, 3, 4], [5, 6, -2, 8],
    [-7, 10, -12, -3], [1, 4, -2, -9], [13, -3, -9, -4], [12, 1, -2, -3],
    [13, -1, 0, -1], [-5, -4, -5, 2], [-5, 4, -1, 7], [-7, -4, 1, -9],
    [11, -5, -1, -5], [-8, -6, -3, 4], [-4, -4, -5, -13], [-3, 6, -3, -7],
    [6, 2, -2, 5], [-13, -13, 11, -13], [0, 4, 2, 5], [4, 11, 3, -8],
    [3, 5, -1, 2], [-2, 6, 1, -13], [5, 1, -2, 7], [-13, 6, -6, 3],
    [-3, -4, 2, 9], [-4, 7, 6, 11], [-8, 7, -7, -1], [3, -3, 1, -8],
    [-5, -13, 10, 1], [-11, -11, 7, 2], [4, -3, 5, -1], [-12, 4, -5, 4],
    [-9, 5, -2, -3], [-2, -1, -3, -1], [1, 5, -1, 1], [1, -3, 6, -1],
    [-6, 0, -4, -1], [10, 4, -2, -4], [-12, -11, -13, 4], [9, -3, -4, 0],
    [6, 4, -3, -10], [-7, 9, 3, -2], [9, 10, -13, 11], [-5, 5, 1, 1],
    [-10, 6, -2, -9], [1, 6, 9, -2], [-6, 12, 2, 0], [-6, -4, 0, -1],
    [-9, -5, 7, 10], [-6, 0, 6, 13], [-4, 1, -12, 3], [1, 12, 6, 7],
    [13, -5, 2, 4], [-6, 0, 4, -5], [-10, 5, 1, 8], [7, -1, 11, 5],
    [-2, 0, -2, -4], [3, -5, 4, -12], [9, -3, 9, 10], [2, -1, -1, -5],
];
