use alloc::vec::Vec;

use super::orb::OrbFeature;
use super::FusionConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureMatch {
    pub a: usize,
    pub b: usize,
    pub distance: u32,
}

/// Nearest and second-nearest distance from `query` into `pool`; ties go to the lower index.
fn two_nearest(query: &OrbFeature, pool: &[OrbFeature]) -> (usize, u32, Option<u32>) {
    let mut best = (usize::MAX, u32::MAX);
    let mut second: Option<u32> = None;
    for (j, f) in pool.iter().enumerate() {
        let d = query.descriptor.hamming(&f.descriptor);
        if d < best.1 {
            if best.0 != usize::MAX {
                second = Some(best.1);
            }
            best = (j, d);
        } else if second.is_none_or(|s| d < s) {
            second = Some(d);
        }
    }
    (best.0, best.1, second)
}

/// Brute-force Hamming matching with the ratio test and mutual-best filtering.
///
/// Fails with [`Error::InsufficientMatches`] when fewer than four matches survive.
pub fn match_features(a: &[OrbFeature], b: &[OrbFeature], cfg: &FusionConfig) -> Result<Vec<FeatureMatch>> {
    let mut out = Vec::new();
    if !a.is_empty() && !b.is_empty() {
        let back: Vec<usize> = b.iter().map(|f| two_nearest(f, a).0).collect();
        for (i, f) in a.iter().enumerate() {
            let (j, d1, d2) = two_nearest(f, b);
            let passes_ratio = d2.is_none_or(|d2| (d1 as f64) < cfg.match_ratio * d2 as f64);
            if passes_ratio && back[j] == i {
                out.push(FeatureMatch {
                    a: i,
                    b: j,
                    distance: d1,
                });
            }
        }
    }
    if out.len() < 4 {
        return Err(Error::InsufficientMatches {
            found: out.len(),
            required: 4,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::Descriptor;
    use crate::rng::SeededRng;

    fn random_features(rng: &mut SeededRng, n: usize) -> Vec<OrbFeature> {
        (0..n)
            .map(|i| OrbFeature {
                x: i as f64,
                y: 0.0,
                angle: 0.0,
                response: 1.0,
                level: 0,
                descriptor: Descriptor([rng.next_u64(), rng.next_u64(), rng.next_u64(), rng.next_u64()]),
            })
            .collect()
    }

    #[test]
    fn identical_lists_match_themselves() {
        let mut rng = SeededRng::new(1);
        let f = random_features(&mut rng, 40);
        let m = match_features(&f, &f, &FusionConfig::default()).unwrap();
        assert_eq!(m.len(), 40);
        assert!(m.iter().all(|m| m.a == m.b && m.distance == 0));
    }

    #[test]
    fn unrelated_descriptors_are_rejected() {
        let mut rng = SeededRng::new(2);
        let a = random_features(&mut rng, 50);
        let b = random_features(&mut rng, 50);
        assert!(matches!(
            match_features(&a, &b, &FusionConfig::default()),
            Err(Error::InsufficientMatches { .. })
        ));
    }

    #[test]
    fn one_flipped_bit_still_matches() {
        let mut rng = SeededRng::new(3);
        let a = random_features(&mut rng, 20);
        let mut b = a.clone();
        b[7].descriptor.0[2] ^= 1 << 13;
        let m = match_features(&a, &b, &FusionConfig::default()).unwrap();
        let hit = m.iter().find(|m| m.a == 7).unwrap();
        assert_eq!((hit.b, hit.distance), (7, 1));
    }

    #[test]
    fn empty_side_is_insufficient() {
        let mut rng = SeededRng::new(4);
        let a = random_features(&mut rng, 5);
        assert!(match_features(&a, &[], &FusionConfig::default()).is_err());
    }
}
