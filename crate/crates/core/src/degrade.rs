//! Synthetic low-light degradation: darken, stretch contrast about the mean, add noise.

use crate::error::{Error, Result};
use crate::raster::RasterImage;
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct DegradeConfig {
    pub seed: u64,
    /// Standard deviation of the additive Gaussian noise.
    pub noise_sigma: f64,
    /// Multiplier in `(0, 1]`.
    pub brightness_factor: f64,
    /// Multiplier `>= 1` applied around the darkened mean.
    pub contrast_factor: f64,
}

impl Default for DegradeConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            noise_sigma: 0.05,
            brightness_factor: 0.3,
            contrast_factor: 1.3,
        }
    }
}

impl DegradeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidConfig("noise_sigma must be >= 0".into()));
        }
        if !(self.brightness_factor > 0.0 && self.brightness_factor <= 1.0) {
            return Err(Error::InvalidConfig("brightness_factor must be in (0, 1]".into()));
        }
        if !(self.contrast_factor >= 1.0 && self.contrast_factor.is_finite()) {
            return Err(Error::InvalidConfig("contrast_factor must be >= 1".into()));
        }
        Ok(())
    }
}

/// `clamp((v * b - m) * c + m + sigma * z)` for every value, where `m` is the mean of the
/// darkened image and `z` is drawn per value in row-major, channel-interleaved order
/// from [`SeededRng`] seeded with `cfg.seed`.
pub fn degrade(image: &RasterImage, cfg: &DegradeConfig) -> RasterImage {
    let b = cfg.brightness_factor;
    let c = cfg.contrast_factor;
    let mean = image.mean() * b;
    let mut rng = SeededRng::new(cfg.seed);
    image.map(|v| {
        let noise = if cfg.noise_sigma > 0.0 {
            cfg.noise_sigma * rng.normal()
        } else {
            0.0
        };
        (v * b - mean) * c + mean + noise
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gradient() -> RasterImage {
        RasterImage::from_fn(16, 16, 3, |x, y, c| (x + y + c) as f64 / 33.0)
    }

    #[test]
    fn pure_scaling() {
        let cfg = DegradeConfig {
            noise_sigma: 0.0,
            brightness_factor: 0.5,
            contrast_factor: 1.0,
            ..DegradeConfig::default()
        };
        let out = degrade(&RasterImage::filled(4, 4, 1, 0.8), &cfg);
        assert!(out.data().iter().all(|&v| (v - 0.4).abs() < 1e-15));
    }

    #[test]
    fn unit_factors_without_noise_are_identity() {
        let cfg = DegradeConfig {
            noise_sigma: 0.0,
            brightness_factor: 1.0,
            contrast_factor: 1.0,
            ..DegradeConfig::default()
        };
        let img = gradient();
        let out = degrade(&img, &cfg);
        for (a, b) in img.data().iter().zip(out.data()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let cfg = DegradeConfig {
            seed: 42,
            ..DegradeConfig::default()
        };
        assert_eq!(degrade(&gradient(), &cfg), degrade(&gradient(), &cfg));
    }

    #[test]
    fn darkens_on_average() {
        let out = degrade(&gradient(), &DegradeConfig::default());
        assert!(out.mean() < gradient().mean());
    }

    #[test]
    fn validation() {
        assert!(DegradeConfig::default().validate().is_ok());
        assert!(DegradeConfig {
            brightness_factor: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(DegradeConfig {
            contrast_factor: 0.9,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(DegradeConfig {
            noise_sigma: -1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    proptest! {
        #[test]
        fn different_seeds_differ(a in any::<u64>(), b in any::<u64>()) {
            prop_assume!(a != b);
            let img = gradient();
            let da = degrade(&img, &DegradeConfig { seed: a, ..DegradeConfig::default() });
            let db = degrade(&img, &DegradeConfig { seed: b, ..DegradeConfig::default() });
            prop_assert_ne!(da, db);
        }

        #[test]
        fn stays_in_unit_range(seed in any::<u64>(), sigma in 0.0f64..1.0, b in 0.01f64..=1.0, c in 1.0f64..4.0) {
            let cfg = DegradeConfig { seed, noise_sigma: sigma, brightness_factor: b, contrast_factor: c };
            let out = degrade(&gradient(), &cfg);
            prop_assert!(out.data().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
