//! Generated stand-ins for the small benchmark datasets.
//!
//! Each profile copies the sample count and both dimensionalities of a
//! benchmark. Features are a low-rank latent signal plus isotropic noise,
//! scaled so that `E ||x||^2 = 1`; labels are the sign of a latent direction
//! corrupted by Gaussian noise calibrated to a target Bayes accuracy.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::BatchData;
use crate::error::{FeslError, Result};
use crate::types::Task;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratedProfile {
    pub name: &'static str,
    pub n: usize,
    pub d1: usize,
    pub d2: usize,
    /// Rank of the latent signal shared by all features.
    pub latent: usize,
    /// Share of feature variance that is isotropic noise.
    pub feature_noise: f64,
    /// Accuracy of the best classifier on the latent signal.
    pub bayes_accuracy: f64,
}

const fn profile(name: &'static str, n: usize, d1: usize, d2: usize, acc: f64) -> GeneratedProfile {
    GeneratedProfile {
        name,
        n,
        d1,
        d2,
        latent: 4,
        feature_noise: 0.05,
        bayes_accuracy: acc,
    }
}

/// Shapes of the nine single-view benchmarks used for synthetic streams.
pub const SYNTHETIC_PROFILES: [GeneratedProfile; 9] = [
    profile("australian", 690, 42, 29, 0.86),
    profile("credit-a", 653, 15, 10, 0.84),
    profile("credit-g", 1000, 20, 14, 0.74),
    profile("diabetes", 768, 8, 5, 0.67),
    profile("dna", 940, 180, 125, 0.70),
    profile("german", 1000, 59, 41, 0.71),
    profile("kr-vs-kp", 3196, 36, 25, 0.64),
    profile("splice", 3175, 60, 42, 0.62),
    profile("svmguide3", 1284, 22, 15, 0.79),
];

impl GeneratedProfile {
    pub fn by_name(name: &str) -> Option<&'static GeneratedProfile> {
        SYNTHETIC_PROFILES.iter().find(|p| p.name == name)
    }

    /// Standard deviation of the label noise that yields `bayes_accuracy`
    /// when the clean margin is standard normal.
    pub fn label_noise(&self) -> f64 {
        (PI * (1.0 - self.bayes_accuracy)).tan()
    }
}

/// Draws the old-space batch of a profile.
pub fn generate_batch(profile: &GeneratedProfile, seed: u64) -> Result<BatchData> {
    let GeneratedProfile {
        n, d1, latent: k, ..
    } = *profile;
    if n == 0 || d1 == 0 || k == 0 {
        return Err(FeslError::invalid("profile sizes must be positive"));
    }
    if !(0.5..1.0).contains(&profile.bayes_accuracy) || !(0.0..1.0).contains(&profile.feature_noise) {
        return Err(FeslError::invalid("profile accuracy or noise out of range"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = |rows: usize, cols: usize| {
        DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
    };
    let loadings: DMatrix<f64> = normal(k, d1);
    let direction: DVector<f64> = normal(k, 1).column(0).normalize();
    let latent: DMatrix<f64> = normal(n, k);
    let noise: DMatrix<f64> = normal(n, d1);
    let label_noise: DMatrix<f64> = normal(n, 1);

    let signal_scale = ((1.0 - profile.feature_noise) / (k * d1) as f64).sqrt();
    let noise_scale = (profile.feature_noise / d1 as f64).sqrt();
    let features = &latent * &loadings * signal_scale + noise * noise_scale;

    let sigma = profile.label_noise();
    let margins = &latent * &direction;
    let labels = margins
        .iter()
        .zip(label_noise.iter())
        .map(|(m, e)| if m + sigma * e >= 0.0 { 1.0 } else { -1.0 })
        .collect();
    Ok(BatchData {
        features,
        labels,
        task: Task::Classification,
    })
}
