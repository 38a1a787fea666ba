use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{FeslError, Result};

/// A `rows x cols` matrix of i.i.d. standard normal entries, filled row-major
/// from a ChaCha8 stream seeded with `seed`.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    DMatrix::from_row_slice(rows, cols, &data)
}

/// Maps every row into a new `d2`-dim space: `features * G` with `G` Gaussian.
pub fn synthesize_second_space(features: &DMatrix<f64>, d2: usize, seed: u64) -> Result<DMatrix<f64>> {
    if d2 == 0 {
        return Err(FeslError::invalid("d2 must be >= 1"));
    }
    let g = gaussian_matrix(features.ncols(), d2, seed);
    synthesize_with_matrix(features, &g)
}

/// `features * map`; exposed so tests can substitute a known map.
pub fn synthesize_with_matrix(features: &DMatrix<f64>, map: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if features.ncols() != map.nrows() {
        return Err(FeslError::DimensionMismatch {
            expected: features.ncols(),
            actual: map.nrows(),
        });
    }
    Ok(features * map)
}
