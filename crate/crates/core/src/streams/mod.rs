//! Building feature-evolvable streams out of batch datasets.

mod cycle;
mod generate;
mod io;
mod synth;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::types::Task;

pub use cycle::{build_cycle, default_schedule, CycleStream};
pub use generate::{generate_batch, GeneratedProfile, SYNTHETIC_PROFILES};
pub use io::{load_batch, parse_batch, BatchFormat, LoadOptions};
pub use synth::{gaussian_matrix, synthesize_second_space, synthesize_with_matrix};

/// Where the two feature spaces of a dataset come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SourceKind {
    /// One real view; the second is a random Gaussian image of it.
    SyntheticGaussian,
    /// Two real views of the same samples.
    TwoView,
    /// Generated by [`generate_batch`], second view Gaussian.
    Generated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub name: String,
    pub n: usize,
    pub d1: usize,
    pub d2: usize,
    pub task: Task,
    pub source: SourceKind,
}

/// A dense batch dataset: one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchData {
    pub features: DMatrix<f64>,
    pub labels: Vec<f64>,
    pub task: Task,
}

impl BatchData {
    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }
}
