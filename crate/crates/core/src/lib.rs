//! Online learning when the feature space evolves.
//!
//! A stream runs through one cycle: rounds observed only in an old feature
//! space, a short overlap in which both spaces are observed, then rounds in
//! the new space only. The overlap is used to fit a linear map from new to
//! old features so that the old model keeps predicting on recovered
//! features; its predictions are ensembled with a model trained on the new
//! space, either by exponential weighting or by fixed-share selection.

pub mod ensemble;
pub mod error;
pub mod harness;
pub mod losses;
pub mod ogd;
pub mod recovery;
pub mod streams;
pub mod types;

pub use error::{FeslError, Result};
pub use harness::{run_method, MethodKind, RunConfig, RunRecord};
pub use types::{FeatureVector, Instance, Label, LinearModel, Phase, StreamSchedule, Task};
