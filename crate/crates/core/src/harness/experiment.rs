use rayon::prelude::*;

use super::{run_methods, MethodKind, RunConfig, RunRecord};
use crate::error::Result;
use crate::streams::{
    build_cycle, default_schedule, generate_batch, synthesize_second_space, CycleStream,
    GeneratedProfile, SourceKind,
};

/// Mixes a run seed with a purpose tag (splitmix64 finalizer).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A generated dataset, its Gaussian second view and a shuffled default
/// cycle, all determined by `(profile, seed)`.
pub fn synthetic_stream(profile: &GeneratedProfile, seed: u64) -> Result<CycleStream> {
    let batch = generate_batch(profile, derive_seed(seed, 1))?;
    let new = synthesize_second_space(&batch.features, profile.d2, derive_seed(seed, 2))?;
    let schedule = default_schedule(batch.n(), profile.d1, profile.d2, SourceKind::Generated)?;
    Ok(build_cycle(
        &batch.features,
        &new,
        &batch.labels,
        batch.task,
        schedule,
        derive_seed(seed, 3),
    )?
    .with_name(profile.name))
}

/// Runs every `(method, seed)` pair on a fixed stream across the worker pool.
/// Records come back sorted by seed, then method.
pub fn run_grid(
    stream: &CycleStream,
    methods: &[MethodKind],
    seeds: &[u64],
    config: &RunConfig,
) -> Result<Vec<RunRecord>> {
    let per_seed: Vec<Vec<RunRecord>> = seeds
        .par_iter()
        .map(|seed| run_methods(stream, methods, &config.with_seed(*seed)))
        .collect::<Result<_>>()?;
    let mut records: Vec<RunRecord> = per_seed.into_iter().flatten().collect();
    records.sort_by_key(|r| (r.seed, r.method));
    Ok(records)
}
