// SPDX-License-Identifier: Apache-2.0

//! Independent simulation jobs, data-parallel with the `parallel` feature.

use super::{Machine, Program, RuntimeError, Stimulus, Trace};
use crate::lanes::LaneWidth;

pub fn map_sequential<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_parallel<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

/// Order-preserving map over independent jobs.
pub fn map_jobs<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        map_parallel(items, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_sequential(items, f)
    }
}

/// Runs one fresh machine per stimulus over `ticks` ticks.
pub fn simulate_batch(
    program: &Program,
    width: LaneWidth,
    stimuli: &[Stimulus],
    ticks: usize,
) -> Vec<Result<Trace, RuntimeError>> {
    map_jobs(stimuli, |s| Machine::new(program.clone(), width).run(s, ticks))
}
