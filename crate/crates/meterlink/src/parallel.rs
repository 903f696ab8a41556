//! Multi-threaded versions of the chunked core routines.
//!
//! Every chunk owns its random stream, so results are bit-identical to the
//! sequential functions in `meterlink-core` whatever the thread count.

use meterlink_core::field::{chunk_count, chunk_successes};
use meterlink_core::optimizer::sweep_point;
use meterlink_core::reconstruction::{rmsd_chunk, rmsd_chunk_count, validate_sweep_epsilon};
use meterlink_core::{
    Constraints, DemandSeries, Estimate, LinkParams, Network, Result, RmsdStatistics, SimConfig,
    SolverOptions, SweepAxis, SweepPoint,
};
use rayon::prelude::*;

pub const THREADS_ENV: &str = "METERLINK_THREADS";

/// Pool with `threads` workers; `None` or 0 lets rayon pick.
pub fn pool(threads: Option<usize>) -> std::result::Result<rayon::ThreadPool, rayon::ThreadPoolBuildError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
}

pub fn empirical_psuc(p: &LinkParams, beta: f64, cfg: &SimConfig) -> Result<Estimate> {
    // validation is shared with the sequential path
    if cfg.samples == 0 || !(beta > 0.0 && beta.is_finite()) {
        return meterlink_core::empirical_psuc(p, beta, cfg);
    }
    cfg.validate(p)?;
    let successes = (0..chunk_count(cfg.samples))
        .into_par_iter()
        .map(|chunk| chunk_successes(p, beta, cfg, chunk))
        .sum();
    Ok(Estimate::from_counts(successes, cfg.samples))
}

pub fn sweep(
    net: &Network,
    c: &Constraints,
    axis: SweepAxis,
    grid: &[f64],
    opts: &SolverOptions,
) -> Vec<SweepPoint> {
    grid.par_iter()
        .map(|&value| SweepPoint {
            value,
            outcome: sweep_point(net, c, axis, value, opts),
        })
        .collect()
}

pub fn rmsd_statistics(
    s: &DemandSeries,
    epsilon: f64,
    realizations: u64,
    seed: u64,
) -> Result<RmsdStatistics> {
    if realizations == 0 {
        return meterlink_core::rmsd_statistics(s, epsilon, realizations, seed);
    }
    let chunks = (0..rmsd_chunk_count(realizations))
        .into_par_iter()
        .map(|c| rmsd_chunk(s, epsilon, realizations, seed, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(RmsdStatistics::from_chunks(epsilon, seed, chunks))
}

pub fn rmsd_sweep(
    s: &DemandSeries,
    eps_grid: &[f64],
    realizations: u64,
    seed: u64,
) -> Result<Vec<RmsdStatistics>> {
    eps_grid
        .iter()
        .map(|&eps| {
            validate_sweep_epsilon(eps)?;
            rmsd_statistics(s, eps, realizations, seed)
        })
        .collect()
}
