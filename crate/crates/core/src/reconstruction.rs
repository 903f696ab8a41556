//! Erasure of demand samples by link outages and their reconstruction at the aggregator.
//!
//! Each sample of a demand series is lost independently with the outage probability.
//! The aggregator copies delivered samples, fills every run of lost samples between
//! two delivered ones by linear interpolation, and holds the nearest delivered value
//! across lost samples at either end of the series. Reconstruction quality is the
//! root-mean-square deviation `sqrt(sum (x_hat[k] - x[k])^2 / N)`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::distr::{Bernoulli, Distribution};
use rand::Rng;

use crate::error::{ensure, Error, Result};
use crate::field::chunk_rng;

pub const HISTOGRAM_BINS: usize = 50;
/// Largest series accepted by [`exact_rmsd`].
pub const EXACT_MAX_SAMPLES: usize = 20;
const CHUNK_REALIZATIONS: u64 = 4096;

/// Average power demand sampled every `tau` hours.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandSeries {
    samples: Vec<f64>,
    tau: f64,
    label: String,
}

impl DemandSeries {
    pub fn new(samples: Vec<f64>, tau: f64, label: impl Into<String>) -> Result<Self> {
        ensure(
            samples.len() >= 2,
            "samples",
            samples.len() as f64,
            "a series of at least 2 samples",
        )?;
        if let Some(&bad) = samples.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidParameter {
                name: "power",
                value: bad,
                expected: "a finite demand >= 0 W",
            });
        }
        ensure(tau > 0.0 && tau.is_finite(), "tau", tau, "a sampling interval > 0 h")?;
        Ok(Self {
            samples,
            tau,
            label: label.into(),
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Delivery indicator per sample; `true` means received.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErasurePattern {
    received: Vec<bool>,
}

impl ErasurePattern {
    pub fn new(received: Vec<bool>) -> Self {
        Self { received }
    }

    pub fn all_received(n: usize) -> Self {
        Self::new(vec![true; n])
    }

    pub fn received(&self) -> &[bool] {
        &self.received
    }

    pub fn len(&self) -> usize {
        self.received.len()
    }

    pub fn is_empty(&self) -> bool {
        self.received.is_empty()
    }

    pub fn erased_count(&self) -> usize {
        self.received.iter().filter(|r| !**r).count()
    }
}

fn erasure_distribution(epsilon: f64) -> Result<Bernoulli> {
    ensure(
        (0.0..1.0).contains(&epsilon),
        "epsilon",
        epsilon,
        "an erasure probability in [0, 1)",
    )?;
    Bernoulli::new(epsilon).map_err(|_| Error::InvalidParameter {
        name: "epsilon",
        value: epsilon,
        expected: "an erasure probability in [0, 1)",
    })
}

/// Erases each of `n` samples independently with probability `epsilon`.
pub fn draw_erasures<R: Rng + ?Sized>(n: usize, epsilon: f64, rng: &mut R) -> Result<ErasurePattern> {
    ensure(n >= 2, "n", n as f64, "a series of at least 2 samples")?;
    let lost = erasure_distribution(epsilon)?;
    Ok(ErasurePattern::new((0..n).map(|_| !lost.sample(rng)).collect()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionReport {
    pub reconstructed: Vec<f64>,
    pub rmsd: f64,
    pub erased_count: usize,
}

/// Root-mean-square deviation between a series and its reconstruction.
pub fn rmsd(original: &[f64], reconstructed: &[f64]) -> f64 {
    debug_assert_eq!(original.len(), reconstructed.len());
    let sum: f64 = original
        .iter()
        .zip(reconstructed)
        .map(|(x, y)| (y - x) * (y - x))
        .sum();
    libm::sqrt(sum / original.len() as f64)
}

/// Writes the reconstruction of `x` under `received` into `out`.
///
/// Fails with [`Error::AllErased`] if nothing was received.
pub fn interpolate_into(x: &[f64], received: &[bool], out: &mut Vec<f64>) -> Result<()> {
    if x.len() != received.len() {
        return Err(Error::LengthMismatch {
            series: x.len(),
            pattern: received.len(),
        });
    }
    let first = received
        .iter()
        .position(|r| *r)
        .ok_or(Error::AllErased(x.len()))?;

    out.clear();
    out.resize(x.len(), x[first]);
    let mut last = first;
    for k in first + 1..x.len() {
        if !received[k] {
            continue;
        }
        out[k] = x[k];
        let gap = k - last;
        if gap == 2 {
            out[last + 1] = (x[k] + x[last]) / 2.0;
        } else if gap > 2 {
            let (a, b) = (x[last], x[k]);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            for (step, v) in out[last + 1..k].iter_mut().enumerate() {
                let t = (step + 1) as f64 / gap as f64;
                *v = (a + (b - a) * t).clamp(lo, hi);
            }
        }
        last = k;
    }
    out[first] = x[first];
    for v in &mut out[last + 1..] {
        *v = x[last];
    }
    Ok(())
}

pub fn reconstruct(s: &DemandSeries, e: &ErasurePattern) -> Result<ReconstructionReport> {
    let mut reconstructed = Vec::with_capacity(s.len());
    interpolate_into(s.samples(), e.received(), &mut reconstructed)?;
    Ok(ReconstructionReport {
        rmsd: rmsd(s.samples(), &reconstructed),
        reconstructed,
        erased_count: e.erased_count(),
    })
}

/// Equal-width histogram; `edges` has one more entry than `counts`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

/// `bins` equal-width bins over `[0, max(values)]`; the maximum lands in the last bin.
///
/// With every value at zero all edges are zero and the first bin holds everything.
pub fn histogram(values: &[f64], bins: usize) -> Histogram {
    assert!(bins >= 1);
    let hi = values.iter().copied().fold(0.0_f64, f64::max);
    let edges = (0..=bins).map(|i| hi * i as f64 / bins as f64).collect();
    let mut counts = vec![0u64; bins];
    for &v in values {
        let idx = if hi > 0.0 {
            ((v / hi * bins as f64) as usize).min(bins - 1)
        } else {
            0
        };
        counts[idx] += 1;
    }
    Histogram { edges, counts }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmsdStatistics {
    pub epsilon: f64,
    pub mean_rmsd: f64,
    /// Standard error of `mean_rmsd`.
    pub stderr: f64,
    /// Per-realization RMSD, in realization order.
    pub rmsds: Vec<f64>,
    /// Draws with every sample erased, discarded and redrawn.
    pub discarded: u64,
    pub seed: u64,
}

impl RmsdStatistics {
    pub fn realizations(&self) -> usize {
        self.rmsds.len()
    }

    pub fn histogram(&self) -> Histogram {
        histogram(&self.rmsds, HISTOGRAM_BINS)
    }

    /// Combines per-chunk results, given in chunk order.
    pub fn from_chunks(
        epsilon: f64,
        seed: u64,
        chunks: impl IntoIterator<Item = RmsdChunk>,
    ) -> Self {
        let mut rmsds = Vec::new();
        let mut discarded = 0;
        for chunk in chunks {
            rmsds.extend_from_slice(&chunk.rmsds);
            discarded += chunk.discarded;
        }
        let n = rmsds.len() as f64;
        let mean = rmsds.iter().sum::<f64>() / n;
        let stderr = if rmsds.len() > 1 {
            let var = rmsds.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1.0);
            libm::sqrt(var / n)
        } else {
            0.0
        };
        Self {
            epsilon,
            mean_rmsd: mean,
            stderr,
            rmsds,
            discarded,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmsdChunk {
    pub rmsds: Vec<f64>,
    pub discarded: u64,
}

pub fn rmsd_chunk_count(realizations: u64) -> u64 {
    realizations.div_ceil(CHUNK_REALIZATIONS)
}

/// Realizations belonging to chunk `chunk` of a run of `realizations`.
pub fn rmsd_chunk(
    s: &DemandSeries,
    epsilon: f64,
    realizations: u64,
    seed: u64,
    chunk: u64,
) -> Result<RmsdChunk> {
    let lost = erasure_distribution(epsilon)?;
    let start = chunk * CHUNK_REALIZATIONS;
    let len = realizations.saturating_sub(start).min(CHUNK_REALIZATIONS) as usize;
    let mut rng = chunk_rng(seed, chunk);
    let x = s.samples();
    let mut received = vec![true; x.len()];
    let mut out = Vec::with_capacity(x.len());
    let mut rmsds = Vec::with_capacity(len);
    let mut discarded = 0;
    while rmsds.len() < len {
        for r in received.iter_mut() {
            *r = !lost.sample(&mut rng);
        }
        match interpolate_into(x, &received, &mut out) {
            Ok(()) => rmsds.push(rmsd(x, &out)),
            Err(Error::AllErased(_)) => discarded += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(RmsdChunk { rmsds, discarded })
}

/// Monte Carlo RMSD over `realizations` independent erasure patterns.
pub fn rmsd_statistics(
    s: &DemandSeries,
    epsilon: f64,
    realizations: u64,
    seed: u64,
) -> Result<RmsdStatistics> {
    ensure(
        realizations >= 1,
        "realizations",
        realizations as f64,
        "at least one realization",
    )?;
    let chunks = (0..rmsd_chunk_count(realizations))
        .map(|c| rmsd_chunk(s, epsilon, realizations, seed, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(RmsdStatistics::from_chunks(epsilon, seed, chunks))
}

pub fn validate_sweep_epsilon(epsilon: f64) -> Result<()> {
    ensure(
        (0.0..=crate::analytic::EPSILON_MAX).contains(&epsilon),
        "epsilon",
        epsilon,
        "a sweep value in [0, 0.25]",
    )
}

/// Mean RMSD at each `epsilon` of the grid. Every point reuses `seed`, so the
/// erasure patterns of neighbouring points are coupled.
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

/// Exact RMSD moments over every erasure pattern, conditioned on at least one sample
/// being received (matching the redraw rule of the Monte Carlo path).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactRmsd {
    pub epsilon: f64,
    pub mean_rmsd: f64,
    /// Standard deviation of the per-pattern RMSD.
    pub std_rmsd: f64,
    pub patterns: u64,
}

/// Enumerates all `2^N` erasure patterns. Limited to `N <= 20`.
pub fn exact_rmsd(s: &DemandSeries, epsilon: f64) -> Result<ExactRmsd> {
    let n = s.len();
    if n > EXACT_MAX_SAMPLES {
        return Err(Error::TooManySamples {
            len: n,
            max: EXACT_MAX_SAMPLES,
        });
    }
    erasure_distribution(epsilon)?;
    let x = s.samples();
    let patterns = 1u64 << n;
    let mut received = vec![false; n];
    let mut out = Vec::with_capacity(n);
    let (mut mass, mut first, mut second) = (0.0, 0.0, 0.0);
    // mask bit i set = sample i received; mask 0 (all erased) is excluded
    for mask in 1..patterns {
        for (i, r) in received.iter_mut().enumerate() {
            *r = mask >> i & 1 == 1;
        }
        let kept = mask.count_ones() as i32;
        let weight = libm::pow(epsilon, (n as i32 - kept) as f64) * libm::pow(1.0 - epsilon, kept as f64);
        if weight == 0.0 {
            continue;
        }
        interpolate_into(x, &received, &mut out)?;
        let r = rmsd(x, &out);
        mass += weight;
        first += weight * r;
        second += weight * r * r;
    }
    let mean = first / mass;
    let var = (second / mass - mean * mean).max(0.0);
    Ok(ExactRmsd {
        epsilon,
        mean_rmsd: mean,
        std_rmsd: libm::sqrt(var),
        patterns: patterns - 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(x: &[f64]) -> DemandSeries {
        DemandSeries::new(x.to_vec(), 0.25, "test").unwrap()
    }

    fn pattern(bits: &[u8]) -> ErasurePattern {
        ErasurePattern::new(bits.iter().map(|b| *b == 1).collect())
    }

    #[test]
    fn series_validation() {
        assert!(DemandSeries::new(vec![1.0], 0.25, "").is_err());
        assert!(DemandSeries::new(vec![1.0, -0.5], 0.25, "").is_err());
        assert!(DemandSeries::new(vec![1.0, f64::NAN], 0.25, "").is_err());
        assert!(DemandSeries::new(vec![1.0, 2.0], 0.0, "").is_err());
        assert!(DemandSeries::new(vec![0.0, 2.0], 0.25, "").is_ok());
    }

    #[test]
    fn single_gap_midpoint() {
        let (a, m, b) = (0.1, 77.0, 0.7);
        let r = reconstruct(&series(&[a, m, b]), &pattern(&[1, 0, 1])).unwrap();
        assert_eq!(r.reconstructed[1], (b + a) / 2.0);
        assert_eq!(r.erased_count, 1);
    }

    #[test]
    fn hand_worked_gaps() {
        let r = reconstruct(&series(&[0.0, 3.0, 6.0, 9.0]), &pattern(&[1, 0, 0, 1])).unwrap();
        assert_eq!(r.reconstructed, vec![0.0, 3.0, 6.0, 9.0]);
        assert_eq!(r.rmsd, 0.0);

        let r = reconstruct(&series(&[0.0, 9.0, 3.0, 9.0]), &pattern(&[1, 0, 1, 1])).unwrap();
        assert_eq!(r.reconstructed, vec![0.0, 1.5, 3.0, 9.0]);
        assert_eq!(r.rmsd, 3.75);
    }

    #[test]
    fn edges_are_held() {
        let r = reconstruct(&series(&[5.0, 6.0, 2.0, 8.0, 1.0]), &pattern(&[0, 0, 1, 1, 0])).unwrap();
        assert_eq!(r.reconstructed, vec![2.0, 2.0, 2.0, 8.0, 8.0]);
    }

    #[test]
    fn all_erased_is_an_error() {
        assert_eq!(
            reconstruct(&series(&[1.0, 2.0]), &pattern(&[0, 0])),
            Err(Error::AllErased(2))
        );
        assert!(matches!(
            reconstruct(&series(&[1.0, 2.0]), &pattern(&[1, 0, 1])),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn zero_epsilon_erases_nothing() {
        let mut rng = chunk_rng(5, 0);
        let p = draw_erasures(1000, 0.0, &mut rng).unwrap();
        assert_eq!(p.erased_count(), 0);
        assert!(draw_erasures(1, 0.1, &mut rng).is_err());
        assert!(draw_erasures(10, 1.0, &mut rng).is_err());
    }

    #[test]
    fn erased_fraction_concentrates() {
        let n = 100_000;
        let p = draw_erasures(n, 0.15, &mut chunk_rng(11, 0)).unwrap();
        let frac = p.erased_count() as f64 / n as f64;
        let sigma = libm::sqrt(0.15 * 0.85 / n as f64);
        assert!((frac - 0.15).abs() < 3.0 * sigma);
    }

    #[test]
    fn erasures_are_reproducible() {
        let a = draw_erasures(500, 0.2, &mut chunk_rng(3, 4)).unwrap();
        let b = draw_erasures(500, 0.2, &mut chunk_rng(3, 4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn histogram_layout() {
        let h = histogram(&[0.0, 1.0, 2.0, 4.0], 4);
        assert_eq!(h.edges, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(h.counts, vec![1, 1, 1, 1]);
        let h = histogram(&[0.0, 0.0], 50);
        assert_eq!(h.counts[0], 2);
        assert!(h.edges.iter().all(|e| *e == 0.0));
    }

    #[test]
    fn zero_epsilon_statistics() {
        let s = series(&[3.0, 10.0, 1.0, 7.0]);
        let st = rmsd_statistics(&s, 0.0, 1000, 1).unwrap();
        assert_eq!(st.mean_rmsd, 0.0);
        assert_eq!(st.stderr, 0.0);
        assert_eq!(st.discarded, 0);
        let sweep = rmsd_sweep(&s, &[0.0], 100, 1).unwrap();
        assert_eq!(sweep[0].mean_rmsd, 0.0);
        assert!(rmsd_sweep(&s, &[0.3], 100, 1).is_err());
    }

    #[test]
    fn discards_all_erased_draws() {
        // two samples at 60% loss: 36% of draws lose both
        let s = series(&[1.0, 5.0]);
        let st = rmsd_statistics(&s, 0.6, 10_000, 2).unwrap();
        assert_eq!(st.realizations(), 10_000);
        let frac = st.discarded as f64 / (10_000 + st.discarded) as f64;
        assert!((frac - 0.36).abs() < 0.03);
    }

    #[test]
    fn exact_mode_guards() {
        let s = DemandSeries::new(vec![1.0; 21], 0.25, "").unwrap();
        assert!(matches!(exact_rmsd(&s, 0.1), Err(Error::TooManySamples { .. })));
        let s = series(&[1.0, 4.0, 2.0]);
        let e = exact_rmsd(&s, 0.0).unwrap();
        assert_eq!(e.mean_rmsd, 0.0);
        assert_eq!(e.patterns, 7);
    }

    #[test]
    fn exact_three_sample_by_hand() {
        // x = [0, 6, 0], received bits -> reconstruction:
        //  101, 100, 001 -> [0,0,0]; 110 -> [0,6,6]; 011 -> [6,6,0]: RMSD sqrt(36/3)
        //  010 -> [6,6,6]: RMSD sqrt(72/3);  111 exact
        let s = series(&[0.0, 6.0, 0.0]);
        let eps: f64 = 0.5;
        let r1 = libm::sqrt(12.0);
        let r2 = libm::sqrt(24.0);
        let w = eps * eps * eps; // every pattern has weight 1/8 at eps = 0.5
        let expected = (5.0 * w * r1 + w * r2) / (1.0 - w);
        let e = exact_rmsd(&s, eps).unwrap();
        assert!((e.mean_rmsd - expected).abs() < 1e-14);
    }
}
