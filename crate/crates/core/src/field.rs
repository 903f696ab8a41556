//! Monte Carlo simulation of the Poisson interferer field.
//!
//! Interferers are a homogeneous planar Poisson process of density `lambda` around
//! the aggregator, every channel gain (interferers and the reference link) is a
//! unit-mean exponential, and each sample is a fresh realization of both. A sample
//! succeeds when
//!
//! ```text
//! SIR = W_s g_0 d^-alpha / (W_p sum_i g_i r_i^-alpha) > beta
//! ```
//!
//! The plane is cut at `window_radius`. What lies beyond it is either dropped
//! ([`FarField::Truncated`]) or replaced by its mean `2 pi lambda R^(2-alpha) / (alpha-2)`
//! ([`FarField::MeanField`], the default). The mean follows from Campbell's theorem
//! alone; fluctuations of the far field are second order in `R^(1-alpha)`.
//!
//! Samples are grouped in chunks of [`CHUNK_SAMPLES`]; chunk `i` draws from
//! ChaCha8 stream `i` of the seed, so chunks can be evaluated in any order or in
//! parallel and the success count is the same.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};

use crate::analytic::LinkParams;
use crate::error::{ensure, Result};

pub const CHUNK_SAMPLES: u64 = 8192;
/// Window radius floor, in multiples of the link distance.
pub const MIN_RADIUS_OVER_D: f64 = 10.0;
const DEFAULT_RADIUS_OVER_D: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FarField {
    /// Interference from beyond the window is ignored.
    Truncated,
    /// Interference from beyond the window is replaced by its expectation.
    MeanField,
}

impl FarField {
    pub fn as_str(self) -> &'static str {
        match self {
            FarField::Truncated => "truncated",
            FarField::MeanField => "mean_field",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub window_radius: f64,
    pub samples: u64,
    pub seed: u64,
    pub far_field: FarField,
}

impl SimConfig {
    pub fn new(window_radius: f64, samples: u64, seed: u64) -> Self {
        Self {
            window_radius,
            samples,
            seed,
            far_field: FarField::MeanField,
        }
    }

    pub fn with_far_field(mut self, far_field: FarField) -> Self {
        self.far_field = far_field;
        self
    }

    /// `max(40 d, 40 d beta^(1/alpha))`: the window grows with the distance at which
    /// a unit-gain interferer alone would cause an outage.
    pub fn default_radius(p: &LinkParams, beta: f64) -> f64 {
        let base = DEFAULT_RADIUS_OVER_D * p.d();
        base.max(base * libm::pow(beta, 1.0 / p.alpha()))
    }

    pub fn validate(&self, p: &LinkParams) -> Result<()> {
        ensure(
            self.window_radius.is_finite() && self.window_radius >= MIN_RADIUS_OVER_D * p.d(),
            "window_radius",
            self.window_radius,
            "a finite radius of at least 10 d",
        )?;
        ensure(
            self.samples >= 1,
            "samples",
            self.samples as f64,
            "at least one sample",
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interferer {
    /// Distance to the aggregator, meters.
    pub distance: f64,
    pub gain: f64,
}

/// One draw of the interferer field and of every channel gain.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRealization {
    pub interferers: Vec<Interferer>,
    pub g0: f64,
}

/// Draws a field on the disk of radius `cfg.window_radius`.
///
/// The count is Poisson with mean `lambda pi R^2`; distances come from radius
/// inversion `R sqrt(u)`. Angles do not enter the SIR and are not drawn.
pub fn sample_field<R: Rng + ?Sized>(p: &LinkParams, cfg: &SimConfig, rng: &mut R) -> FieldRealization {
    let radius = cfg.window_radius;
    let mean = p.lambda() * PI * radius * radius;
    let count = match Poisson::new(mean) {
        Ok(poisson) => {
            let n: f64 = poisson.sample(rng);
            n as usize
        }
        Err(_) => 0,
    };
    let interferers = (0..count)
        .map(|_| {
            let u: f64 = rng.random();
            let gain: f64 = Exp1.sample(rng);
            Interferer {
                distance: radius * libm::sqrt(u),
                gain,
            }
        })
        .collect();
    FieldRealization {
        interferers,
        g0: Exp1.sample(rng),
    }
}

/// Signal-to-interference ratio of one realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sir {
    Finite(f64),
    /// No interferer in the window: the link succeeds at any finite threshold.
    NoInterference,
}

impl Sir {
    pub fn exceeds(&self, beta: f64) -> bool {
        match *self {
            Sir::Finite(sir) => sir > beta,
            Sir::NoInterference => beta.is_finite(),
        }
    }
}

pub fn sir(p: &LinkParams, f: &FieldRealization) -> Sir {
    if f.interferers.is_empty() {
        return Sir::NoInterference;
    }
    let alpha = p.alpha();
    let interference: f64 = f
        .interferers
        .iter()
        .map(|i| i.gain * libm::pow(i.distance, -alpha))
        .sum();
    let signal = p.w_s() * f.g0 * libm::pow(p.d(), -alpha);
    Sir::Finite(signal / (p.w_p() * interference))
}

/// Expected `sum g_i r_i^-alpha` over interferers beyond `radius`.
pub fn far_field_mean(p: &LinkParams, radius: f64) -> f64 {
    let alpha = p.alpha();
    2.0 * PI * p.lambda() * libm::pow(radius, 2.0 - alpha) / (alpha - 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub estimate: f64,
    /// Binomial standard error `sqrt(p (1 - p) / M)` of the estimate.
    pub stderr: f64,
    pub successes: u64,
    pub samples: u64,
}

impl Estimate {
    pub fn from_counts(successes: u64, samples: u64) -> Self {
        let m = samples as f64;
        let p = successes as f64 / m;
        Self {
            estimate: p,
            stderr: libm::sqrt(p * (1.0 - p) / m),
            successes,
            samples,
        }
    }
}

pub fn chunk_count(samples: u64) -> u64 {
    samples.div_ceil(CHUNK_SAMPLES)
}

/// Generator for chunk `chunk` of a run seeded with `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Successful samples among those belonging to `chunk`.
///
/// Interferers are generated nearest first (`pi lambda r_k^2` are the arrival times
/// of a unit-rate Poisson process), so a sample stops as soon as the accumulated
/// interference already causes an outage.
pub fn chunk_successes(p: &LinkParams, beta: f64, cfg: &SimConfig, chunk: u64) -> u64 {
    let start = chunk * CHUNK_SAMPLES;
    let len = cfg.samples.saturating_sub(start).min(CHUNK_SAMPLES);
    let mut rng = chunk_rng(cfg.seed, chunk);

    let radius_sq = cfg.window_radius * cfg.window_radius;
    let area_per_arrival = 1.0 / (PI * p.lambda());
    let path_loss = PathLoss::new(p.alpha());
    // success iff g0 > threshold_scale * interference
    let threshold_scale = beta * p.power_ratio() * libm::pow(p.d(), p.alpha());
    let far = match cfg.far_field {
        FarField::Truncated => 0.0,
        FarField::MeanField => far_field_mean(p, cfg.window_radius),
    };

    let mut successes = 0;
    for _ in 0..len {
        let g0: f64 = Exp1.sample(&mut rng);
        let budget = g0 / threshold_scale;
        let mut interference = far;
        let mut outage = interference >= budget;
        let mut arrival = 0.0_f64;
        while !outage {
            let step: f64 = Exp1.sample(&mut rng);
            arrival += step;
            let r2 = arrival * area_per_arrival;
            if r2 > radius_sq {
                break;
            }
            let gain: f64 = Exp1.sample(&mut rng);
            interference += gain * path_loss.at_squared_distance(r2);
            outage = interference >= budget;
        }
        if !outage {
            successes += 1;
        }
    }
    successes
}

/// Fraction of `cfg.samples` field realizations whose SIR exceeds `beta`.
pub fn empirical_psuc(p: &LinkParams, beta: f64, cfg: &SimConfig) -> Result<Estimate> {
    ensure(beta > 0.0 && beta.is_finite(), "beta", beta, "a finite threshold > 0")?;
    cfg.validate(p)?;
    let successes = (0..chunk_count(cfg.samples))
        .map(|chunk| chunk_successes(p, beta, cfg, chunk))
        .sum();
    Ok(Estimate::from_counts(successes, cfg.samples))
}

/// `r^-alpha` from `r^2`.
#[derive(Debug, Clone, Copy)]
enum PathLoss {
    Square,
    Cube,
    /// r^-3
    ThreeHalves,
    General(f64),
}

impl PathLoss {
    fn new(alpha: f64) -> Self {
        let half = alpha / 2.0;
        if half == 2.0 {
            PathLoss::Square
        } else if half == 3.0 {
            PathLoss::Cube
        } else if half == 1.5 {
            PathLoss::ThreeHalves
        } else {
            PathLoss::General(-half)
        }
    }

    #[inline]
    fn at_squared_distance(self, r2: f64) -> f64 {
        match self {
            PathLoss::Square => 1.0 / (r2 * r2),
            PathLoss::Cube => 1.0 / (r2 * r2 * r2),
            PathLoss::ThreeHalves => 1.0 / (r2 * libm::sqrt(r2)),
            PathLoss::General(exp) => libm::pow(r2, exp),
        }
    }
}
