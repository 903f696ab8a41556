//! Closed-form link model for a secondary transmitter inside a Poisson field
//! of primary interferers with Rayleigh fading.
//!
//! The success probability of the reference link is
//!
//! ```text
//! P_suc(beta) = exp(-lambda * kappa * pi * d^2 * (beta * W_p / W_s)^(2 / alpha))
//! kappa       = Gamma(1 + 2/alpha) * Gamma(1 - 2/alpha)
//! ```
//!
//! and its throughput is `log2(1 + beta) * P_suc(beta)` bits/s/Hz.

use core::f64::consts::{LN_2, PI};

use crate::error::{ensure, Error, Result};

pub const ALPHA_MAX: f64 = 6.0;
pub const EPSILON_MAX: f64 = 0.25;

const ALPHA_RANGE: &str =
    "alpha in (2, 6]; kappa = Gamma(1+2/alpha)*Gamma(1-2/alpha) has a Gamma pole at alpha = 2";

/// `Gamma(1 + 2/alpha) * Gamma(1 - 2/alpha)`.
///
/// Evaluated through the reflection identity `Gamma(1+x)Gamma(1-x) = pi x / sin(pi x)`
/// with `x = 2/alpha`, which is exact on `alpha > 2` and needs no general Gamma function.
/// Diverges as `alpha -> 2+`; `alpha <= 2` is rejected.
pub fn kappa(alpha: f64) -> Result<f64> {
    if alpha.is_nan() || alpha <= 2.0 {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            expected: ALPHA_RANGE,
        });
    }
    let x = 2.0 / alpha;
    Ok(PI * x / libm::sin(PI * x))
}

/// Spectral efficiency `log2(1 + beta)` of a link decoding at SIR threshold `beta`.
pub fn spectral_efficiency(beta: f64) -> f64 {
    libm::log1p(beta) / LN_2
}

/// Interferer field and the reference link geometry, without the secondary power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Network {
    lambda: f64,
    alpha: f64,
    d: f64,
    w_p: f64,
    kappa: f64,
}

impl Network {
    /// * `lambda` - interferer density, per square meter
    /// * `alpha` - path-loss exponent, in (2, 6]
    /// * `d` - meter-to-aggregator distance, meters
    /// * `w_p` - primary (interferer) transmit power, watts
    pub fn new(lambda: f64, alpha: f64, d: f64, w_p: f64) -> Result<Self> {
        ensure(lambda > 0.0 && lambda.is_finite(), "lambda", lambda, "a finite density > 0")?;
        let kappa = kappa(alpha)?;
        ensure(alpha <= ALPHA_MAX, "alpha", alpha, ALPHA_RANGE)?;
        ensure(d > 0.0 && d.is_finite(), "d", d, "a finite distance > 0")?;
        ensure(w_p > 0.0 && w_p.is_finite(), "w_p", w_p, "a finite power > 0")?;
        Ok(Self {
            lambda,
            alpha,
            d,
            w_p,
            kappa,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn w_p(&self) -> f64 {
        self.w_p
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `lambda * kappa * pi * d^2`, the power-free factor of the outage exponent.
    pub fn interference_scale(&self) -> f64 {
        self.lambda * self.kappa * PI * self.d * self.d
    }

    pub fn with_lambda(self, lambda: f64) -> Result<Self> {
        Self::new(lambda, self.alpha, self.d, self.w_p)
    }

    pub fn with_power(self, w_s: f64) -> Result<LinkParams> {
        ensure(w_s > 0.0 && w_s.is_finite(), "w_s", w_s, "a finite power > 0")?;
        Ok(LinkParams { net: self, w_s })
    }
}

/// Full parameter set of the reference link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    net: Network,
    w_s: f64,
}

impl LinkParams {
    pub fn new(lambda: f64, alpha: f64, d: f64, w_p: f64, w_s: f64) -> Result<Self> {
        Network::new(lambda, alpha, d, w_p)?.with_power(w_s)
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn lambda(&self) -> f64 {
        self.net.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.net.alpha
    }

    pub fn d(&self) -> f64 {
        self.net.d
    }

    pub fn w_p(&self) -> f64 {
        self.net.w_p
    }

    pub fn w_s(&self) -> f64 {
        self.w_s
    }

    /// `W_p / W_s`; the model depends on the two powers only through this ratio.
    pub fn power_ratio(&self) -> f64 {
        self.net.w_p / self.w_s
    }

    /// `-ln P_suc(beta)`.
    pub fn outage_exponent(&self, beta: f64) -> f64 {
        self.net.interference_scale() * libm::pow(beta * self.power_ratio(), 2.0 / self.net.alpha)
    }
}

/// Probability that the SIR at the aggregator exceeds `beta`.
pub fn success_probability(p: &LinkParams, beta: f64) -> f64 {
    debug_assert!(beta >= 0.0, "negative SIR threshold {beta}");
    libm::exp(-p.outage_exponent(beta))
}

/// Link throughput `log2(1 + beta) * P_suc(beta)` in bits/s/Hz.
pub fn throughput(p: &LinkParams, beta: f64) -> f64 {
    spectral_efficiency(beta) * success_probability(p, beta)
}

/// Power cap and outage constraint of the optimization problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraints {
    w_max: f64,
    epsilon: f64,
}

impl Constraints {
    pub fn new(w_max: f64, epsilon: f64) -> Result<Self> {
        ensure(w_max > 0.0 && w_max.is_finite(), "w_max", w_max, "a finite power > 0")?;
        ensure(
            epsilon > 0.0 && epsilon <= EPSILON_MAX,
            "epsilon",
            epsilon,
            "an outage probability in (0, 0.25]",
        )?;
        Ok(Self { w_max, epsilon })
    }

    pub fn w_max(&self) -> f64 {
        self.w_max
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn with_w_max(self, w_max: f64) -> Result<Self> {
        Self::new(w_max, self.epsilon)
    }

    pub fn with_epsilon(self, epsilon: f64) -> Result<Self> {
        Self::new(self.w_max, epsilon)
    }
}

/// A `(beta, W_s)` pair together with the success probability and throughput it achieves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub beta: f64,
    pub w_s: f64,
    pub p_suc: f64,
    pub throughput: f64,
}

impl OperatingPoint {
    pub fn evaluate(p: &LinkParams, beta: f64) -> Self {
        let p_suc = success_probability(p, beta);
        Self {
            beta,
            w_s: p.w_s(),
            p_suc,
            throughput: spectral_efficiency(beta) * p_suc,
        }
    }

    pub fn outage(&self) -> f64 {
        1.0 - self.p_suc
    }
}
