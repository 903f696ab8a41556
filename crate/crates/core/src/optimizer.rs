//! Throughput maximization over the SIR threshold and the secondary power.
//!
//! Without constraints the throughput is maximized at the root of
//!
//! ```text
//! g(beta) = alpha * beta - k * beta^(2/alpha) * (1 + beta) * ln(1 + beta)
//! k       = 2 * lambda * kappa * pi * d^2 * (W_p / W_s)^(2/alpha)
//! ```
//!
//! Under a power cap `W_max` and an outage cap `epsilon`, the throughput is
//! increasing in `W_s`, so `W_s* = W_max`. If the outage at the unconstrained
//! optimum exceeds `epsilon`, the outage constraint binds and `beta*` is the largest
//! threshold it admits:
//!
//! ```text
//! beta* = (W_max / W_p) * (-ln(1 - epsilon) / (lambda * kappa * pi * d^2))^(alpha/2)
//! T*    = (1 - epsilon) * log2(1 + beta*)
//! ```

use alloc::vec::Vec;
use core::f64::consts::LN_2;

use crate::analytic::{spectral_efficiency, Constraints, LinkParams, Network, OperatingPoint};
use crate::error::{Error, Result};
use crate::roots;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_BRACKET_HI: f64 = 1e6;
/// Lower end of the geometric bracket search.
pub const BRACKET_LO: f64 = 1e-6;
const BRACKET_GROWTH: f64 = 2.0;
const MAX_BISECTIONS: u32 = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Absolute tolerance on beta (and on the residual of `g`).
    pub tol: f64,
    /// Upper end of the bracket search.
    pub bracket_hi: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            bracket_hi: DEFAULT_BRACKET_HI,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        crate::error::ensure(self.tol > 0.0, "tol", self.tol, "a tolerance > 0")?;
        crate::error::ensure(
            self.bracket_hi > BRACKET_LO,
            "bracket_hi",
            self.bracket_hi,
            "a bracket end above 1e-6",
        )
    }
}

/// The constant `k` of the stationarity equation.
pub fn stationarity_constant(p: &LinkParams) -> f64 {
    2.0 * p.network().interference_scale() * libm::pow(p.power_ratio(), 2.0 / p.alpha())
}

/// `g(beta) = alpha * beta - k * beta^(2/alpha) * (1 + beta) * ln(1 + beta)`.
///
/// Positive below the unconstrained optimum, negative above it.
pub fn stationarity_residual(alpha: f64, k: f64, beta: f64) -> f64 {
    alpha * beta - k * libm::pow(beta, 2.0 / alpha) * (1.0 + beta) * libm::log1p(beta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnconstrainedSolution {
    pub beta_un: f64,
    pub outage_at_beta_un: f64,
    /// `g(beta_un)`.
    pub residual: f64,
    pub converged: bool,
}

/// Threshold maximizing the unconstrained throughput at the power carried by `p`.
///
/// Brackets the root of `g` by doubling from `1e-6` up to `opts.bracket_hi`, then
/// bisects. Fails with [`Error::NoRoot`] when no sign change is found.
pub fn unconstrained_beta(p: &LinkParams, opts: &SolverOptions) -> Result<UnconstrainedSolution> {
    opts.validate()?;
    let alpha = p.alpha();
    let k = stationarity_constant(p);
    let g = |beta: f64| stationarity_residual(alpha, k, beta);

    // g > 0 at the bottom of the bracket means the optimum lies above it
    if g(BRACKET_LO).is_nan() || g(BRACKET_LO) <= 0.0 {
        return Err(Error::NoRoot {
            lo: BRACKET_LO,
            hi: opts.bracket_hi,
        });
    }
    let (lo, hi) = roots::expand_bracket(g, BRACKET_LO, opts.bracket_hi, BRACKET_GROWTH).ok_or(
        Error::NoRoot {
            lo: BRACKET_LO,
            hi: opts.bracket_hi,
        },
    )?;
    let b = roots::bisect(g, lo, hi, opts.tol, MAX_BISECTIONS);
    Ok(UnconstrainedSolution {
        beta_un: b.root,
        outage_at_beta_un: unconstrained_outage(alpha, b.root),
        residual: g(b.root),
        converged: b.converged,
    })
}

/// Outage probability at the unconstrained optimum,
/// `1 - exp(-alpha * beta / (2 (1 + beta) ln(1 + beta)))`.
///
/// Only `alpha` and the optimum itself enter: the stationarity equation eliminates
/// every other parameter. Strictly decreasing in `beta_un`.
pub fn unconstrained_outage(alpha: f64, beta_un: f64) -> f64 {
    let exponent = alpha * beta_un / (2.0 * (1.0 + beta_un) * libm::log1p(beta_un));
    -libm::expm1(-exponent)
}

/// Largest threshold meeting `1 - P_suc <= epsilon` at `W_s = W_max`.
pub fn outage_limited_beta(net: &Network, c: &Constraints) -> f64 {
    let per_power = -libm::log1p(-c.epsilon()) / net.interference_scale();
    c.w_max() / net.w_p() * libm::pow(per_power, net.alpha() / 2.0)
}

/// Small-threshold approximation of the outage-bound optimum, using `ln(1 + x) ~ x`.
///
/// Exactly linear in `W_max`.
pub fn approx_throughput(net: &Network, c: &Constraints) -> f64 {
    let per_power = -libm::log1p(-c.epsilon()) / net.interference_scale();
    (1.0 - c.epsilon()) * c.w_max() / (LN_2 * net.w_p()) * libm::pow(per_power, net.alpha() / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// The outage constraint is active: `beta*` from the closed form.
    OutageBinding,
    /// The outage at the unconstrained optimum already meets `epsilon`.
    UnconstrainedInterior,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::OutageBinding => "outage_binding",
            Branch::UnconstrainedInterior => "unconstrained_interior",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstrainedSolution {
    pub point: OperatingPoint,
    pub branch: Branch,
    /// Approximate optimum throughput; set on the outage-binding branch.
    pub t_approx: Option<f64>,
    /// Unconstrained optimum at `W_max`, when the root search succeeded.
    pub unconstrained: Option<UnconstrainedSolution>,
}

/// Solves `max log2(1 + beta) P_suc` subject to `W_s <= W_max` and `1 - P_suc <= epsilon`.
pub fn constrained_optimum(
    net: &Network,
    c: &Constraints,
    opts: &SolverOptions,
) -> Result<ConstrainedSolution> {
    let link = net.with_power(c.w_max())?;
    let beta_bound = outage_limited_beta(net, c);

    let unconstrained = match unconstrained_beta(&link, opts) {
        Ok(un) => Some(un),
        Err(Error::NoRoot { .. }) => None,
        Err(e) => return Err(e),
    };
    let binding = match unconstrained {
        Some(un) => un.outage_at_beta_un > c.epsilon(),
        // g has a single positive root, so g(beta_bound) > 0 places beta_bound
        // below the unconstrained optimum even when the root lies outside the bracket.
        None => {
            stationarity_residual(net.alpha(), stationarity_constant(&link), beta_bound) > 0.0
        }
    };

    if binding {
        let p_suc = crate::analytic::success_probability(&link, beta_bound);
        return Ok(ConstrainedSolution {
            point: OperatingPoint {
                beta: beta_bound,
                w_s: c.w_max(),
                p_suc,
                throughput: (1.0 - c.epsilon()) * spectral_efficiency(beta_bound),
            },
            branch: Branch::OutageBinding,
            t_approx: Some(approx_throughput(net, c)),
            unconstrained,
        });
    }

    let un = unconstrained.ok_or(Error::NoRoot {
        lo: BRACKET_LO,
        hi: opts.bracket_hi,
    })?;
    Ok(ConstrainedSolution {
        point: OperatingPoint::evaluate(&link, un.beta_un),
        branch: Branch::UnconstrainedInterior,
        t_approx: None,
        unconstrained,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Lambda,
    WMax,
    Epsilon,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::Lambda => "lambda",
            SweepAxis::WMax => "wmax",
            SweepAxis::Epsilon => "epsilon",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub outcome: Result<ConstrainedSolution>,
}

/// Constrained optimum with one parameter replaced by `value`.
pub fn sweep_point(
    net: &Network,
    c: &Constraints,
    axis: SweepAxis,
    value: f64,
    opts: &SolverOptions,
) -> Result<ConstrainedSolution> {
    match axis {
        SweepAxis::Lambda => constrained_optimum(&net.with_lambda(value)?, c, opts),
        SweepAxis::WMax => constrained_optimum(net, &c.with_w_max(value)?, opts),
        SweepAxis::Epsilon => constrained_optimum(net, &c.with_epsilon(value)?, opts),
    }
}

/// Optimum at every grid value, in grid order. A failing point does not stop the sweep.
pub fn sweep(
    net: &Network,
    c: &Constraints,
    axis: SweepAxis,
    grid: &[f64],
    opts: &SolverOptions,
) -> Vec<SweepPoint> {
    grid.iter()
        .map(|&value| SweepPoint {
            value,
            outcome: sweep_point(net, c, axis, value, opts),
        })
        .collect()
}
